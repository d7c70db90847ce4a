#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "beliefnav/belief.hpp"
#include "beliefnav/frontier.hpp"
#include "beliefnav/planner.hpp"
#include "beliefnav/providers.hpp"
#include "beliefnav/semantic_map.hpp"
#include "beliefnav/simenv.hpp"

namespace beliefnav {

/// Goal-selection strategy. Anneal is the full system; the others are
/// ablation/baseline modes.
enum class PlannerMode : int {
    Anneal,         // expected-search-distance sequencing
    GreedyMaxBelief, // highest observation belief, no sequencing
    RandomFrontier,  // random frontier, held until it disappears
};

const char* to_string(PlannerMode m);

struct EpisodeConfig {
    int max_steps = 500;
    double success_radius = 0.1; // meters, agent body to target surface
    std::string target;          // empty = scene's target label

    CameraIntrinsics camera = {.width = 96,
                               .height = 72,
                               .hfov = 79.0 * M_PI / 180.0,
                               .vfov = 60.0 * M_PI / 180.0,
                               .mount_height = 0.88};
    double grid_resolution = 0.25;
    double max_depth = 10.0;

    SemanticUpdateConfig semantic; // scales, scorer weights, level mask
    BeliefConfig belief;           // landmark level mask
    /// fov_range <= 0 means "use the detection range's d_max".
    AggregationConfig aggregation{.w_unobserved = 0.01, .fov_range = 0.0, .eye_height = 0.88,
                                  .ray_density = 2.0};
    AnnealConfig anneal;           // SA hyperparameters
    int min_frontier_cells = 2;

    PlannerMode planner_mode = PlannerMode::Anneal;
    bool use_visibility = true;   // false: posterior = prior
    std::optional<DetectionRange> detection_range; // overrides the provider's answer

    double obstacle_band_max = 1.5; // meters; voxels in (floor, band] block navigation
    std::uint64_t seed = 0;

    std::string trace_path; // per-step JSON-lines trace; empty = disabled
};

enum class TerminationReason : int { Success, StepLimit, NoFrontiers, Error };

const char* to_string(TerminationReason r);

struct EpisodeResult {
    bool success = false;
    double path_length = 0.0;    // meters, executed forward steps
    double optimal_length = 0.0; // oracle shortest path, meters
    int steps = 0;
    double spl = 0.0;
    TerminationReason termination = TerminationReason::Error;
    std::string error;

    // instrumentation
    int plan_invocations = 0;
    int exploration_actions = 0;
    int forward_actions = 0;
    int collisions = 0;
};

/// Signals that the local planner cannot reach the goal on the current grid.
struct ReplanNeeded {};

/// One waypoint-following action toward the goal: turn when the heading
/// error exceeds 15 degrees (shorter arc), otherwise move forward; Stop when
/// within stop_radius of a final goal (stop_radius <= 0 disables stopping).
std::variant<Action, ReplanNeeded> local_goto(const Pose& pose, const Vec3& goal,
                                              const NavGrid& grid, double stop_radius = -1.0);

/// Runs one episode of the full pipeline on a scene. Provider failures never
/// throw; they yield a result with TerminationReason::Error.
EpisodeResult run_episode(const SceneSpec& scene, const EpisodeConfig& cfg,
                          const ProviderSet& providers);

struct BatchResult {
    double sr = 0.0;
    double mean_spl = 0.0;
    std::vector<EpisodeResult> episodes;
    std::vector<std::uint64_t> scene_seeds;
    bool any_error = false;
};

/// Episodes over generated scenes with seeds base_seed + i. The aggregate is
/// deterministic for fixed seeds.
BatchResult run_batch(const SceneGenConfig& gen, const EpisodeConfig& cfg,
                      const ProviderSet& providers, int episodes,
                      std::uint64_t base_seed = 0,
                      const std::function<void(int, const EpisodeResult&)>& on_episode = {});

/// Serializes a batch (config echo, per-episode rows, aggregate) to JSON
/// text; byte-stable for identical inputs.
std::string batch_to_json(const BatchResult& batch, const EpisodeConfig& cfg);

/// Maintains all per-episode map state and applies one frame to every map.
/// Exposed for tooling (map dumps) and tests.
class MappingPipeline {
public:
    MappingPipeline(const GridConfig& cfg, const EpisodeConfig& ecfg, const LandmarkSet& landmarks,
                    const DetectionRange& range);

    /// Updates semantic, visibility, occupancy, and traversability state
    /// from one observation.
    void integrate(const Frame& frame, const CameraIntrinsics& intr, EmbeddingProvider& embedder,
                   Segmenter& segmenter);

    /// Marks a disc of cells around the agent Free (the agent being there
    /// proves traversability).
    void stamp_agent(const Eigen::Vector2d& position, double radius = kAgentRadius);

    /// Marks the cell in front of the agent Occupied after a collision.
    void stamp_collision(const Pose& pose);

    /// Recomputes belief over dirty voxels and returns the posterior
    /// (or the prior when visibility is disabled).
    const BeliefMap& refresh_posterior();

    const GridConfig& grid_config() const { return grid_cfg_; }
    const SemanticMap& semantic() const { return semantic_; }
    const BeliefMap& belief() const { return belief_; }
    const VisibilityMap& visibility() const { return visibility_; }
    const OccupancyGrid& occupancy() const { return occupancy_; }
    const NavGrid& nav_grid() const { return nav_; }
    NavGrid& nav_grid() { return nav_; }

private:
    GridConfig grid_cfg_;
    EpisodeConfig ecfg_;
    LandmarkSet landmarks_;
    DetectionRange range_;
    SemanticMap semantic_;
    BeliefMap belief_;
    VisibilityMap visibility_;
    OccupancyGrid occupancy_;
    BeliefMap posterior_;
    NavGrid nav_;
    std::vector<VoxelCoord> dirty_;
    int obstacle_band_top_ = 6; // highest voxel layer that blocks navigation
};

} // namespace beliefnav
