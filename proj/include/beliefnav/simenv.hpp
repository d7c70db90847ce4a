#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beliefnav/geometry.hpp"
#include "beliefnav/observation.hpp"
#include "beliefnav/rng.hpp"

namespace beliefnav {

/// Discrete action set: 0.25 m forward steps and 30-degree turns/looks.
enum class Action : int { MoveForward, TurnLeft, TurnRight, LookUp, LookDown, Stop };

inline constexpr double kForwardStep = 0.25;  // meters
inline constexpr double kTurnAngle = M_PI / 6; // 30 degrees
inline constexpr double kPitchLimit = M_PI / 3; // +-60 degrees
inline constexpr double kAgentRadius = 0.18;   // meters

const char* to_string(Action a);

/// Axis-aligned labeled box.
struct LabeledBox {
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    std::string label;
    std::int32_t label_id = 0; // assigned at load

    bool contains_xy(const Eigen::Vector2d& p) const {
        return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
    }
};

/// Synthetic indoor scene: labeled boxes over a rectangular floor, spawn
/// poses, and a target label. Rooms, walls, floor, and furniture are all
/// boxes; the renderer ray-traces against them.
struct SceneSpec {
    std::string name;
    Eigen::Vector2d floor_min = Eigen::Vector2d::Zero();
    Eigen::Vector2d floor_max = Eigen::Vector2d::Zero();
    std::vector<LabeledBox> boxes;
    std::vector<Pose> spawns;
    std::string target_label;
    std::shared_ptr<const std::vector<std::string>> label_names; // id -> string, [0] = "none"

    static SceneSpec load(const std::string& json_path);
    static SceneSpec from_json_text(const std::string& text);
    std::string to_json_text() const;
    void save(const std::string& json_path) const;

    /// Rebuilds the label table from box labels (id 0 stays "none").
    void assign_label_ids();

    /// Boxes carrying the target label.
    std::vector<const LabeledBox*> target_boxes() const;

    /// Distance from the agent body (center minus agent radius) to the
    /// nearest target box footprint; 0 when touching.
    double target_distance(const Eigen::Vector2d& position) const;

    /// Whether a disc of the given radius at p collides with any box that
    /// intrudes into the agent height band, or leaves the floor.
    bool collides(const Eigen::Vector2d& p, double radius = kAgentRadius) const;

    /// Throws std::invalid_argument when the target is unreachable from every
    /// spawn or boxes leave the floor extents.
    void validate() const;
};

/// Ray-traces depth and semantic labels. Pixels with no hit within max_depth
/// get label "none" and depth 0.
Frame render(const SceneSpec& scene, const Pose& pose, const CameraIntrinsics& intr,
             double max_depth = 10.0);

struct StepResult {
    Pose pose;
    bool collided = false;
};

/// Executes one action. Forward motion is blocked (pose unchanged, flag set)
/// when the agent disc would intersect an obstacle; pitch is clamped to
/// +-60 degrees.
StepResult step(const SceneSpec& scene, const Pose& pose, Action action);

/// Shortest path length (meters) from start to the target success region
/// (target_distance <= success_radius) over a fine traversability grid;
/// nullopt when unreachable. Used for the SPL denominator.
std::optional<double> oracle_shortest_path(const SceneSpec& scene, const Eigen::Vector2d& start,
                                           double success_radius, double fine_resolution = 0.125);

struct SceneGenConfig {
    double house_width = 11.0;   // meters
    double house_height = 8.5;   // meters
    int min_rooms = 3;
    int max_rooms = 4;
    std::string target_label = "cushion";
    double door_width = 1.1;
    double wall_thickness = 0.1;
    double wall_height = 2.0;
};

/// Seeded multi-room generator: rectangular house partitioned into rooms
/// with door gaps, typed furniture per room, the target placed in its
/// associated room, and the spawn placed in a different room. Scenes are
/// validated (target reachable) before returning.
SceneSpec generate_scene(std::uint64_t seed, const SceneGenConfig& cfg = {});

/// Grid config that covers the scene with margin; z spans [0, wall_height].
GridConfig grid_for_scene(const SceneSpec& scene, double resolution = 0.25,
                          double wall_height = 2.0);

} // namespace beliefnav
