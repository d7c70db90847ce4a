#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "beliefnav/frontier.hpp"
#include "beliefnav/geometry.hpp"

namespace beliefnav {

inline constexpr double kInfDistance = std::numeric_limits<double>::infinity();

/// Shortest 8-connected path length in meters between two Free cells
/// (diagonal cost sqrt(2) * resolution); infinity when disconnected.
/// Throws std::invalid_argument when an endpoint is not Free.
double astar_distance(const NavGrid& grid, const Eigen::Vector2i& a, const Eigen::Vector2i& b);

/// Cells of one shortest path from a to b, inclusive; empty when
/// disconnected.
std::vector<Eigen::Vector2i> astar_path(const NavGrid& grid, const Eigen::Vector2i& a,
                                        const Eigen::Vector2i& b);

/// One sequencing problem: the agent start, the frontier set with their
/// observation beliefs, and the pairwise path-distance matrix. Row/column 0
/// is the start; frontier i maps to index i+1.
struct PlanningInstance {
    Vec3 start = Vec3::Zero();
    std::vector<Vec3> positions;  // frontier positions
    std::vector<double> p_obs;    // observation beliefs, same order
    Eigen::MatrixXd distance;     // (n+1) x (n+1), meters, inf = unreachable

    int num_frontiers() const { return static_cast<int>(positions.size()); }
    bool valid() const;
};

/// Expected search cost W of visiting the frontiers in the given order
/// (0-based frontier indices): sum over visit ranks of the cumulative path
/// distance times that frontier's observation belief. Infinity as soon as a
/// leg is unreachable. Throws std::invalid_argument for a non-permutation.
double plan_cost(const PlanningInstance& instance, std::span<const int> order);

struct PlanResult {
    std::vector<int> order;               // visiting permutation, 0-based frontier indices
    double cost = 0.0;                    // W(order)
    std::vector<double> prefix_distance;  // cumulative path distance per visit rank
};

/// Exhaustive optimum for n <= 10 frontiers; ties broken lexicographically.
/// Throws std::invalid_argument beyond the cap.
PlanResult brute_force_plan(const PlanningInstance& instance);

struct AnnealConfig {
    double t0 = 0.0;          // initial temperature; <= 0 picks 10x the sampled cost spread
    double tf = 1e-3;         // terminal temperature
    double cooling = 0.97;    // geometric cooling rate, in (0,1)
    int chains = 32;          // independent restarts
    double p_swap = 0.4;      // neighbor-operation mix
    double p_shift = 0.3;
    double p_reverse = 0.3;
    double rep_scale = 1.0;   // scales the temperature-driven repetition count
    std::uint64_t seed = 0;
    std::vector<int> warm_start; // optional initial order for chain 0

    bool valid() const {
        return tf > 0.0 && (t0 <= 0.0 || t0 > tf) && cooling > 0.0 && cooling < 1.0 &&
               chains >= 1 && p_swap >= 0.0 && p_shift >= 0.0 && p_reverse >= 0.0 &&
               p_swap + p_shift + p_reverse > 0.0;
    }
};

/// Simulated-annealing solver: independent chains started from a greedy
/// nearest-neighbor tour (or the warm start), swap/shift/reverse neighbors
/// with temperature-scaled repetitions, Metropolis acceptance, geometric
/// cooling, best sample across chains. Deterministic under a fixed seed.
PlanResult anneal_plan(const PlanningInstance& instance, const AnnealConfig& cfg = {});

/// Position of the first frontier in the plan; nullopt when the plan is
/// empty (exploration complete).
std::optional<Vec3> next_goal(const PlanResult& plan, const PlanningInstance& instance);

/// JSON round trip for the benchmark harness:
/// {"start":[...], "frontiers":[{"pos":[...],"p_obs":v},...], "matrix":[[...]]}.
std::string instance_to_json(const PlanningInstance& instance);
PlanningInstance instance_from_json(const std::string& text);

} // namespace beliefnav
