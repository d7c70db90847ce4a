#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "beliefnav/belief.hpp"
#include "beliefnav/geometry.hpp"
#include "beliefnav/voxel_grid.hpp"

namespace beliefnav {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

/// 2D traversability grid aligned with the voxel grid's x/y axes at the same
/// resolution.
class NavGrid {
public:
    NavGrid() = default;
    NavGrid(int width, int height, double resolution, const Eigen::Vector2d& origin);

    static NavGrid from_grid_config(const GridConfig& cfg);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    const Eigen::Vector2d& origin() const { return origin_; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }
    CellState at(int x, int y) const { return cells_[std::size_t(y) * width_ + x]; }
    void set(int x, int y, CellState s) { cells_[std::size_t(y) * width_ + x] = s; }

    /// Occupied always wins; Free never downgrades to Unknown.
    void observe(int x, int y, CellState s);

    Eigen::Vector2i cell_of(const Eigen::Vector2d& world) const;
    Eigen::Vector2d cell_center(int x, int y) const;

    std::size_t count(CellState s) const;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.25;
    Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
    std::vector<CellState> cells_;
};

/// A traversable frontier position with its per-direction observation
/// beliefs; observation_belief is the max over the four directions.
struct FrontierCandidate {
    Vec3 position = Vec3::Zero();
    Eigen::Vector2i cell = Eigen::Vector2i::Zero();
    std::array<double, 4> direction_belief{};
    int best_direction = 0; // index into kFrontierDirections
    double observation_belief = 0.0;
};

/// The four evaluated viewing azimuths (radians).
inline constexpr std::array<double, 4> kFrontierDirections = {0.0, M_PI / 2, M_PI,
                                                              3 * M_PI / 2};

struct AggregationConfig {
    double w_unobserved = 0.01; // bonus per visible voxel outside the belief map
    double fov_range = 4.0;     // meters
    double eye_height = 0.88;   // meters above the frontier cell
    double ray_density = 2.0;   // rays per voxel subtended at fov_range, per axis
};

/// Centroids of connected components of Free cells that touch Unknown
/// (4-adjacency for the frontier test, 8-adjacency for clustering).
/// Components below min_cells are dropped. Each centroid is snapped to the
/// component's nearest frontier cell so the result is traversable. Output is
/// ordered by grid index.
std::vector<Eigen::Vector2i> detect_frontier_cells(const NavGrid& grid, int min_cells = 2);

/// detect_frontier_cells mapped to world points (cell centers, z = 0).
std::vector<Vec3> detect_frontiers(const NavGrid& grid, int min_cells = 2);

/// Observation belief for one viewing direction: casts a fan of rays over
/// the camera FOV from eye height, collects each traversed voxel once
/// (stopping at occupied voxels or fov_range), and returns the sum of
/// posterior values over mapped voxels plus w_unobserved per unmapped voxel.
/// The voxel containing the eye is not counted.
double aggregate_fov(const Vec3& frontier, double direction, const BeliefMap& posterior_map,
                     const OccupancyGrid& occupancy, const GridConfig& cfg,
                     const CameraIntrinsics& intr, const AggregationConfig& acfg);

/// Evaluates all four directions per frontier; candidates keep the input
/// (grid-index) order.
std::vector<FrontierCandidate> evaluate_frontiers(const std::vector<Eigen::Vector2i>& cells,
                                                  const NavGrid& grid,
                                                  const BeliefMap& posterior_map,
                                                  const OccupancyGrid& occupancy,
                                                  const GridConfig& cfg,
                                                  const CameraIntrinsics& intr,
                                                  const AggregationConfig& acfg);

} // namespace beliefnav
