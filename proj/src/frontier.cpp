#include "beliefnav/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

namespace beliefnav {

NavGrid::NavGrid(int width, int height, double resolution, const Eigen::Vector2d& origin)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(std::size_t(width) * height, CellState::Unknown) {}

NavGrid NavGrid::from_grid_config(const GridConfig& cfg) {
    return NavGrid(cfg.extents.x(), cfg.extents.y(), cfg.resolution,
                   cfg.world_origin.head<2>());
}

void NavGrid::observe(int x, int y, CellState s) {
    if (!in_bounds(x, y)) return;
    CellState& cur = cells_[std::size_t(y) * width_ + x];
    if (s == CellState::Occupied) {
        cur = CellState::Occupied;
    } else if (s == CellState::Free && cur != CellState::Occupied) {
        cur = CellState::Free;
    }
}

Eigen::Vector2i NavGrid::cell_of(const Eigen::Vector2d& world) const {
    return Eigen::Vector2i(
        static_cast<int>(std::floor((world.x() - origin_.x()) / resolution_)),
        static_cast<int>(std::floor((world.y() - origin_.y()) / resolution_)));
}

Eigen::Vector2d NavGrid::cell_center(int x, int y) const {
    return origin_ + resolution_ * Eigen::Vector2d(x + 0.5, y + 0.5);
}

std::size_t NavGrid::count(CellState s) const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

namespace {

bool touches_unknown(const NavGrid& grid, int x, int y) {
    static constexpr int dx[4] = {1, -1, 0, 0};
    static constexpr int dy[4] = {0, 0, 1, -1};
    for (int i = 0; i < 4; ++i) {
        const int nx = x + dx[i];
        const int ny = y + dy[i];
        if (grid.in_bounds(nx, ny) && grid.at(nx, ny) == CellState::Unknown) {
            return true;
        }
    }
    return false;
}

} // namespace

std::vector<Eigen::Vector2i> detect_frontier_cells(const NavGrid& grid, int min_cells) {
    const int w = grid.width();
    const int h = grid.height();
    std::vector<std::uint8_t> frontier(std::size_t(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (grid.at(x, y) == CellState::Free && touches_unknown(grid, x, y)) {
                frontier[std::size_t(y) * w + x] = 1;
            }
        }
    }

    std::vector<Eigen::Vector2i> result;
    std::vector<std::uint8_t> seen(std::size_t(w) * h, 0);
    std::deque<Eigen::Vector2i> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = std::size_t(y) * w + x;
            if (!frontier[idx] || seen[idx]) continue;

            // flood one 8-connected component
            std::vector<Eigen::Vector2i> component;
            seen[idx] = 1;
            queue.push_back({x, y});
            while (!queue.empty()) {
                const Eigen::Vector2i c = queue.front();
                queue.pop_front();
                component.push_back(c);
                for (int oy = -1; oy <= 1; ++oy) {
                    for (int ox = -1; ox <= 1; ++ox) {
                        if (ox == 0 && oy == 0) continue;
                        const int nx = c.x() + ox;
                        const int ny = c.y() + oy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t nidx = std::size_t(ny) * w + nx;
                        if (frontier[nidx] && !seen[nidx]) {
                            seen[nidx] = 1;
                            queue.push_back({nx, ny});
                        }
                    }
                }
            }
            if (static_cast<int>(component.size()) < min_cells) continue;

            Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
            for (const auto& c : component) centroid += c.cast<double>();
            centroid /= component.size();

            // Snap to the component cell nearest the centroid so the
            // frontier stays traversable.
            Eigen::Vector2i best = component.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (const auto& c : component) {
                const double d = (c.cast<double>() - centroid).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            result.push_back(best);
        }
    }
    std::sort(result.begin(), result.end(), [w](const auto& a, const auto& b) {
        return a.y() * w + a.x() < b.y() * w + b.x();
    });
    return result;
}

std::vector<Vec3> detect_frontiers(const NavGrid& grid, int min_cells) {
    std::vector<Vec3> out;
    for (const Eigen::Vector2i& cell : detect_frontier_cells(grid, min_cells)) {
        const Eigen::Vector2d c = grid.cell_center(cell.x(), cell.y());
        out.emplace_back(c.x(), c.y(), 0.0);
    }
    return out;
}

double aggregate_fov(const Vec3& frontier, double direction, const BeliefMap& posterior_map,
                     const OccupancyGrid& occupancy, const GridConfig& cfg,
                     const CameraIntrinsics& intr, const AggregationConfig& acfg) {
    const Vec3 eye = frontier + Vec3(0, 0, acfg.eye_height);
    const VoxelCoord eye_voxel = world_to_voxel(eye, cfg);

    const double range = acfg.fov_range;
    const int n_az = std::max(
        1, static_cast<int>(std::ceil(intr.hfov * range / cfg.resolution * acfg.ray_density)));
    const int n_pitch = std::max(
        1, static_cast<int>(std::ceil(intr.vfov * range / cfg.resolution * acfg.ray_density)));

    std::unordered_set<VoxelCoord, VoxelCoordHash> visited;
    visited.reserve(1024);

    for (int pi = 0; pi < n_pitch; ++pi) {
        const double pitch = -0.5 * intr.vfov + (pi + 0.5) * intr.vfov / n_pitch;
        const double cp = std::cos(pitch);
        const double sp = std::sin(pitch);
        for (int ai = 0; ai < n_az; ++ai) {
            const double az = direction - 0.5 * intr.hfov + (ai + 0.5) * intr.hfov / n_az;
            const Vec3 dir(cp * std::cos(az), cp * std::sin(az), sp);
            traverse_ray(eye, dir, range, cfg, [&](const VoxelCoord& u) {
                if (!(u == eye_voxel)) {
                    visited.insert(u);
                }
                return !is_occupied(occupancy, u);
            });
        }
    }

    double sum = 0.0;
    std::size_t unknown = 0;
    for (const VoxelCoord& u : visited) {
        const double* b = posterior_map.find(u);
        if (b != nullptr) {
            sum += *b;
        } else {
            ++unknown;
        }
    }
    return sum + static_cast<double>(unknown) * acfg.w_unobserved;
}

std::vector<FrontierCandidate> evaluate_frontiers(const std::vector<Eigen::Vector2i>& cells,
                                                  const NavGrid& grid,
                                                  const BeliefMap& posterior_map,
                                                  const OccupancyGrid& occupancy,
                                                  const GridConfig& cfg,
                                                  const CameraIntrinsics& intr,
                                                  const AggregationConfig& acfg) {
    std::vector<FrontierCandidate> out;
    out.reserve(cells.size());
    for (const Eigen::Vector2i& cell : cells) {
        FrontierCandidate cand;
        cand.cell = cell;
        const Eigen::Vector2d c = grid.cell_center(cell.x(), cell.y());
        cand.position = Vec3(c.x(), c.y(), 0.0);
        for (std::size_t d = 0; d < kFrontierDirections.size(); ++d) {
            cand.direction_belief[d] = aggregate_fov(cand.position, kFrontierDirections[d],
                                                     posterior_map, occupancy, cfg, intr, acfg);
        }
        cand.best_direction = 0;
        for (int d = 1; d < 4; ++d) {
            if (cand.direction_belief[d] > cand.direction_belief[cand.best_direction]) {
                cand.best_direction = d;
            }
        }
        cand.observation_belief = cand.direction_belief[cand.best_direction];
        out.push_back(std::move(cand));
    }
    return out;
}

} // namespace beliefnav
