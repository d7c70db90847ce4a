#include "beliefnav/voxel_grid.hpp"

#include <algorithm>

namespace beliefnav {

std::vector<VoxelCoord> ray_cast(const Vec3& origin, const Vec3& direction, double max_range,
                                 const GridConfig& cfg, const OccupancyGrid& occupancy) {
    std::vector<VoxelCoord> out;
    traverse_ray(origin, direction, max_range, cfg, [&](const VoxelCoord& u) {
        out.push_back(u);
        return !is_occupied(occupancy, u);
    });
    return out;
}

} // namespace beliefnav
