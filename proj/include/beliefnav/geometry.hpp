#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace beliefnav {

using Vec3 = Eigen::Vector3d;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Agent pose. World frame is z-up; at yaw 0 the camera looks along +x.
/// Positive pitch looks up. Angles in radians.
struct Pose {
    Vec3 position = Vec3::Zero();
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;

    /// Rotation taking camera-frame vectors (x forward, y left, z up) to world.
    Eigen::Matrix3d rotation() const;
    /// Unit forward direction in world frame.
    Vec3 heading() const;
    /// Wraps all angles to (-pi, pi].
    void normalize();
    bool finite() const;
};

/// Pinhole model described by field-of-view angles. The camera is mounted
/// mount_height above the agent base. Pixel (u,v) is sampled at image-plane
/// position (u+0.5, v+0.5) with the principal point at (width/2, height/2).
struct CameraIntrinsics {
    int width = 640;
    int height = 480;
    double hfov = 0.0; // radians, (0, pi)
    double vfov = 0.0; // radians, (0, pi)
    double mount_height = 0.88;

    double fx() const { return 0.5 * width / std::tan(0.5 * hfov); }
    double fy() const { return 0.5 * height / std::tan(0.5 * vfov); }
    double cx() const { return 0.5 * width; }
    double cy() const { return 0.5 * height; }

    bool valid() const;
};

/// Throws std::invalid_argument unless the intrinsics are well formed.
CameraIntrinsics make_intrinsics(int width, int height, double hfov, double vfov,
                                 double mount_height);

/// Integer voxel index.
struct VoxelCoord {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;

    friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
    friend auto operator<=>(const VoxelCoord&, const VoxelCoord&) = default;
};

struct VoxelCoordHash {
    std::size_t operator()(const VoxelCoord& v) const noexcept {
        // splitmix64 over the packed coordinate triple
        std::uint64_t k = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.x)) << 42) ^
                          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.y)) << 21) ^
                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(v.z));
        k += 0x9e3779b97f4a7c15ull;
        k = (k ^ (k >> 30)) * 0xbf58476d1ce4e5b9ull;
        k = (k ^ (k >> 27)) * 0x94d049bb133111ebull;
        return static_cast<std::size_t>(k ^ (k >> 31));
    }
};

/// Discretization of world space into voxels. `extents` counts voxels per
/// axis starting at index 0, i.e. valid indices are [0, extents).
struct GridConfig {
    double resolution = 0.25; // meters per voxel
    Vec3 world_origin = Vec3::Zero();
    Eigen::Vector3i extents = Eigen::Vector3i(256, 256, 32);

    bool in_bounds(const VoxelCoord& u) const {
        return u.x >= 0 && u.x < extents.x() && u.y >= 0 && u.y < extents.y() && u.z >= 0 &&
               u.z < extents.z();
    }
    Vec3 voxel_center(const VoxelCoord& u) const {
        return world_origin + resolution * Vec3(u.x + 0.5, u.y + 0.5, u.z + 0.5);
    }
    bool valid() const { return resolution > 0.0 && (extents.array() > 0).all(); }
};

/// Back-projects a pixel into the world frame. `depth` is the distance along
/// the camera's forward axis (depth-image convention, not ray range).
/// (px, py) are continuous image-plane coordinates; use pixel_center() to
/// convert integer indices. Throws std::invalid_argument on non-finite or
/// non-positive depth.
Vec3 back_project(double px, double py, double depth, const Pose& pose,
                  const CameraIntrinsics& intr);

inline double pixel_center(int index) { return index + 0.5; }

struct PixelProjection {
    double px = 0.0;
    double py = 0.0;
    double depth = 0.0; // forward-axis depth, meters
};

/// Projects a world point into the image. Returns nullopt when the point is
/// behind the camera plane. The result may fall outside the pixel bounds.
std::optional<PixelProjection> project(const Vec3& world, const Pose& pose,
                                       const CameraIntrinsics& intr);

/// Floors a world point into its voxel. Points exactly on a boundary belong
/// to the higher-index voxel. The result may be out of bounds; callers check
/// cfg.in_bounds() and decide whether to drop or grow.
VoxelCoord world_to_voxel(const Vec3& x, const GridConfig& cfg);

/// Amanatides-Woo traversal of the voxels pierced by a ray. `visit` is
/// called once per voxel in order of increasing entry distance, starting
/// with the voxel containing `origin`; return false from it to stop.
/// Traversal ends when the entry distance exceeds max_range or the ray
/// leaves the grid bounds. Throws std::invalid_argument for a zero-norm
/// direction or non-positive max_range.
template <class Visit>
void traverse_ray(const Vec3& origin, const Vec3& direction, double max_range,
                  const GridConfig& cfg, Visit&& visit) {
    const double norm = direction.norm();
    if (!(norm > 0.0) || !direction.allFinite()) {
        throw std::invalid_argument("traverse_ray: direction must be non-zero and finite");
    }
    if (!(max_range > 0.0)) {
        throw std::invalid_argument("traverse_ray: max_range must be positive");
    }
    const Vec3 dir = direction / norm;
    const double res = cfg.resolution;

    VoxelCoord u = world_to_voxel(origin, cfg);
    const Vec3 local = (origin - cfg.world_origin) / res;

    std::int32_t step[3];
    double t_max[3];
    double t_delta[3];
    const double inf = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double d = dir[a];
        const double cell = (a == 0 ? u.x : a == 1 ? u.y : u.z);
        if (d > 0.0) {
            step[a] = 1;
            t_max[a] = ((cell + 1.0) - local[a]) * res / d;
            t_delta[a] = res / d;
        } else if (d < 0.0) {
            step[a] = -1;
            t_max[a] = (local[a] - cell) * res / -d;
            t_delta[a] = res / -d;
        } else {
            step[a] = 0;
            t_max[a] = inf;
            t_delta[a] = inf;
        }
    }

    while (cfg.in_bounds(u)) {
        if (!visit(static_cast<const VoxelCoord&>(u))) {
            return;
        }
        int axis = 0;
        if (t_max[1] < t_max[axis]) axis = 1;
        if (t_max[2] < t_max[axis]) axis = 2;
        if (t_max[axis] > max_range) {
            return;
        }
        if (axis == 0) {
            u.x += step[0];
        } else if (axis == 1) {
            u.y += step[1];
        } else {
            u.z += step[2];
        }
        t_max[axis] += t_delta[axis];
    }
}

} // namespace beliefnav
