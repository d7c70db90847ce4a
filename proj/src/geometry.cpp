#include "beliefnav/geometry.hpp"

namespace beliefnav {

double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

Eigen::Matrix3d Pose::rotation() const {
    // yaw about +z, then pitch (positive = up) about the camera's -y axis
    return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(-pitch, Vec3::UnitY()) *
            Eigen::AngleAxisd(roll, Vec3::UnitX()))
        .toRotationMatrix();
}

Vec3 Pose::heading() const {
    return Vec3(std::cos(pitch) * std::cos(yaw), std::cos(pitch) * std::sin(yaw),
                std::sin(pitch));
}

void Pose::normalize() {
    yaw = wrap_angle(yaw);
    pitch = wrap_angle(pitch);
    roll = wrap_angle(roll);
}

bool Pose::finite() const {
    return position.allFinite() && std::isfinite(yaw) && std::isfinite(pitch) &&
           std::isfinite(roll);
}

bool CameraIntrinsics::valid() const {
    return width > 0 && height > 0 && hfov > 0.0 && hfov < M_PI && vfov > 0.0 && vfov < M_PI &&
           std::isfinite(mount_height);
}

CameraIntrinsics make_intrinsics(int width, int height, double hfov, double vfov,
                                 double mount_height) {
    CameraIntrinsics intr{width, height, hfov, vfov, mount_height};
    if (!intr.valid()) {
        throw std::invalid_argument("make_intrinsics: invalid camera parameters");
    }
    return intr;
}

Vec3 back_project(double px, double py, double depth, const Pose& pose,
                  const CameraIntrinsics& intr) {
    if (!std::isfinite(depth) || depth <= 0.0) {
        throw std::invalid_argument("back_project: depth must be finite and positive");
    }
    // Camera frame: x forward, y left, z up.
    const Vec3 cam(depth, -depth * (px - intr.cx()) / intr.fx(),
                   -depth * (py - intr.cy()) / intr.fy());
    const Vec3 eye = pose.position + Vec3(0, 0, intr.mount_height);
    return eye + pose.rotation() * cam;
}

std::optional<PixelProjection> project(const Vec3& world, const Pose& pose,
                                       const CameraIntrinsics& intr) {
    const Vec3 eye = pose.position + Vec3(0, 0, intr.mount_height);
    const Vec3 cam = pose.rotation().transpose() * (world - eye);
    if (cam.x() <= 0.0) {
        return std::nullopt;
    }
    PixelProjection p;
    p.px = intr.cx() - intr.fx() * cam.y() / cam.x();
    p.py = intr.cy() - intr.fy() * cam.z() / cam.x();
    p.depth = cam.x();
    return p;
}

VoxelCoord world_to_voxel(const Vec3& x, const GridConfig& cfg) {
    const Vec3 local = (x - cfg.world_origin) / cfg.resolution;
    return VoxelCoord{static_cast<std::int32_t>(std::floor(local.x())),
                      static_cast<std::int32_t>(std::floor(local.y())),
                      static_cast<std::int32_t>(std::floor(local.z()))};
}

} // namespace beliefnav
