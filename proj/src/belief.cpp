#include "beliefnav/belief.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace beliefnav {

namespace {

double clamped_cosine(const FeatureVector& a, const FeatureVector& b) {
    // Providers emit unit-norm vectors, so the dot product is the cosine.
    const double c = static_cast<double>(a.dot(b));
    return std::clamp(c, 0.0, 1.0);
}

/// Max clamped cosine of the query against the cell's stored features;
/// levels without a feature are skipped.
double best_similarity(const HierarchicalFeatureCell& cell, const FeatureVector& query) {
    double best = 0.0;
    for (SemanticLevel level : kAllSemanticLevels) {
        if (!cell.has(level)) continue;
        best = std::max(best, clamped_cosine(query, cell.feature(level)));
    }
    return best;
}

bool has_any_feature(const HierarchicalFeatureCell& cell) {
    for (SemanticLevel level : kAllSemanticLevels) {
        if (cell.has(level)) return true;
    }
    return false;
}

} // namespace

double cell_belief(const HierarchicalFeatureCell& cell, const LandmarkSet& landmarks,
                   const BeliefConfig& bcfg) {
    double b = 0.0;
    for (LandmarkLevel level : kAllLandmarkLevels) {
        if (!bcfg.enabled_levels[static_cast<int>(level)]) continue;
        for (const Landmark& lm : landmarks.at(level)) {
            if (lm.embedding.size() == 0 || lm.relevance == 0.0) continue;
            b += lm.relevance * best_similarity(cell, lm.embedding);
        }
    }
    if (landmarks.target_embedding.size() > 0) {
        b += best_similarity(cell, landmarks.target_embedding);
    }
    return b;
}

BeliefMap compute_belief(const SemanticMap& map, const LandmarkSet& landmarks,
                         const BeliefConfig& bcfg) {
    BeliefMap belief;
    belief.reserve(map.size());
    for (const auto& [u, cell] : map) {
        if (!has_any_feature(cell)) continue;
        belief[u] = cell_belief(cell, landmarks, bcfg);
    }
    return belief;
}

void refresh_belief(BeliefMap& belief, const SemanticMap& map, const LandmarkSet& landmarks,
                    std::span<const VoxelCoord> changed, const BeliefConfig& bcfg) {
    for (const VoxelCoord& u : changed) {
        const HierarchicalFeatureCell* cell = map.find(u);
        if (cell == nullptr || !has_any_feature(*cell)) {
            belief.erase(u);
            continue;
        }
        belief[u] = cell_belief(*cell, landmarks, bcfg);
    }
}

double pixel_confidence(double px, double py, double depth, const CameraIntrinsics& intr,
                        const DetectionRange& range) {
    const double theta = std::atan((px - intr.cx()) / intr.fx());
    const double phi = std::atan((py - intr.cy()) / intr.fy());
    const double ch = [&] {
        const double c = std::cos(theta / intr.hfov * M_PI);
        return c * c;
    }();
    const double cv = [&] {
        const double c = std::cos(phi / intr.vfov * M_PI);
        return c * c;
    }();
    double cd = 1.0;
    if (depth < range.d_min || depth > range.d_max) {
        const double lo = depth - range.d_min;
        const double hi = depth - range.d_max;
        cd = std::exp(-range.falloff * std::min(lo * lo, hi * hi));
    }
    return cd * ch * cv;
}

void update_visibility(VisibilityMap& vis, const Frame& frame, const CameraIntrinsics& intr,
                       const GridConfig& cfg, const DetectionRange& range, double max_depth) {
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) {
            const float d = frame.depth.at(x, y);
            if (!std::isfinite(d) || d <= 0.0f || d > max_depth) continue;
            const double px = pixel_center(x);
            const double py = pixel_center(y);
            const Vec3 pt = back_project(px, py, d, frame.pose, intr);
            const VoxelCoord u = world_to_voxel(pt, cfg);
            if (!cfg.in_bounds(u)) continue;
            const double value = 1.0 - pixel_confidence(px, py, d, intr, range);
            double* stored = vis.find(u);
            if (stored == nullptr) {
                vis[u] = value;
            } else if (value < *stored) {
                *stored = value;
            }
        }
    }
}

BeliefMap posterior(const BeliefMap& belief, const VisibilityMap& vis) {
    BeliefMap post;
    post.reserve(belief.size());
    for (const auto& [u, b] : belief) {
        const double* p = vis.find(u);
        post[u] = (p != nullptr ? *p : 1.0) * b;
    }
    return post;
}

void export_value_ply(const VoxelGrid<double>& values, const GridConfig& cfg,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("export_value_ply: cannot open " + path);
    }
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << values.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\nproperty float value\n";
    out << "end_header\n";
    char line[128];
    for (const VoxelCoord& u : values.sorted_keys()) {
        const Vec3 c = cfg.voxel_center(u);
        std::snprintf(line, sizeof(line), "%.9g %.9g %.9g %.9g\n", c.x(), c.y(), c.z(),
                      *values.find(u));
        out << line;
    }
}

} // namespace beliefnav
