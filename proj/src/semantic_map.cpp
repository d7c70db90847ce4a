#include "beliefnav/semantic_map.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace beliefnav {

namespace {

bool usable_depth(const Frame& frame, int x, int y, double max_depth) {
    const float d = frame.depth.at(x, y);
    return std::isfinite(d) && d > 0.0f && d <= max_depth;
}

} // namespace

std::vector<PatchStats> split_patches(const Frame& frame, const CameraIntrinsics& intr,
                                      const GridConfig& cfg, int max_scale, double max_depth) {
    const int W = frame.width();
    const int H = frame.height();
    if (max_scale < 1) {
        throw std::invalid_argument("split_patches: max_scale must be >= 1");
    }
    const int finest = 1 << (max_scale - 1);
    if (W / finest < 1 || H / finest < 1) {
        throw std::invalid_argument("split_patches: patches would be smaller than one pixel");
    }

    std::vector<PatchStats> patches;
    for (int k = 1; k <= max_scale; ++k) {
        const int n = 1 << (k - 1);
        const int base_w = W / n;
        const int base_h = H / n;
        for (int row = 0; row < n; ++row) {
            for (int col = 0; col < n; ++col) {
                PatchStats p;
                p.scale = k;
                p.row = row;
                p.col = col;
                p.x0 = col * base_w;
                p.y0 = row * base_h;
                p.x1 = (col == n - 1) ? W : (col + 1) * base_w;
                p.y1 = (row == n - 1) ? H : (row + 1) * base_h;

                Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
                Vec3 hi = -lo;
                int count = 0;
                for (int y = p.y0; y < p.y1; ++y) {
                    for (int x = p.x0; x < p.x1; ++x) {
                        if (!usable_depth(frame, x, y, max_depth)) continue;
                        const Vec3 pt = back_project(pixel_center(x), pixel_center(y),
                                                     frame.depth.at(x, y), frame.pose, intr);
                        lo = lo.cwiseMin(pt);
                        hi = hi.cwiseMax(pt);
                        ++count;
                    }
                }
                p.point_count = count;
                if (count > 0) {
                    // Clamp each AABB extent to one voxel so planar patches
                    // keep a finite density.
                    const Vec3 extent = (hi - lo).cwiseMax(cfg.resolution);
                    p.volume = extent.x() * extent.y() * extent.z();
                    p.density = count / p.volume;
                }
                patches.push_back(std::move(p));
            }
        }
    }
    return patches;
}

double score_patch(const PatchStats& stats, SemanticLevel level, const ScorerWeights& weights) {
    if (!stats.has_points()) {
        return kUnscorable;
    }
    switch (level) {
        case SemanticLevel::Scene:
            return weights.w1 * stats.volume + weights.w2 * stats.instance_count;
        case SemanticLevel::Region:
            if (!(stats.volume > 0.0)) return kUnscorable;
            return weights.w3 * (stats.instance_count / stats.volume) +
                   weights.w4 * stats.density;
        case SemanticLevel::Object:
            if (stats.instance_count <= 0 || !(stats.volume > 0.0)) return kUnscorable;
            return stats.density / stats.instance_count;
    }
    return kUnscorable;
}

LevelSelection select_per_pixel(const std::vector<PatchStats>& patches, SemanticLevel level,
                                int width, int height, const ScorerWeights& weights) {
    LevelSelection sel;
    sel.width = width;
    sel.height = height;
    sel.patch_index.assign(std::size_t(width) * height, -1);

    int max_scale = 0;
    for (const PatchStats& p : patches) max_scale = std::max(max_scale, p.scale);

    // (scale, row, col) -> patch index, plus cached scores
    std::vector<std::vector<std::int32_t>> by_scale(max_scale);
    for (int k = 1; k <= max_scale; ++k) {
        const int n = 1 << (k - 1);
        by_scale[k - 1].assign(std::size_t(n) * n, -1);
    }
    std::vector<double> score(patches.size(), kUnscorable);
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const PatchStats& p = patches[i];
        const int n = 1 << (p.scale - 1);
        by_scale[p.scale - 1][std::size_t(p.row) * n + p.col] = static_cast<std::int32_t>(i);
        if (p.feature.size() > 0) {
            score[i] = score_patch(p, level, weights);
        }
    }

    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double best = kUnscorable;
            std::int32_t best_idx = -1;
            for (int k = 1; k <= max_scale; ++k) {
                const int n = 1 << (k - 1);
                const int row = std::min(y / std::max(1, height / n), n - 1);
                const int col = std::min(x / std::max(1, width / n), n - 1);
                const std::int32_t idx = by_scale[k - 1][std::size_t(row) * n + col];
                if (idx < 0) continue;
                const double s = score[idx];
                if (s == kUnscorable) continue;
                if (s > best) { // strict: ties keep the coarser scale
                    best = s;
                    best_idx = idx;
                }
            }
            sel.patch_index[std::size_t(y) * width + x] = best_idx;
        }
    }
    return sel;
}

std::vector<VoxelCoord> update_semantic_map(SemanticMap& map, const Frame& frame,
                                            const CameraIntrinsics& intr, const GridConfig& cfg,
                                            const SemanticUpdateConfig& ucfg,
                                            EmbeddingProvider& embedder, Segmenter& segmenter) {
    std::vector<PatchStats> patches = split_patches(frame, intr, cfg, ucfg.max_scale,
                                                    ucfg.max_depth);
    for (PatchStats& p : patches) {
        if (!p.has_points()) continue;
        const ImageRegion region{&frame, p.x0, p.y0, p.x1, p.y1};
        p.instance_count = segmenter.instance_count(region);
        if (auto feature = embedder.embed_patch(region)) {
            p.feature = std::move(*feature);
        }
    }

    std::array<LevelSelection, kNumSemanticLevels> selections;
    std::array<std::vector<float>, kNumSemanticLevels> level_scores;
    for (SemanticLevel level : kAllSemanticLevels) {
        const int li = static_cast<int>(level);
        if (!ucfg.enabled_levels[li]) continue;
        selections[li] =
            select_per_pixel(patches, level, frame.width(), frame.height(), ucfg.weights);
        auto& scores = level_scores[li];
        scores.assign(patches.size(), 0.0f);
        for (std::size_t i = 0; i < patches.size(); ++i) {
            scores[i] = static_cast<float>(score_patch(patches[i], level, ucfg.weights));
        }
    }

    std::unordered_set<VoxelCoord, VoxelCoordHash> dirty;
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) {
            if (!usable_depth(frame, x, y, ucfg.max_depth)) continue;
            const Vec3 pt = back_project(pixel_center(x), pixel_center(y), frame.depth.at(x, y),
                                         frame.pose, intr);
            const VoxelCoord u = world_to_voxel(pt, cfg);
            if (!cfg.in_bounds(u)) continue;

            HierarchicalFeatureCell* cell = map.find(u);
            for (SemanticLevel level : kAllSemanticLevels) {
                const int li = static_cast<int>(level);
                if (!ucfg.enabled_levels[li]) continue;
                const std::int32_t idx = selections[li].at(x, y);
                if (idx < 0) continue;
                const float s = level_scores[li][idx];
                if (cell != nullptr && cell->has(level) && !(s > cell->scores[li])) {
                    continue;
                }
                if (cell == nullptr) {
                    cell = &map[u];
                }
                cell->features[li] = patches[idx].feature;
                cell->scores[li] = s;
                dirty.insert(u);
            }
        }
    }

    std::vector<VoxelCoord> changed(dirty.begin(), dirty.end());
    std::sort(changed.begin(), changed.end());
    return changed;
}

void export_semantic_map(const SemanticMap& map, const GridConfig& cfg, const std::string& path) {
    int dim = 0;
    std::size_t records = 0;
    for (const auto& [u, cell] : map) {
        for (SemanticLevel level : kAllSemanticLevels) {
            if (!cell.has(level)) continue;
            ++records;
            const int d = static_cast<int>(cell.feature(level).size());
            if (dim == 0) dim = d;
            if (dim != d) {
                throw std::runtime_error("export_semantic_map: inconsistent feature dims");
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("export_semantic_map: cannot open " + path);
    }
    for (const VoxelCoord& u : map.sorted_keys()) {
        const HierarchicalFeatureCell& cell = *map.find(u);
        for (SemanticLevel level : kAllSemanticLevels) {
            if (!cell.has(level)) continue;
            const std::int32_t head[4] = {u.x, u.y, u.z, static_cast<std::int32_t>(level)};
            out.write(reinterpret_cast<const char*>(head), sizeof(head));
            const float score = cell.score(level);
            out.write(reinterpret_cast<const char*>(&score), sizeof(score));
            out.write(reinterpret_cast<const char*>(cell.feature(level).data()),
                      sizeof(float) * dim);
        }
    }
    out.close();

    nlohmann::json side;
    side["format"] = "beliefnav-semantic-map";
    side["version"] = 1;
    side["endianness"] = "little";
    side["feature_dim"] = dim;
    side["record_count"] = records;
    side["levels"] = {"scene", "region", "object"};
    side["grid"] = {{"resolution", cfg.resolution},
                    {"origin", {cfg.world_origin.x(), cfg.world_origin.y(), cfg.world_origin.z()}},
                    {"extents", {cfg.extents.x(), cfg.extents.y(), cfg.extents.z()}}};
    std::ofstream sidecar(path + ".json");
    sidecar << side.dump(2) << "\n";
}

SemanticMap import_semantic_map(const std::string& path, GridConfig* cfg_out) {
    std::ifstream sidecar(path + ".json");
    if (!sidecar) {
        throw std::runtime_error("import_semantic_map: missing sidecar for " + path);
    }
    nlohmann::json side = nlohmann::json::parse(sidecar);
    const int dim = side.at("feature_dim").get<int>();
    if (cfg_out != nullptr) {
        cfg_out->resolution = side.at("grid").at("resolution").get<double>();
        const auto& o = side.at("grid").at("origin");
        cfg_out->world_origin = Vec3(o[0].get<double>(), o[1].get<double>(), o[2].get<double>());
        const auto& e = side.at("grid").at("extents");
        cfg_out->extents = Eigen::Vector3i(e[0].get<int>(), e[1].get<int>(), e[2].get<int>());
    }

    SemanticMap map;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("import_semantic_map: cannot open " + path);
    }
    while (true) {
        std::int32_t head[4];
        if (!in.read(reinterpret_cast<char*>(head), sizeof(head))) break;
        float score = 0.0f;
        in.read(reinterpret_cast<char*>(&score), sizeof(score));
        FeatureVector feature(dim);
        in.read(reinterpret_cast<char*>(feature.data()), sizeof(float) * dim);
        if (!in) {
            throw std::runtime_error("import_semantic_map: truncated record in " + path);
        }
        HierarchicalFeatureCell& cell = map[VoxelCoord{head[0], head[1], head[2]}];
        cell.features[head[3]] = std::move(feature);
        cell.scores[head[3]] = score;
    }
    return map;
}

} // namespace beliefnav
