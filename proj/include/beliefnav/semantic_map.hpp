#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "beliefnav/geometry.hpp"
#include "beliefnav/observation.hpp"
#include "beliefnav/providers.hpp"
#include "beliefnav/types.hpp"
#include "beliefnav/voxel_grid.hpp"

namespace beliefnav {

/// Scorer weights for the three level-specific patch scorers.
struct ScorerWeights {
    double w1 = 0.05; // scene: volume
    double w2 = 0.1;  // scene: instance count
    double w3 = 2.0;  // region: instances per volume
    double w4 = 0.01; // region: point density
};

inline constexpr double kUnscorable = -std::numeric_limits<double>::infinity();

/// Geometry and content statistics of one multi-scale image patch.
struct PatchStats {
    int scale = 1;   // k, 1-based
    int row = 0;     // patch row within the 2^(k-1) grid, 0-based
    int col = 0;     // patch col within the 2^(k-1) grid, 0-based
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // pixel rect, half-open

    int point_count = 0;     // valid-depth pixels
    double volume = 0.0;     // AABB volume of the back-projected points, m^3
    double density = 0.0;    // point_count / volume
    int instance_count = 0;  // semantic instances reported by the segmenter
    FeatureVector feature;   // patch embedding; empty until extracted

    bool has_points() const { return point_count > 0; }
};

/// Per-voxel feature slots, one per semantic level. A slot's score is only
/// meaningful when its feature is present, and never decreases once written.
struct HierarchicalFeatureCell {
    std::array<FeatureVector, kNumSemanticLevels> features;
    std::array<float, kNumSemanticLevels> scores{};

    bool has(SemanticLevel l) const { return features[static_cast<int>(l)].size() > 0; }
    const FeatureVector& feature(SemanticLevel l) const { return features[static_cast<int>(l)]; }
    float score(SemanticLevel l) const { return scores[static_cast<int>(l)]; }
};

using SemanticMap = VoxelGrid<HierarchicalFeatureCell>;

/// Splits the frame into 4^(k-1) patches per scale k = 1..max_scale and
/// fills the geometric stats (point count, AABB volume, density). Features
/// and instance counts are filled later by the providers. Patch grids divide
/// the image evenly with the last row/column absorbing any remainder.
/// Degenerate AABB extents are clamped to one voxel resolution so density
/// stays finite. Throws std::invalid_argument when a scale would produce
/// patches under one pixel.
std::vector<PatchStats> split_patches(const Frame& frame, const CameraIntrinsics& intr,
                                      const GridConfig& cfg, int max_scale,
                                      double max_depth = 10.0);

/// Level-specific confidence score; kUnscorable when the patch cannot be
/// scored at this level (no points, or missing volume/instances).
double score_patch(const PatchStats& stats, SemanticLevel level, const ScorerWeights& weights);

/// Per-pixel winner of the cross-scale score competition for one level.
struct LevelSelection {
    std::vector<std::int32_t> patch_index; // -1 where no scorable patch covers the pixel
    int width = 0;
    int height = 0;

    std::int32_t at(int x, int y) const { return patch_index[std::size_t(y) * width + x]; }
};

/// For each pixel, picks the covering patch with the highest score under the
/// level's scorer. Exactly one candidate per scale covers each pixel; ties
/// prefer the coarser scale.
LevelSelection select_per_pixel(const std::vector<PatchStats>& patches, SemanticLevel level,
                                int width, int height, const ScorerWeights& weights);

struct SemanticUpdateConfig {
    int max_scale = 3;
    ScorerWeights weights;
    double max_depth = 10.0; // pixels beyond this are treated as invalid
    /// Levels actually written (ablation knob); all three by default.
    std::array<bool, kNumSemanticLevels> enabled_levels = {true, true, true};
};

/// Runs the full per-frame update: split, score, per-pixel selection,
/// back-projection, and per-voxel best-feature retention (strictly greater
/// score replaces; first write wins ties). Returns the coordinates of voxels
/// whose cells changed, sorted and deduplicated.
std::vector<VoxelCoord> update_semantic_map(SemanticMap& map, const Frame& frame,
                                            const CameraIntrinsics& intr, const GridConfig& cfg,
                                            const SemanticUpdateConfig& ucfg,
                                            EmbeddingProvider& embedder, Segmenter& segmenter);

/// Binary snapshot: little-endian records (int32 x, y, z, int32 level,
/// float score, float feature[dim]) plus a JSON sidecar describing the grid
/// and layout. Sidecar path is `<path>.json`.
void export_semantic_map(const SemanticMap& map, const GridConfig& cfg,
                         const std::string& path);

/// Reads a snapshot written by export_semantic_map.
SemanticMap import_semantic_map(const std::string& path, GridConfig* cfg_out = nullptr);

} // namespace beliefnav
