#pragma once

#include <span>
#include <string>

#include "beliefnav/semantic_map.hpp"
#include "beliefnav/types.hpp"
#include "beliefnav/voxel_grid.hpp"

namespace beliefnav {

/// Unnormalized prior scores b_u >= 0, defined on voxels that carry at least
/// one semantic feature.
using BeliefMap = VoxelGrid<double>;

/// Residual presence likelihood in [0,1]; low values mean "well observed and
/// nothing detected". Voxels absent from the map count as 1.
using VisibilityMap = VoxelGrid<double>;

/// Restricts which landmark levels contribute to the belief (ablation knob).
struct BeliefConfig {
    std::array<bool, kNumLandmarkLevels> enabled_levels = {true, true, true};
};

/// Prior belief for one cell: sum over landmarks of relevance times the
/// max-over-level cosine to the stored features, plus the target term.
/// Cosines are clamped to [0,1].
double cell_belief(const HierarchicalFeatureCell& cell, const LandmarkSet& landmarks,
                   const BeliefConfig& bcfg = {});

/// Full construction over every voxel of the semantic map.
BeliefMap compute_belief(const SemanticMap& map, const LandmarkSet& landmarks,
                         const BeliefConfig& bcfg = {});

/// Incremental construction: recomputes only the given voxels (the dirty set
/// from semantic-map updates).
void refresh_belief(BeliefMap& belief, const SemanticMap& map, const LandmarkSet& landmarks,
                    std::span<const VoxelCoord> changed, const BeliefConfig& bcfg = {});

/// Detection confidence of a pixel: product of squared-cosine angular
/// falloffs and a distance factor that is 1 inside [d_min, d_max] and decays
/// as exp(-falloff * gap^2) outside. (px, py) are continuous image-plane
/// coordinates.
double pixel_confidence(double px, double py, double depth, const CameraIntrinsics& intr,
                        const DetectionRange& range);

/// Per pixel, writes 1 - C_p to the back-projected voxel when absent or
/// strictly smaller than the stored value; per-voxel values never increase.
void update_visibility(VisibilityMap& vis, const Frame& frame, const CameraIntrinsics& intr,
                       const GridConfig& cfg, const DetectionRange& range,
                       double max_depth = 10.0);

/// Elementwise product of prior belief and visibility (1 where unobserved).
BeliefMap posterior(const BeliefMap& belief, const VisibilityMap& vis);

/// ASCII PLY point cloud (x, y, z, value) at voxel centers, for inspection.
void export_value_ply(const VoxelGrid<double>& values, const GridConfig& cfg,
                      const std::string& path);

} // namespace beliefnav
