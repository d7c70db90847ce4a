#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace beliefnav {

/// Visual/text embedding. Providers emit unit-norm vectors so cosine
/// similarity reduces to a dot product.
using FeatureVector = Eigen::VectorXf;

/// Spatial-semantic levels of the hierarchical voxel map.
enum class SemanticLevel : int { Scene = 0, Region = 1, Object = 2 };
inline constexpr int kNumSemanticLevels = 3;
inline constexpr std::array<SemanticLevel, 3> kAllSemanticLevels = {
    SemanticLevel::Scene, SemanticLevel::Region, SemanticLevel::Object};

const char* to_string(SemanticLevel level);

/// Levels of language-model landmark cues.
enum class LandmarkLevel : int { Room = 0, Region = 1, Object = 2 };
inline constexpr int kNumLandmarkLevels = 3;
inline constexpr std::array<LandmarkLevel, 3> kAllLandmarkLevels = {
    LandmarkLevel::Room, LandmarkLevel::Region, LandmarkLevel::Object};

const char* to_string(LandmarkLevel level);

/// A textual cue for where the target is likely found, with a relevance
/// weight and its text embedding.
struct Landmark {
    std::string text;
    double relevance = 0.0;  // in [0,1]; per-level relevances sum to 1
    FeatureVector embedding; // unit norm; may be empty until embedded
};

/// Landmarks at all three levels plus the target itself. The target's
/// relevance is fixed at 1 and is not stored.
struct LandmarkSet {
    std::array<std::vector<Landmark>, kNumLandmarkLevels> levels;
    std::string target_text;
    FeatureVector target_embedding;

    std::vector<Landmark>& at(LandmarkLevel l) { return levels[static_cast<int>(l)]; }
    const std::vector<Landmark>& at(LandmarkLevel l) const { return levels[static_cast<int>(l)]; }
};

/// Validates per-level relevance sums (1 +- tol) and embedding norms.
/// Throws std::invalid_argument on violation.
void validate_landmark_set(const LandmarkSet& set, double tol = 1e-6);

/// Distance band in which the detector is reliable. Outside the band the
/// detection confidence decays as exp(-falloff * gap^2).
struct DetectionRange {
    double d_min = 1.0;   // meters
    double d_max = 4.0;   // meters
    double falloff = 1.0; // 1/m^2

    bool valid() const { return d_min > 0.0 && d_min < d_max && falloff > 0.0; }
};

} // namespace beliefnav
