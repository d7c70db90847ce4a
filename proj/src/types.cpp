#include "beliefnav/types.hpp"

#include <cmath>
#include <stdexcept>

namespace beliefnav {

const char* to_string(SemanticLevel level) {
    switch (level) {
        case SemanticLevel::Scene: return "scene";
        case SemanticLevel::Region: return "region";
        case SemanticLevel::Object: return "object";
    }
    return "?";
}

const char* to_string(LandmarkLevel level) {
    switch (level) {
        case LandmarkLevel::Room: return "room";
        case LandmarkLevel::Region: return "region";
        case LandmarkLevel::Object: return "object";
    }
    return "?";
}

void validate_landmark_set(const LandmarkSet& set, double tol) {
    for (LandmarkLevel level : kAllLandmarkLevels) {
        const auto& row = set.at(level);
        if (row.empty()) continue;
        double sum = 0.0;
        for (const Landmark& lm : row) {
            if (!(lm.relevance >= 0.0 && lm.relevance <= 1.0)) {
                throw std::invalid_argument("landmark relevance outside [0,1] at level " +
                                            std::string(to_string(level)));
            }
            sum += lm.relevance;
            if (lm.embedding.size() > 0) {
                const double n = lm.embedding.norm();
                if (std::abs(n - 1.0) > 1e-4) {
                    throw std::invalid_argument("landmark embedding not unit norm: " + lm.text);
                }
            }
        }
        if (std::abs(sum - 1.0) > tol) {
            throw std::invalid_argument("landmark relevances at level " +
                                        std::string(to_string(level)) + " sum to " +
                                        std::to_string(sum) + ", expected 1");
        }
    }
    if (set.target_embedding.size() > 0) {
        const double n = set.target_embedding.norm();
        if (std::abs(n - 1.0) > 1e-4) {
            throw std::invalid_argument("target embedding not unit norm");
        }
    }
}

} // namespace beliefnav
