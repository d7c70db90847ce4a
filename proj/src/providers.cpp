#include "beliefnav/providers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "beliefnav/belief.hpp"

namespace beliefnav {

using nlohmann::json;

// ---------------------------------------------------------------------------
// ConceptWorldModel
// ---------------------------------------------------------------------------

ConceptWorldModel::ConceptWorldModel(std::vector<std::string> labels, Eigen::MatrixXd cosine,
                                     int dim)
    : labels_(std::move(labels)), cosine_(std::move(cosine)), dim_(dim) {
    const int n = static_cast<int>(labels_.size());
    if (cosine_.rows() != n || cosine_.cols() != n) {
        throw std::invalid_argument("ConceptWorldModel: cosine matrix size mismatch");
    }
    if (dim_ < n) {
        throw std::invalid_argument("ConceptWorldModel: dim must be >= number of labels");
    }
    for (int i = 0; i < n; ++i) {
        if (std::abs(cosine_(i, i) - 1.0) > 1e-9) {
            throw std::invalid_argument("ConceptWorldModel: diagonal must be 1");
        }
        for (int j = 0; j < i; ++j) {
            if (std::abs(cosine_(i, j) - cosine_(j, i)) > 1e-9) {
                throw std::invalid_argument("ConceptWorldModel: cosine matrix not symmetric");
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        index_[labels_[i]] = i;
    }
    if (index_.size() != labels_.size()) {
        throw std::invalid_argument("ConceptWorldModel: duplicate labels");
    }

    // Realize the Gram matrix: rows of U * sqrt(clip(L, 0)) are the vectors.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cosine_);
    Eigen::VectorXd evals = eig.eigenvalues();
    if (evals.minCoeff() < -1e-9) {
        std::cerr << "[beliefnav] warning: concept cosine matrix is not PSD (min eigenvalue "
                  << evals.minCoeff() << "); clipping to nearest PSD\n";
        projected_ = true;
    }
    evals = evals.cwiseMax(0.0);
    const Eigen::MatrixXd factors = eig.eigenvectors() * evals.cwiseSqrt().asDiagonal();

    vectors_.resize(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd row = factors.row(i).transpose();
        const double norm = row.norm();
        if (norm > 0.0) row /= norm;
        FeatureVector v = FeatureVector::Zero(dim_);
        v.head(n) = row.cast<float>();
        vectors_[i] = std::move(v);
    }
}

ConceptWorldModel ConceptWorldModel::load(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) {
        throw ProviderError("ConceptWorldModel: cannot open " + json_path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

ConceptWorldModel ConceptWorldModel::from_json_text(const std::string& json_text) {
    json j = json::parse(json_text);
    std::vector<std::string> labels = j.at("labels").get<std::vector<std::string>>();
    const int n = static_cast<int>(labels.size());
    Eigen::MatrixXd cosine(n, n);
    const auto& rows = j.at("cosine");
    if (static_cast<int>(rows.size()) != n) {
        throw std::invalid_argument("ConceptWorldModel: cosine row count mismatch");
    }
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < n; ++c) {
            cosine(i, c) = rows[i][c].get<double>();
        }
    }
    return ConceptWorldModel(std::move(labels), std::move(cosine), j.at("dim").get<int>());
}

const FeatureVector& ConceptWorldModel::vector(const std::string& label) const {
    const FeatureVector* v = try_vector(label);
    if (v == nullptr) {
        throw ProviderError("unknown concept: " + label);
    }
    return *v;
}

const FeatureVector* ConceptWorldModel::try_vector(const std::string& label) const {
    auto it = index_.find(label);
    return it == index_.end() ? nullptr : &vectors_[it->second];
}

double ConceptWorldModel::reconstruction_error() const {
    double err = 0.0;
    const int n = static_cast<int>(labels_.size());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double got = static_cast<double>(vectors_[i].dot(vectors_[j]));
            err = std::max(err, std::abs(got - cosine_(i, j)));
        }
    }
    return err;
}

// ---------------------------------------------------------------------------
// Synthetic providers
// ---------------------------------------------------------------------------

FeatureVector SyntheticEmbedder::embed_text(const std::string& text) {
    return model_->vector(text);
}

std::optional<FeatureVector> SyntheticEmbedder::embed_patch(const ImageRegion& region) {
    if (region.empty() || region.frame == nullptr) {
        return std::nullopt;
    }
    const Frame& frame = *region.frame;
    // Pixel counts per label id, iterated in id order for determinism.
    std::map<std::int32_t, int> counts;
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const std::int32_t id = frame.labels.at(x, y);
            if (id != kNoLabel) ++counts[id];
        }
    }
    if (counts.empty()) {
        return std::nullopt;
    }
    Eigen::VectorXf mix = Eigen::VectorXf::Zero(model_->dim());
    for (const auto& [id, count] : counts) {
        mix += static_cast<float>(count) * model_->vector(frame.label_name(id));
    }
    const float norm = mix.norm();
    if (!(norm > 1e-12f)) {
        return std::nullopt;
    }
    return FeatureVector(mix / norm);
}

int SyntheticSegmenter::instance_count(const ImageRegion& region) {
    if (region.empty() || region.frame == nullptr) {
        return 0;
    }
    const Frame& frame = *region.frame;
    std::vector<std::int32_t> seen;
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const std::int32_t id = frame.labels.at(x, y);
            if (id == kNoLabel) continue;
            if (std::find(seen.begin(), seen.end(), id) == seen.end()) {
                seen.push_back(id);
            }
        }
    }
    return static_cast<int>(seen.size());
}

SyntheticLandmarkProvider::SyntheticLandmarkProvider(
    std::shared_ptr<const ConceptWorldModel> model, std::shared_ptr<EmbeddingProvider> embedder,
    DetectionRange default_range)
    : model_(std::move(model)), embedder_(std::move(embedder)), default_range_(default_range) {}

std::unordered_map<std::string, SyntheticLandmarkProvider::Entry>
SyntheticLandmarkProvider::load_table(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) {
        throw ProviderError("landmark table: cannot open " + json_path);
    }
    json j = json::parse(in);
    std::unordered_map<std::string, Entry> table;
    for (const auto& [target, spec] : j.at("targets").items()) {
        Entry entry;
        for (LandmarkLevel level : kAllLandmarkLevels) {
            const char* key = to_string(level);
            for (const auto& row : spec.at(key)) {
                entry.rows[static_cast<int>(level)].emplace_back(row[0].get<std::string>(),
                                                                 row[1].get<double>());
            }
        }
        if (spec.contains("detection_range")) {
            DetectionRange r;
            r.d_min = spec["detection_range"][0].get<double>();
            r.d_max = spec["detection_range"][1].get<double>();
            if (spec["detection_range"].size() > 2) {
                r.falloff = spec["detection_range"][2].get<double>();
            }
            entry.range = r;
        }
        table[target] = std::move(entry);
    }
    return table;
}

LandmarkSet SyntheticLandmarkProvider::landmarks(const std::string& target) {
    LandmarkSet set;
    set.target_text = target;
    set.target_embedding = embedder_->embed_text(target);

    auto it = table_.find(target);
    if (it == table_.end()) {
        std::cerr << "[beliefnav] warning: no canned landmarks for '" << target
                  << "', using uniform fallback\n";
        for (LandmarkLevel level : kAllLandmarkLevels) {
            for (int i = 0; i < 3; ++i) {
                set.at(level).push_back({target, 1.0 / 3.0, set.target_embedding});
            }
        }
        return set;
    }

    for (LandmarkLevel level : kAllLandmarkLevels) {
        const auto& row = it->second.rows[static_cast<int>(level)];
        double sum = 0.0;
        for (const auto& [text, rel] : row) sum += rel;
        for (const auto& [text, rel] : row) {
            Landmark lm;
            lm.text = text;
            lm.relevance = sum > 0.0 ? rel / sum : 1.0 / row.size();
            lm.embedding = embedder_->embed_text(text);
            set.at(level).push_back(std::move(lm));
        }
    }
    validate_landmark_set(set);
    return set;
}

DetectionRange SyntheticLandmarkProvider::detection_range(const std::string& target) {
    auto it = table_.find(target);
    if (it != table_.end() && it->second.range) {
        return *it->second.range;
    }
    return default_range_;
}

std::optional<Detection> SyntheticDetector::detect(const Frame& frame,
                                                   const CameraIntrinsics& intr,
                                                   const std::string& target) {
    std::int32_t target_id = -1;
    if (frame.label_names) {
        for (std::size_t i = 0; i < frame.label_names->size(); ++i) {
            if ((*frame.label_names)[i] == target) {
                target_id = static_cast<std::int32_t>(i);
                break;
            }
        }
    }
    if (target_id <= 0) {
        return std::nullopt;
    }

    Detection det;
    det.x0 = frame.width();
    det.y0 = frame.height();
    det.x1 = 0;
    det.y1 = 0;
    int pixels = 0;
    double conf_sum = 0.0;
    Vec3 centroid = Vec3::Zero();
    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) {
            if (frame.labels.at(x, y) != target_id || !frame.valid_depth(x, y)) continue;
            const double px = pixel_center(x);
            const double py = pixel_center(y);
            const double d = frame.depth.at(x, y);
            det.x0 = std::min(det.x0, x);
            det.y0 = std::min(det.y0, y);
            det.x1 = std::max(det.x1, x + 1);
            det.y1 = std::max(det.y1, y + 1);
            conf_sum += pixel_confidence(px, py, d, intr, range_);
            centroid += back_project(px, py, d, frame.pose, intr);
            ++pixels;
        }
    }
    if (pixels < min_pixels_) {
        return std::nullopt;
    }
    det.confidence = conf_sum / pixels;
    if (det.confidence < min_confidence_) {
        return std::nullopt;
    }
    det.world_point = centroid / pixels;
    return det;
}

// ---------------------------------------------------------------------------
// Prompt rendering
// ---------------------------------------------------------------------------

std::string render_prompt(const std::string& prompt_template, const std::string& target) {
    std::string out = prompt_template;
    const std::string key = "{target}";
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
        out.replace(pos, key.size(), target);
        pos += target.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Provider set assembly
// ---------------------------------------------------------------------------

ProviderSet make_synthetic_providers(const std::string& concept_json_path,
                                     const std::string& landmark_table_path,
                                     DetectionRange default_range) {
    auto model = std::make_shared<ConceptWorldModel>(ConceptWorldModel::load(concept_json_path));
    auto embedder = std::make_shared<SyntheticEmbedder>(model);
    auto landmarks = std::make_shared<SyntheticLandmarkProvider>(model, embedder, default_range);
    if (!landmark_table_path.empty()) {
        landmarks->set_table(SyntheticLandmarkProvider::load_table(landmark_table_path));
    }
    ProviderSet set;
    set.embedder = embedder;
    set.segmenter = std::make_shared<SyntheticSegmenter>();
    set.landmark_provider = landmarks;
    set.detector = std::make_shared<SyntheticDetector>(default_range);
    return set;
}

} // namespace beliefnav
