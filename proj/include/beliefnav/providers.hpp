#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "beliefnav/observation.hpp"
#include "beliefnav/types.hpp"

namespace beliefnav {

/// Raised when a provider cannot serve a request (backend down, retries
/// exhausted, unknown concept, ...).
struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a remote provider answers with a malformed payload.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Text/image embedding backend (CLIP stand-in). Outputs are unit-norm and
/// deterministic for identical input. Implementations must be safe for
/// concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual int dim() const = 0;
    virtual FeatureVector embed_text(const std::string& text) = 0;
    /// Embeds an image region; nullopt when the region carries no usable content.
    virtual std::optional<FeatureVector> embed_patch(const ImageRegion& region) = 0;
};

/// Instance-count backend (SAM stand-in).
class Segmenter {
public:
    virtual ~Segmenter() = default;
    virtual int instance_count(const ImageRegion& region) = 0;
};

/// Landmark generation backend (LLM stand-in).
class LandmarkProvider {
public:
    virtual ~LandmarkProvider() = default;
    virtual LandmarkSet landmarks(const std::string& target) = 0;
    virtual DetectionRange detection_range(const std::string& target) = 0;
};

struct Detection {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // half-open pixel box
    double confidence = 0.0;            // in [0,1]
    Vec3 world_point = Vec3::Zero();    // localized target position
};

/// Open-vocabulary detection backend.
class TargetDetector {
public:
    virtual ~TargetDetector() = default;
    virtual std::optional<Detection> detect(const Frame& frame, const CameraIntrinsics& intr,
                                            const std::string& target) = 0;
};

// ---------------------------------------------------------------------------
// Synthetic backing: a closed world of named concepts with configured
// pairwise cosine similarities, realized as unit vectors.
// ---------------------------------------------------------------------------

/// Concept labels plus a target cosine matrix among them, realized as unit
/// vectors via factorization of the Gram matrix (padded to `dim`). Non-PSD
/// input is projected by clipping negative eigenvalues, with a warning.
class ConceptWorldModel {
public:
    /// cosine must be square, symmetric, unit-diagonal. dim >= labels.size().
    ConceptWorldModel(std::vector<std::string> labels, Eigen::MatrixXd cosine, int dim);

    static ConceptWorldModel load(const std::string& json_path);
    static ConceptWorldModel from_json_text(const std::string& json_text);

    int dim() const { return dim_; }
    bool has(const std::string& label) const { return index_.count(label) != 0; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Precomputed unit vector for a known concept; throws ProviderError on
    /// unknown labels.
    const FeatureVector& vector(const std::string& label) const;
    const FeatureVector* try_vector(const std::string& label) const;

    /// Max |configured - realized| cosine over all pairs.
    double reconstruction_error() const;
    /// Whether eigenvalue clipping was needed beyond tolerance at build time.
    bool was_projected() const { return projected_; }

private:
    std::vector<std::string> labels_;
    Eigen::MatrixXd cosine_;
    std::unordered_map<std::string, int> index_;
    std::vector<FeatureVector> vectors_;
    int dim_ = 0;
    bool projected_ = false;
};

/// Embedding provider backed by a concept world. Text must name a known
/// concept. Patch embeddings are the area-weighted average of the label
/// vectors visible in the patch, renormalized.
class SyntheticEmbedder final : public EmbeddingProvider {
public:
    explicit SyntheticEmbedder(std::shared_ptr<const ConceptWorldModel> model)
        : model_(std::move(model)) {}

    int dim() const override { return model_->dim(); }
    FeatureVector embed_text(const std::string& text) override;
    std::optional<FeatureVector> embed_patch(const ImageRegion& region) override;

private:
    std::shared_ptr<const ConceptWorldModel> model_;
};

/// Counts distinct non-"none" labels inside the region.
class SyntheticSegmenter final : public Segmenter {
public:
    int instance_count(const ImageRegion& region) override;
};

/// Canned per-target landmark tables loaded from JSON. Relevance rows are
/// renormalized to sum to one; unknown targets fall back to uniform
/// placeholders built from the target string itself.
class SyntheticLandmarkProvider final : public LandmarkProvider {
public:
    struct Entry {
        std::array<std::vector<std::pair<std::string, double>>, kNumLandmarkLevels> rows;
        std::optional<DetectionRange> range;
    };

    SyntheticLandmarkProvider(std::shared_ptr<const ConceptWorldModel> model,
                              std::shared_ptr<EmbeddingProvider> embedder,
                              DetectionRange default_range = {});

    static std::unordered_map<std::string, Entry> load_table(const std::string& json_path);
    void set_table(std::unordered_map<std::string, Entry> table) { table_ = std::move(table); }

    LandmarkSet landmarks(const std::string& target) override;
    DetectionRange detection_range(const std::string& target) override;

private:
    std::shared_ptr<const ConceptWorldModel> model_;
    std::shared_ptr<EmbeddingProvider> embedder_;
    std::unordered_map<std::string, Entry> table_;
    DetectionRange default_range_;
};

/// Detects the target where its labeled pixels are visible, within the
/// detection range, and cover at least min_pixels; confidence is the mean
/// per-pixel detection confidence over the target pixels.
class SyntheticDetector final : public TargetDetector {
public:
    SyntheticDetector(DetectionRange range, int min_pixels = 12, double min_confidence = 0.25)
        : range_(range), min_pixels_(min_pixels), min_confidence_(min_confidence) {}

    std::optional<Detection> detect(const Frame& frame, const CameraIntrinsics& intr,
                                    const std::string& target) override;

    void set_range(const DetectionRange& range) { range_ = range; }

private:
    DetectionRange range_;
    int min_pixels_;
    double min_confidence_;
};

// ---------------------------------------------------------------------------
// Remote backing: JSON-over-HTTP client for model servers.
// ---------------------------------------------------------------------------

struct RemoteConfig {
    std::string host = "127.0.0.1";
    int port = 8900;
    std::string path = "/provider";
    int timeout_seconds = 10;
    int attempts = 3;               // total tries per request
    int backoff_initial_ms = 100;   // doubled per retry
    int expected_dim = 512;
    std::string landmark_prompt;        // template with {target} placeholder
    std::string detection_range_prompt; // template with {target} placeholder
};

/// Speaks the wire protocol: POST {kind, payload} and parse the typed
/// response. Non-unit vectors are renormalized with a warning; malformed
/// payloads raise ProtocolError; exhausted retries raise ProviderError.
class RemoteProviderClient : public EmbeddingProvider, public LandmarkProvider {
public:
    explicit RemoteProviderClient(RemoteConfig cfg);
    ~RemoteProviderClient() override;

    int dim() const override { return cfg_.expected_dim; }
    FeatureVector embed_text(const std::string& text) override;
    std::optional<FeatureVector> embed_patch(const ImageRegion& region) override;

    LandmarkSet landmarks(const std::string& target) override;
    DetectionRange detection_range(const std::string& target) override;

protected:
    /// One request/response round trip with retry-and-backoff; returns the
    /// response body.
    std::string post(const std::string& kind, const std::string& payload_json);

private:
    RemoteConfig cfg_;
    struct CachedLandmarks;
    std::unique_ptr<CachedLandmarks> cache_;
};

/// Remote open-vocabulary detector: ships the frame (depth + labels) as the
/// "detect" payload and parses an optional detection.
class RemoteDetector final : public RemoteProviderClient, public TargetDetector {
public:
    explicit RemoteDetector(RemoteConfig cfg) : RemoteProviderClient(std::move(cfg)) {}
    std::optional<Detection> detect(const Frame& frame, const CameraIntrinsics& intr,
                                    const std::string& target) override;
};

/// Substitutes {target} into a prompt template.
std::string render_prompt(const std::string& prompt_template, const std::string& target);

/// The full provider stack an episode runs against.
struct ProviderSet {
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<Segmenter> segmenter;
    std::shared_ptr<LandmarkProvider> landmark_provider;
    std::shared_ptr<TargetDetector> detector;
    /// Detection verification hook (LLM verifier stand-in); default accepts.
    std::function<bool(const Detection&)> verify = [](const Detection&) { return true; };
};

/// Builds the deterministic synthetic stack from a concept world and
/// landmark table.
ProviderSet make_synthetic_providers(const std::string& concept_json_path,
                                     const std::string& landmark_table_path,
                                     DetectionRange default_range = {});

} // namespace beliefnav
