#include "beliefnav/providers.hpp"

#include <chrono>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

// httplib pulls in <resolv.h>, whose _res macro breaks Eigen if it comes first
#include <httplib.h>
#include <nlohmann/json.hpp>

namespace beliefnav {

using nlohmann::json;

struct RemoteProviderClient::CachedLandmarks {
    std::mutex mutex;
    std::map<std::string, json> by_target; // parsed "landmarks" responses
};

RemoteProviderClient::RemoteProviderClient(RemoteConfig cfg)
    : cfg_(std::move(cfg)), cache_(std::make_unique<CachedLandmarks>()) {}

RemoteProviderClient::~RemoteProviderClient() = default;

std::string RemoteProviderClient::post(const std::string& kind, const std::string& payload_json) {
    json body;
    body["kind"] = kind;
    body["payload"] = json::parse(payload_json);
    const std::string request = body.dump();

    int backoff_ms = cfg_.backoff_initial_ms;
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt < cfg_.attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        httplib::Client client(cfg_.host, cfg_.port);
        client.set_connection_timeout(cfg_.timeout_seconds, 0);
        client.set_read_timeout(cfg_.timeout_seconds, 0);
        auto res = client.Post(cfg_.path, request, "application/json");
        if (!res) {
            last_error = "connection failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProtocolError("provider returned status " + std::to_string(res->status) +
                                " for kind '" + kind + "'");
        }
        return res->body;
    }
    throw ProviderError("provider unavailable after " + std::to_string(cfg_.attempts) +
                        " attempts (" + kind + "): " + last_error);
}

namespace {

FeatureVector parse_vector_field(const json& j, int expected_dim) {
    if (!j.contains("vector") || !j["vector"].is_array()) {
        throw ProtocolError("provider response missing 'vector' array");
    }
    const auto& arr = j["vector"];
    if (expected_dim > 0 && static_cast<int>(arr.size()) != expected_dim) {
        throw ProtocolError("provider vector has dim " + std::to_string(arr.size()) +
                            ", expected " + std::to_string(expected_dim));
    }
    FeatureVector v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) {
            throw ProtocolError("provider vector has non-numeric entry");
        }
        v[static_cast<int>(i)] = arr[i].get<float>();
    }
    const float norm = v.norm();
    if (!(norm > 0.0f) || !v.allFinite()) {
        throw ProtocolError("provider vector is zero or non-finite");
    }
    if (std::abs(norm - 1.0f) > 1e-4f) {
        std::cerr << "[beliefnav] warning: provider vector norm " << norm
                  << "; normalizing locally\n";
        v /= norm;
    }
    return v;
}

json parse_body(const std::string& body, const char* what) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) {
        throw ProtocolError(std::string("malformed JSON in ") + what + " response");
    }
    return j;
}

} // namespace

FeatureVector RemoteProviderClient::embed_text(const std::string& text) {
    json payload;
    payload["text"] = text;
    const std::string body = post("embed_text", payload.dump());
    return parse_vector_field(parse_body(body, "embed_text"), cfg_.expected_dim);
}

std::optional<FeatureVector> RemoteProviderClient::embed_patch(const ImageRegion& region) {
    if (region.empty() || region.frame == nullptr) {
        return std::nullopt;
    }
    const Frame& frame = *region.frame;
    // The simulator has no RGB; the patch content travels as a label
    // histogram, which is what the synthetic observation carries.
    std::map<std::string, int> counts;
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const std::int32_t id = frame.labels.at(x, y);
            if (id != kNoLabel) ++counts[frame.label_name(id)];
        }
    }
    if (counts.empty()) {
        return std::nullopt;
    }
    json payload;
    payload["region"] = {{"x0", region.x0}, {"y0", region.y0}, {"x1", region.x1},
                         {"y1", region.y1}};
    json labels = json::array();
    for (const auto& [name, pixels] : counts) {
        labels.push_back({{"name", name}, {"pixels", pixels}});
    }
    payload["labels"] = std::move(labels);
    const std::string body = post("embed_image", payload.dump());
    return parse_vector_field(parse_body(body, "embed_image"), cfg_.expected_dim);
}

LandmarkSet RemoteProviderClient::landmarks(const std::string& target) {
    json response;
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->by_target.find(target);
        if (it != cache_->by_target.end()) {
            response = it->second;
        }
    }
    if (response.is_null()) {
        json payload;
        payload["target"] = target;
        payload["prompt"] = render_prompt(cfg_.landmark_prompt, target);
        payload["detection_range_prompt"] = render_prompt(cfg_.detection_range_prompt, target);
        response = parse_body(post("landmarks", payload.dump()), "landmarks");
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->by_target[target] = response;
    }

    LandmarkSet set;
    set.target_text = target;
    set.target_embedding = embed_text(target);
    if (!response.contains("levels")) {
        throw ProtocolError("landmarks response missing 'levels'");
    }
    for (LandmarkLevel level : kAllLandmarkLevels) {
        const char* key = to_string(level);
        if (!response["levels"].contains(key)) {
            throw ProtocolError(std::string("landmarks response missing level '") + key + "'");
        }
        double sum = 0.0;
        for (const auto& row : response["levels"][key]) {
            sum += row.at("relevance").get<double>();
        }
        for (const auto& row : response["levels"][key]) {
            Landmark lm;
            lm.text = row.at("text").get<std::string>();
            const double rel = row.at("relevance").get<double>();
            lm.relevance = sum > 0.0 ? rel / sum : 0.0;
            lm.embedding = embed_text(lm.text);
            set.at(level).push_back(std::move(lm));
        }
    }
    validate_landmark_set(set);
    return set;
}

DetectionRange RemoteProviderClient::detection_range(const std::string& target) {
    json response;
    {
        std::lock_guard<std::mutex> lock(cache_->mutex);
        auto it = cache_->by_target.find(target);
        if (it != cache_->by_target.end()) {
            response = it->second;
        }
    }
    if (response.is_null()) {
        json payload;
        payload["target"] = target;
        payload["prompt"] = render_prompt(cfg_.landmark_prompt, target);
        payload["detection_range_prompt"] = render_prompt(cfg_.detection_range_prompt, target);
        response = parse_body(post("landmarks", payload.dump()), "landmarks");
        std::lock_guard<std::mutex> lock(cache_->mutex);
        cache_->by_target[target] = response;
    }
    DetectionRange r;
    if (response.contains("detection_range")) {
        const auto& arr = response["detection_range"];
        if (!arr.is_array() || arr.size() < 2) {
            throw ProtocolError("landmarks response has malformed 'detection_range'");
        }
        r.d_min = arr[0].get<double>();
        r.d_max = arr[1].get<double>();
        if (arr.size() > 2) r.falloff = arr[2].get<double>();
    }
    if (!r.valid()) {
        throw ProtocolError("provider detection range is invalid");
    }
    return r;
}

std::optional<Detection> RemoteDetector::detect(const Frame& frame,
                                                const CameraIntrinsics& /*intr*/,
                                                const std::string& target) {
    json payload;
    payload["target"] = target;
    payload["width"] = frame.width();
    payload["height"] = frame.height();
    payload["depth"] = frame.depth.data;
    payload["labels"] = frame.labels.data;
    if (frame.label_names) {
        payload["label_names"] = *frame.label_names;
    }
    json j = parse_body(post("detect", payload.dump()), "detect");
    if (!j.contains("detected")) {
        throw ProtocolError("detect response missing 'detected'");
    }
    if (!j["detected"].get<bool>()) {
        return std::nullopt;
    }
    Detection det;
    const auto& box = j.at("box");
    det.x0 = box[0].get<int>();
    det.y0 = box[1].get<int>();
    det.x1 = box[2].get<int>();
    det.y1 = box[3].get<int>();
    det.confidence = j.at("confidence").get<double>();
    if (det.confidence < 0.0 || det.confidence > 1.0) {
        throw ProtocolError("detect response confidence outside [0,1]");
    }
    const auto& pt = j.at("point");
    det.world_point = Vec3(pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>());
    return det;
}

} // namespace beliefnav
