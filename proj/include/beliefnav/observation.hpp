#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "beliefnav/geometry.hpp"

namespace beliefnav {

/// Row-major image container.
template <class T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(std::size_t(w) * h, fill) {}

    T& at(int x, int y) { return data[std::size_t(y) * width + x]; }
    const T& at(int x, int y) const { return data[std::size_t(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return data.size(); }
};

inline constexpr std::int32_t kNoLabel = 0;

/// One sensor observation: aligned depth and semantic-label images plus the
/// pose they were captured from. Depth <= 0 marks an invalid pixel. Label 0
/// means "none"; other ids index label_names.
struct Frame {
    Image<float> depth;
    Image<std::int32_t> labels;
    std::shared_ptr<const std::vector<std::string>> label_names;
    Pose pose;

    int width() const { return depth.width; }
    int height() const { return depth.height; }
    bool valid_depth(int x, int y) const {
        const float d = depth.at(x, y);
        return std::isfinite(d) && d > 0.0f;
    }
    const std::string& label_name(std::int32_t id) const {
        static const std::string none = "none";
        if (!label_names || id < 0 || id >= static_cast<std::int32_t>(label_names->size())) {
            return none;
        }
        return (*label_names)[id];
    }
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1) of a frame.
struct ImageRegion {
    const Frame* frame = nullptr;
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool empty() const { return width() <= 0 || height() <= 0; }
};

} // namespace beliefnav
