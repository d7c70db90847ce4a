#include "beliefnav/simenv.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

namespace beliefnav {

using nlohmann::json;

const char* to_string(Action a) {
    switch (a) {
        case Action::MoveForward: return "move_forward";
        case Action::TurnLeft: return "turn_left";
        case Action::TurnRight: return "turn_right";
        case Action::LookUp: return "look_up";
        case Action::LookDown: return "look_down";
        case Action::Stop: return "stop";
    }
    return "?";
}

void SceneSpec::assign_label_ids() {
    auto names = std::make_shared<std::vector<std::string>>();
    names->push_back("none");
    std::map<std::string, std::int32_t> ids;
    for (LabeledBox& box : boxes) {
        auto it = ids.find(box.label);
        if (it == ids.end()) {
            const std::int32_t id = static_cast<std::int32_t>(names->size());
            names->push_back(box.label);
            it = ids.emplace(box.label, id).first;
        }
        box.label_id = it->second;
    }
    label_names = std::move(names);
}

std::vector<const LabeledBox*> SceneSpec::target_boxes() const {
    std::vector<const LabeledBox*> out;
    for (const LabeledBox& box : boxes) {
        if (box.label == target_label) out.push_back(&box);
    }
    return out;
}

namespace {

double rect_distance_xy(const Eigen::Vector2d& p, const LabeledBox& box) {
    const double dx = std::max({box.min.x() - p.x(), 0.0, p.x() - box.max.x()});
    const double dy = std::max({box.min.y() - p.y(), 0.0, p.y() - box.max.y()});
    return std::hypot(dx, dy);
}

// Boxes intruding into the agent height band block motion.
bool blocks_agent(const LabeledBox& box) {
    constexpr double kAgentBandTop = 1.5;
    return box.max.z() > 1e-9 && box.min.z() < kAgentBandTop;
}

} // namespace

double SceneSpec::target_distance(const Eigen::Vector2d& position) const {
    double best = std::numeric_limits<double>::infinity();
    for (const LabeledBox& box : boxes) {
        if (box.label != target_label) continue;
        best = std::min(best, rect_distance_xy(position, box));
    }
    return std::max(0.0, best - kAgentRadius);
}

bool SceneSpec::collides(const Eigen::Vector2d& p, double radius) const {
    if (p.x() < floor_min.x() + radius || p.x() > floor_max.x() - radius ||
        p.y() < floor_min.y() + radius || p.y() > floor_max.y() - radius) {
        return true;
    }
    for (const LabeledBox& box : boxes) {
        if (!blocks_agent(box)) continue;
        if (rect_distance_xy(p, box) < radius) {
            return true;
        }
    }
    return false;
}

void SceneSpec::validate() const {
    if (!(floor_max.x() > floor_min.x() && floor_max.y() > floor_min.y())) {
        throw std::invalid_argument("scene: degenerate floor extents");
    }
    for (const LabeledBox& box : boxes) {
        if ((box.max.array() < box.min.array()).any()) {
            throw std::invalid_argument("scene: box with negative extent: " + box.label);
        }
    }
    if (spawns.empty()) {
        throw std::invalid_argument("scene: no spawn poses");
    }
    if (!target_label.empty()) {
        if (target_boxes().empty()) {
            throw std::invalid_argument("scene: target label has no boxes: " + target_label);
        }
        bool reachable = false;
        for (const Pose& spawn : spawns) {
            if (oracle_shortest_path(*this, spawn.position.head<2>(), 0.25)) {
                reachable = true;
                break;
            }
        }
        if (!reachable) {
            throw std::invalid_argument("scene: target unreachable from every spawn");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON round trip
// ---------------------------------------------------------------------------

SceneSpec SceneSpec::from_json_text(const std::string& text) {
    json j = json::parse(text);
    SceneSpec scene;
    scene.name = j.value("name", "");
    const auto& fl = j.at("floor");
    scene.floor_min = Eigen::Vector2d(fl[0].get<double>(), fl[1].get<double>());
    scene.floor_max = Eigen::Vector2d(fl[2].get<double>(), fl[3].get<double>());
    for (const auto& b : j.at("boxes")) {
        LabeledBox box;
        const auto& mn = b.at("min");
        const auto& mx = b.at("max");
        box.min = Vec3(mn[0].get<double>(), mn[1].get<double>(), mn[2].get<double>());
        box.max = Vec3(mx[0].get<double>(), mx[1].get<double>(), mx[2].get<double>());
        box.label = b.at("label").get<std::string>();
        scene.boxes.push_back(std::move(box));
    }
    for (const auto& s : j.at("spawns")) {
        Pose pose;
        const auto& p = s.at("position");
        pose.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        pose.yaw = s.value("yaw", 0.0);
        scene.spawns.push_back(pose);
    }
    scene.target_label = j.value("target", "");
    scene.assign_label_ids();
    return scene;
}

SceneSpec SceneSpec::load(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) {
        throw std::runtime_error("scene: cannot open " + json_path);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

std::string SceneSpec::to_json_text() const {
    json j;
    j["name"] = name;
    j["floor"] = {floor_min.x(), floor_min.y(), floor_max.x(), floor_max.y()};
    json boxes_json = json::array();
    for (const LabeledBox& box : boxes) {
        boxes_json.push_back({{"label", box.label},
                              {"min", {box.min.x(), box.min.y(), box.min.z()}},
                              {"max", {box.max.x(), box.max.y(), box.max.z()}}});
    }
    j["boxes"] = std::move(boxes_json);
    json spawns_json = json::array();
    for (const Pose& pose : spawns) {
        spawns_json.push_back(
            {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
             {"yaw", pose.yaw}});
    }
    j["spawns"] = std::move(spawns_json);
    j["target"] = target_label;
    return j.dump(2);
}

void SceneSpec::save(const std::string& json_path) const {
    std::ofstream out(json_path);
    if (!out) {
        throw std::runtime_error("scene: cannot write " + json_path);
    }
    out << to_json_text() << "\n";
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

Frame render(const SceneSpec& scene, const Pose& pose, const CameraIntrinsics& intr,
             double max_depth) {
    Frame frame;
    frame.depth = Image<float>(intr.width, intr.height, 0.0f);
    frame.labels = Image<std::int32_t>(intr.width, intr.height, kNoLabel);
    frame.label_names = scene.label_names;
    frame.pose = pose;

    const Eigen::Matrix3d rot = pose.rotation();
    const Vec3 eye = pose.position + Vec3(0, 0, intr.mount_height);
    const double fx = intr.fx();
    const double fy = intr.fy();
    const double cx = intr.cx();
    const double cy = intr.cy();

    for (int y = 0; y < intr.height; ++y) {
        const double vz = -(pixel_center(y) - cy) / fy;
        for (int x = 0; x < intr.width; ++x) {
            const double vy = -(pixel_center(x) - cx) / fx;
            // Unnormalized ray with unit forward component: the ray parameter
            // equals the depth-image value directly.
            const Vec3 dir = rot * Vec3(1.0, vy, vz);

            double best_t = max_depth;
            std::int32_t best_label = kNoLabel;
            for (const LabeledBox& box : scene.boxes) {
                double t0 = 1e-6;
                double t1 = best_t;
                bool hit = true;
                for (int a = 0; a < 3 && hit; ++a) {
                    const double d = dir[a];
                    const double e = eye[a];
                    if (std::abs(d) < 1e-12) {
                        if (e < box.min[a] || e > box.max[a]) hit = false;
                        continue;
                    }
                    double ta = (box.min[a] - e) / d;
                    double tb = (box.max[a] - e) / d;
                    if (ta > tb) std::swap(ta, tb);
                    t0 = std::max(t0, ta);
                    t1 = std::min(t1, tb);
                    if (t0 > t1) hit = false;
                }
                if (hit && t0 < best_t) {
                    best_t = t0;
                    best_label = box.label_id;
                }
            }
            if (best_label != kNoLabel) {
                frame.depth.at(x, y) = static_cast<float>(best_t);
                frame.labels.at(x, y) = best_label;
            }
        }
    }
    return frame;
}

// ---------------------------------------------------------------------------
// Action model
// ---------------------------------------------------------------------------

StepResult step(const SceneSpec& scene, const Pose& pose, Action action) {
    StepResult result{pose, false};
    switch (action) {
        case Action::MoveForward: {
            const Eigen::Vector2d heading(std::cos(pose.yaw), std::sin(pose.yaw));
            const Eigen::Vector2d candidate = pose.position.head<2>() + kForwardStep * heading;
            if (scene.collides(candidate)) {
                result.collided = true;
            } else {
                result.pose.position.head<2>() = candidate;
            }
            break;
        }
        case Action::TurnLeft:
            result.pose.yaw = wrap_angle(pose.yaw + kTurnAngle);
            break;
        case Action::TurnRight:
            result.pose.yaw = wrap_angle(pose.yaw - kTurnAngle);
            break;
        case Action::LookUp:
            result.pose.pitch = std::min(pose.pitch + kTurnAngle, kPitchLimit);
            break;
        case Action::LookDown:
            result.pose.pitch = std::max(pose.pitch - kTurnAngle, -kPitchLimit);
            break;
        case Action::Stop:
            break;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Shortest-path oracle
// ---------------------------------------------------------------------------

std::optional<double> oracle_shortest_path(const SceneSpec& scene, const Eigen::Vector2d& start,
                                           double success_radius, double fine_resolution) {
    const double res = fine_resolution;
    const int w = static_cast<int>(std::ceil((scene.floor_max.x() - scene.floor_min.x()) / res));
    const int h = static_cast<int>(std::ceil((scene.floor_max.y() - scene.floor_min.y()) / res));
    if (w <= 0 || h <= 0) return std::nullopt;

    auto center = [&](int x, int y) {
        return Eigen::Vector2d(scene.floor_min.x() + (x + 0.5) * res,
                               scene.floor_min.y() + (y + 0.5) * res);
    };
    std::vector<std::uint8_t> traversable(std::size_t(w) * h, 0);
    std::vector<std::uint8_t> goal(std::size_t(w) * h, 0);
    bool any_goal = false;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Eigen::Vector2d c = center(x, y);
            const std::size_t idx = std::size_t(y) * w + x;
            if (!scene.collides(c)) {
                traversable[idx] = 1;
                // Half-cell slack keeps the goal region detectable when the
                // success band is narrower than the cell spacing.
                if (scene.target_distance(c) <= success_radius + 0.5 * res * std::sqrt(2.0)) {
                    goal[idx] = 1;
                    any_goal = true;
                }
            }
        }
    }
    if (!any_goal) return std::nullopt;

    int sx = static_cast<int>(std::floor((start.x() - scene.floor_min.x()) / res));
    int sy = static_cast<int>(std::floor((start.y() - scene.floor_min.y()) / res));
    sx = std::clamp(sx, 0, w - 1);
    sy = std::clamp(sy, 0, h - 1);
    if (!traversable[std::size_t(sy) * w + sx]) {
        // The start disc itself is valid; snap to the nearest traversable cell.
        double best = std::numeric_limits<double>::infinity();
        int bx = -1, by = -1;
        for (int y = std::max(0, sy - 3); y < std::min(h, sy + 4); ++y) {
            for (int x = std::max(0, sx - 3); x < std::min(w, sx + 4); ++x) {
                if (!traversable[std::size_t(y) * w + x]) continue;
                const double d = (center(x, y) - start).squaredNorm();
                if (d < best) {
                    best = d;
                    bx = x;
                    by = y;
                }
            }
        }
        if (bx < 0) return std::nullopt;
        sx = bx;
        sy = by;
    }

    struct Node {
        double d;
        int idx;
        bool operator>(const Node& o) const {
            if (d != o.d) return d > o.d;
            return idx > o.idx;
        }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    std::vector<double> dist(std::size_t(w) * h, std::numeric_limits<double>::infinity());
    const int start_idx = sy * w + sx;
    dist[start_idx] = 0.0;
    open.push({0.0, start_idx});
    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    const double diag = res * std::sqrt(2.0);
    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        if (node.d > dist[node.idx]) continue;
        if (goal[node.idx]) {
            return node.d;
        }
        const int cx2 = node.idx % w;
        const int cy2 = node.idx / w;
        for (int i = 0; i < 8; ++i) {
            const int nx = cx2 + dx[i];
            const int ny = cy2 + dy[i];
            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
            const int nidx = ny * w + nx;
            if (!traversable[nidx]) continue;
            const double nd = node.d + (i < 4 ? res : diag);
            if (nd < dist[nidx]) {
                dist[nidx] = nd;
                open.push({nd, nidx});
            }
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scene generation
// ---------------------------------------------------------------------------

namespace {

struct Rect {
    double x0, y0, x1, y1;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    Eigen::Vector2d center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

struct FurnitureSpec {
    const char* label;
    double w, d, h; // footprint and height
};

struct RoomTypeSpec {
    const char* name;
    std::vector<FurnitureSpec> furniture;
};

const std::vector<RoomTypeSpec>& room_types() {
    static const std::vector<RoomTypeSpec> types = {
        {"living room",
         {{"couch", 1.7, 0.85, 0.55},
          {"tv stand", 1.3, 0.45, 0.55},
          {"coffee table", 0.9, 0.6, 0.4},
          {"floor lamp", 0.3, 0.3, 1.5}}},
        {"kitchen",
         {{"kitchen counter", 1.8, 0.62, 0.92},
          {"fridge", 0.72, 0.72, 1.8},
          {"sink", 0.6, 0.55, 0.9},
          {"dining table", 1.2, 0.8, 0.75}}},
        {"bedroom",
         {{"bed", 1.95, 1.5, 0.55},
          {"wardrobe", 1.2, 0.62, 1.85},
          {"nightstand", 0.45, 0.45, 0.55}}},
        {"bathroom",
         {{"bathtub", 1.6, 0.72, 0.55},
          {"toilet", 0.42, 0.62, 0.75},
          {"washbasin", 0.55, 0.45, 0.85}}},
    };
    return types;
}

struct TargetSpec {
    const char* room;    // room type the target belongs to
    const char* support; // furniture it sits on
    double w, d, h;
};

const std::map<std::string, TargetSpec>& target_specs() {
    static const std::map<std::string, TargetSpec> specs = {
        {"cushion", {"living room", "couch", 0.45, 0.35, 0.22}},
        {"mug", {"kitchen", "kitchen counter", 0.24, 0.24, 0.22}},
        {"book", {"bedroom", "nightstand", 0.3, 0.24, 0.2}},
    };
    return specs;
}

SceneSpec try_generate(std::uint64_t seed, const SceneGenConfig& cfg) {
    Rng rng(seed);
    SceneSpec scene;
    scene.name = "gen-" + std::to_string(seed);
    scene.floor_min = Eigen::Vector2d(0.0, 0.0);
    scene.floor_max = Eigen::Vector2d(cfg.house_width, cfg.house_height);
    scene.target_label = cfg.target_label;

    const double tw = cfg.wall_thickness;
    const double wh = cfg.wall_height;

    // floor slab and boundary walls
    scene.boxes.push_back({Vec3(0, 0, -0.2), Vec3(cfg.house_width, cfg.house_height, 0.0),
                           "floor", 0});
    auto wall_box = [&](double x0, double y0, double x1, double y1) {
        scene.boxes.push_back({Vec3(x0, y0, 0.0), Vec3(x1, y1, wh), "wall", 0});
    };
    wall_box(0, 0, cfg.house_width, tw);
    wall_box(0, cfg.house_height - tw, cfg.house_width, cfg.house_height);
    wall_box(0, tw, tw, cfg.house_height - tw);
    wall_box(cfg.house_width - tw, tw, cfg.house_width, cfg.house_height - tw);

    // BSP-style room splits; each split wall carries one door gap
    const int n_rooms = cfg.min_rooms + rng.uniform_int(cfg.max_rooms - cfg.min_rooms + 1);
    std::vector<Rect> rooms = {{tw, tw, cfg.house_width - tw, cfg.house_height - tw}};
    const double min_side = 2.4;
    while (static_cast<int>(rooms.size()) < n_rooms) {
        std::size_t largest = 0;
        for (std::size_t i = 1; i < rooms.size(); ++i) {
            if (rooms[i].area() > rooms[largest].area()) largest = i;
        }
        Rect room = rooms[largest];
        const bool vertical = room.width() >= room.height();
        const double extent = vertical ? room.width() : room.height();
        if (extent < 2 * min_side + tw) break;
        const double frac = rng.uniform(0.4, 0.6);
        const double cut = (vertical ? room.x0 : room.y0) + frac * extent;

        const double door_lo = (vertical ? room.y0 : room.x0) + 0.3;
        const double door_hi = (vertical ? room.y1 : room.x1) - 0.3 - cfg.door_width;
        const double door = rng.uniform(door_lo, door_hi);

        if (vertical) {
            wall_box(cut - tw / 2, room.y0, cut + tw / 2, door);
            wall_box(cut - tw / 2, door + cfg.door_width, cut + tw / 2, room.y1);
            rooms[largest] = {room.x0, room.y0, cut - tw / 2, room.y1};
            rooms.push_back({cut + tw / 2, room.y0, room.x1, room.y1});
        } else {
            wall_box(room.x0, cut - tw / 2, door, cut + tw / 2);
            wall_box(door + cfg.door_width, cut - tw / 2, room.x1, cut + tw / 2);
            rooms[largest] = {room.x0, room.y0, room.x1, cut - tw / 2};
            rooms.push_back({room.x0, cut + tw / 2, room.x1, room.y1});
        }
    }

    // room types: shuffle, then make sure the target's room is present
    const auto& types = room_types();
    const TargetSpec& target = [&]() -> const TargetSpec& {
        auto it = target_specs().find(cfg.target_label);
        if (it == target_specs().end()) {
            throw std::invalid_argument("generate_scene: no target spec for " + cfg.target_label);
        }
        return it->second;
    }();
    std::vector<int> type_order(types.size());
    for (std::size_t i = 0; i < types.size(); ++i) type_order[i] = static_cast<int>(i);
    for (int i = static_cast<int>(type_order.size()) - 1; i > 0; --i) {
        std::swap(type_order[i], type_order[rng.uniform_int(i + 1)]);
    }
    std::vector<int> room_type(rooms.size());
    for (std::size_t i = 0; i < rooms.size(); ++i) {
        room_type[i] = type_order[i % type_order.size()];
    }
    int target_room = -1;
    for (std::size_t i = 0; i < rooms.size(); ++i) {
        if (std::string(types[room_type[i]].name) == target.room) {
            target_room = static_cast<int>(i);
            break;
        }
    }
    if (target_room < 0) {
        target_room = rng.uniform_int(static_cast<int>(rooms.size()));
        for (std::size_t t = 0; t < types.size(); ++t) {
            if (std::string(types[t].name) == target.room) {
                room_type[target_room] = static_cast<int>(t);
            }
        }
    }

    // furniture: placed against a random wall of its room
    std::vector<Rect> placed;
    std::optional<std::size_t> support_index;
    int support_room = -1;
    for (std::size_t ri = 0; ri < rooms.size(); ++ri) {
        const Rect& room = rooms[ri];
        for (const FurnitureSpec& f : types[room_type[ri]].furniture) {
            bool ok = false;
            for (int attempt = 0; attempt < 24 && !ok; ++attempt) {
                const int side = rng.uniform_int(4);
                double fw = f.w, fd = f.d;
                if (side >= 2) std::swap(fw, fd); // long side along the wall
                const double margin = 0.06;
                Rect r{};
                if (side == 0) { // against y0 wall
                    r.x0 = rng.uniform(room.x0 + margin, std::max(room.x0 + margin + 0.01,
                                                                  room.x1 - margin - fw));
                    r.y0 = room.y0 + margin;
                } else if (side == 1) { // y1 wall
                    r.x0 = rng.uniform(room.x0 + margin, std::max(room.x0 + margin + 0.01,
                                                                  room.x1 - margin - fw));
                    r.y0 = room.y1 - margin - fd;
                } else if (side == 2) { // x0 wall
                    r.x0 = room.x0 + margin;
                    r.y0 = rng.uniform(room.y0 + margin, std::max(room.y0 + margin + 0.01,
                                                                  room.y1 - margin - fd));
                } else { // x1 wall
                    r.x0 = room.x1 - margin - fw;
                    r.y0 = rng.uniform(room.y0 + margin, std::max(room.y0 + margin + 0.01,
                                                                  room.y1 - margin - fd));
                }
                r.x1 = r.x0 + fw;
                r.y1 = r.y0 + fd;
                if (r.x0 < room.x0 + margin || r.y0 < room.y0 + margin ||
                    r.x1 > room.x1 - margin || r.y1 > room.y1 - margin) {
                    continue;
                }
                // clearance to other furniture
                bool overlaps = false;
                for (const Rect& other : placed) {
                    if (r.x0 < other.x1 + 0.55 && other.x0 < r.x1 + 0.55 &&
                        r.y0 < other.y1 + 0.55 && other.y0 < r.y1 + 0.55) {
                        overlaps = true;
                        break;
                    }
                }
                if (overlaps) continue;
                placed.push_back(r);
                scene.boxes.push_back({Vec3(r.x0, r.y0, 0.0), Vec3(r.x1, r.y1, f.h), f.label, 0});
                if (static_cast<int>(ri) == target_room && f.label == std::string(target.support)) {
                    support_index = scene.boxes.size() - 1;
                    support_room = static_cast<int>(ri);
                }
                ok = true;
            }
        }
    }
    if (!support_index) {
        throw std::runtime_error("generate_scene: could not place support furniture");
    }

    // Target on top of its support, flush with the face pointing into the
    // room so it is reachable within a tight success radius.
    {
        const LabeledBox& s = scene.boxes[*support_index];
        const Rect& room = rooms[support_room];
        const double sw = s.max.x() - s.min.x();
        const double sd = s.max.y() - s.min.y();
        const double tw2 = std::min(target.w, sw * 0.8);
        const double td = std::min(target.d, sd * 0.8);

        const double gaps[4] = {s.min.x() - room.x0, room.x1 - s.max.x(),
                                s.min.y() - room.y0, room.y1 - s.max.y()};
        int front = 0;
        for (int i = 1; i < 4; ++i) {
            if (gaps[i] > gaps[front]) front = i;
        }
        double ox, oy;
        if (front < 2) { // front face along x
            ox = (front == 0) ? s.min.x() : s.max.x() - tw2;
            oy = s.min.y() + rng.uniform(0.1, 0.9) * (sd - td);
        } else { // front face along y
            ox = s.min.x() + rng.uniform(0.1, 0.9) * (sw - tw2);
            oy = (front == 2) ? s.min.y() : s.max.y() - td;
        }
        scene.boxes.push_back({Vec3(ox, oy, s.max.z()),
                               Vec3(ox + tw2, oy + td, s.max.z() + target.h),
                               cfg.target_label, 0});
    }

    // spawn in a different room, clear of furniture
    const Rect& target_rect = rooms[target_room];
    for (int attempt = 0; attempt < 200; ++attempt) {
        const int ri = rng.uniform_int(static_cast<int>(rooms.size()));
        if (ri == target_room && rooms.size() > 1) continue;
        const Rect& room = rooms[ri];
        const Eigen::Vector2d p(rng.uniform(room.x0 + 0.4, room.x1 - 0.4),
                                rng.uniform(room.y0 + 0.4, room.y1 - 0.4));
        if (scene.collides(p, kAgentRadius + 0.05)) continue;
        if (rooms.size() > 1 && (p - target_rect.center()).norm() < 2.0) continue;
        Pose spawn;
        spawn.position = Vec3(p.x(), p.y(), 0.0);
        spawn.yaw = wrap_angle(rng.uniform(-M_PI, M_PI));
        scene.spawns.push_back(spawn);
        break;
    }

    scene.assign_label_ids();
    scene.validate();
    return scene;
}

} // namespace

SceneSpec generate_scene(std::uint64_t seed, const SceneGenConfig& cfg) {
    // Rare layouts fail validation (blocked door, no spawn); retry on a
    // derived seed so generation stays deterministic.
    for (int attempt = 0; attempt < 16; ++attempt) {
        try {
            return try_generate(mix_seed(seed, static_cast<std::uint64_t>(attempt)), cfg);
        } catch (const std::exception&) {
            continue;
        }
    }
    throw std::runtime_error("generate_scene: failed after retries (seed " +
                             std::to_string(seed) + ")");
}

GridConfig grid_for_scene(const SceneSpec& scene, double resolution, double wall_height) {
    GridConfig cfg;
    cfg.resolution = resolution;
    const double margin = 2.0 * resolution;
    cfg.world_origin = Vec3(scene.floor_min.x() - margin, scene.floor_min.y() - margin,
                            -0.5 * resolution);
    const double w = scene.floor_max.x() - scene.floor_min.x() + 2 * margin;
    const double h = scene.floor_max.y() - scene.floor_min.y() + 2 * margin;
    cfg.extents = Eigen::Vector3i(static_cast<int>(std::ceil(w / resolution)),
                                  static_cast<int>(std::ceil(h / resolution)),
                                  static_cast<int>(std::ceil((wall_height + resolution) /
                                                             resolution)) +
                                      1);
    return cfg;
}

} // namespace beliefnav
