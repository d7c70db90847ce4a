#include "beliefnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <nlohmann/json.hpp>

#include "beliefnav/rng.hpp"

namespace beliefnav {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

/// Path cost as step counts, so equal-cost paths produce bit-identical
/// distances regardless of traversal order.
struct StepCost {
    int straight = 0;
    int diagonal = 0;

    double meters(double res) const { return straight * res + diagonal * (res * kSqrt2); }
};

struct AStarState {
    const NavGrid* grid = nullptr;
    std::vector<StepCost> g;
    std::vector<std::uint8_t> closed;
    std::vector<std::int32_t> parent;
};

int cell_index(const NavGrid& grid, const Eigen::Vector2i& c) {
    return c.y() * grid.width() + c.x();
}

double octile(const Eigen::Vector2i& a, const Eigen::Vector2i& b, double res) {
    const int dx = std::abs(a.x() - b.x());
    const int dy = std::abs(a.y() - b.y());
    const int diag = std::min(dx, dy);
    const int straight = std::max(dx, dy) - diag;
    return StepCost{straight, diag}.meters(res);
}

/// Shared A* core; records parents only when `parents` is non-null.
double astar_impl(const NavGrid& grid, const Eigen::Vector2i& a, const Eigen::Vector2i& b,
                  std::vector<std::int32_t>* parents) {
    if (!grid.in_bounds(a.x(), a.y()) || !grid.in_bounds(b.x(), b.y()) ||
        grid.at(a.x(), a.y()) != CellState::Free || grid.at(b.x(), b.y()) != CellState::Free) {
        throw std::invalid_argument("astar_distance: endpoints must be Free cells");
    }
    const double res = grid.resolution();
    if (a == b) {
        return 0.0;
    }

    const int n = grid.width() * grid.height();
    std::vector<StepCost> g(n);
    std::vector<std::uint8_t> open_or_closed(n, 0); // 1 = seen, 2 = settled
    if (parents != nullptr) {
        parents->assign(n, -1);
    }

    struct Node {
        double f;
        double gm;
        int idx;
        bool operator>(const Node& o) const {
            if (f != o.f) return f > o.f;
            if (gm != o.gm) return gm < o.gm; // prefer larger g on f-ties
            return idx > o.idx;
        }
    };
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

    const int start = cell_index(grid, a);
    const int goal = cell_index(grid, b);
    g[start] = StepCost{};
    open_or_closed[start] = 1;
    open.push({octile(a, b, res), 0.0, start});

    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

    while (!open.empty()) {
        const Node node = open.top();
        open.pop();
        if (open_or_closed[node.idx] == 2) continue;
        open_or_closed[node.idx] = 2;
        if (node.idx == goal) {
            return g[node.idx].meters(res);
        }
        const int cx = node.idx % grid.width();
        const int cy = node.idx / grid.width();
        for (int i = 0; i < 8; ++i) {
            const int nx = cx + dx[i];
            const int ny = cy + dy[i];
            if (!grid.in_bounds(nx, ny) || grid.at(nx, ny) != CellState::Free) continue;
            const int nidx = ny * grid.width() + nx;
            if (open_or_closed[nidx] == 2) continue;
            StepCost cand = g[node.idx];
            if (i < 4) {
                ++cand.straight;
            } else {
                ++cand.diagonal;
            }
            const double cand_m = cand.meters(res);
            if (open_or_closed[nidx] == 1 && !(cand_m < g[nidx].meters(res))) continue;
            g[nidx] = cand;
            open_or_closed[nidx] = 1;
            if (parents != nullptr) {
                (*parents)[nidx] = node.idx;
            }
            open.push({cand_m + octile({nx, ny}, b, res), cand_m, nidx});
        }
    }
    return kInfDistance;
}

} // namespace

double astar_distance(const NavGrid& grid, const Eigen::Vector2i& a, const Eigen::Vector2i& b) {
    return astar_impl(grid, a, b, nullptr);
}

std::vector<Eigen::Vector2i> astar_path(const NavGrid& grid, const Eigen::Vector2i& a,
                                        const Eigen::Vector2i& b) {
    std::vector<std::int32_t> parents;
    const double d = astar_impl(grid, a, b, &parents);
    std::vector<Eigen::Vector2i> path;
    if (std::isinf(d)) {
        return path;
    }
    int idx = cell_index(grid, b);
    const int start = cell_index(grid, a);
    while (idx >= 0) {
        path.emplace_back(idx % grid.width(), idx / grid.width());
        if (idx == start) break;
        idx = parents[idx];
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool PlanningInstance::valid() const {
    const int n = num_frontiers();
    if (static_cast<int>(p_obs.size()) != n) return false;
    if (distance.rows() != n + 1 || distance.cols() != n + 1) return false;
    for (int i = 0; i <= n; ++i) {
        if (distance(i, i) != 0.0) return false;
        for (int j = 0; j < i; ++j) {
            if (distance(i, j) != distance(j, i)) return false;
            if (!(distance(i, j) >= 0.0)) return false; // inf allowed
        }
    }
    return true;
}

namespace {

/// Cost evaluation without permutation validation (hot path).
double cost_unchecked(const PlanningInstance& instance, std::span<const int> order) {
    double cum = 0.0;
    double cost = 0.0;
    int prev = 0; // start row
    for (const int idx : order) {
        const double leg = instance.distance(prev, idx + 1);
        if (std::isinf(leg)) {
            return kInfDistance;
        }
        cum += leg;
        cost += cum * instance.p_obs[idx];
        prev = idx + 1;
    }
    return cost;
}

void check_permutation(const PlanningInstance& instance, std::span<const int> order) {
    const int n = instance.num_frontiers();
    if (static_cast<int>(order.size()) != n) {
        throw std::invalid_argument("plan order has wrong length");
    }
    std::vector<std::uint8_t> seen(n, 0);
    for (const int idx : order) {
        if (idx < 0 || idx >= n || seen[idx]) {
            throw std::invalid_argument("plan order is not a permutation");
        }
        seen[idx] = 1;
    }
}

std::vector<double> prefix_distances(const PlanningInstance& instance,
                                     std::span<const int> order) {
    std::vector<double> out;
    out.reserve(order.size());
    double cum = 0.0;
    int prev = 0;
    for (const int idx : order) {
        cum += instance.distance(prev, idx + 1);
        out.push_back(cum);
        prev = idx + 1;
    }
    return out;
}

PlanResult make_result(const PlanningInstance& instance, std::vector<int> order) {
    PlanResult r;
    r.cost = cost_unchecked(instance, order);
    r.prefix_distance = prefix_distances(instance, order);
    r.order = std::move(order);
    return r;
}

std::vector<int> greedy_tour(const PlanningInstance& instance) {
    const int n = instance.num_frontiers();
    std::vector<int> order;
    order.reserve(n);
    std::vector<std::uint8_t> used(n, 0);
    int prev = 0;
    for (int step = 0; step < n; ++step) {
        int best = -1;
        double best_d = kInfDistance;
        for (int i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double d = instance.distance(prev, i + 1);
            if (best < 0 || d < best_d) {
                best = i;
                best_d = d;
            }
        }
        used[best] = 1;
        order.push_back(best);
        prev = best + 1;
    }
    return order;
}

} // namespace

double plan_cost(const PlanningInstance& instance, std::span<const int> order) {
    check_permutation(instance, order);
    return cost_unchecked(instance, order);
}

PlanResult brute_force_plan(const PlanningInstance& instance) {
    const int n = instance.num_frontiers();
    if (n > 10) {
        throw std::invalid_argument("brute_force_plan: more than 10 frontiers");
    }
    if (n == 0) {
        return PlanResult{};
    }
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;

    std::vector<int> best = perm;
    double best_cost = cost_unchecked(instance, perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
        const double c = cost_unchecked(instance, perm);
        if (c < best_cost) { // strict: earlier (lexicographic) order wins ties
            best_cost = c;
            best = perm;
        }
    }
    return make_result(instance, std::move(best));
}

namespace {

enum class MoveOp { Swap, Shift, Reverse };

MoveOp sample_op(Rng& rng, const AnnealConfig& cfg) {
    const double total = cfg.p_swap + cfg.p_shift + cfg.p_reverse;
    const double r = rng.uniform() * total;
    if (r < cfg.p_swap) return MoveOp::Swap;
    if (r < cfg.p_swap + cfg.p_shift) return MoveOp::Shift;
    return MoveOp::Reverse;
}

void apply_op(std::vector<int>& order, MoveOp op, Rng& rng) {
    const int n = static_cast<int>(order.size());
    switch (op) {
        case MoveOp::Swap: {
            const int i = rng.uniform_int(n);
            int j = rng.uniform_int(n - 1);
            if (j >= i) ++j;
            std::swap(order[i], order[j]);
            break;
        }
        case MoveOp::Shift: {
            int i = rng.uniform_int(n);
            int j = rng.uniform_int(n);
            if (i > j) std::swap(i, j);
            const int len = j - i + 1;
            if (len == n) return;
            std::vector<int> segment(order.begin() + i, order.begin() + j + 1);
            order.erase(order.begin() + i, order.begin() + j + 1);
            const int pos = rng.uniform_int(static_cast<int>(order.size()) + 1);
            order.insert(order.begin() + pos, segment.begin(), segment.end());
            break;
        }
        case MoveOp::Reverse: {
            int i = rng.uniform_int(n);
            int j = rng.uniform_int(n);
            if (i > j) std::swap(i, j);
            std::reverse(order.begin() + i, order.begin() + j + 1);
            break;
        }
    }
}

double initial_temperature(const PlanningInstance& instance, const AnnealConfig& cfg,
                           double greedy_cost) {
    if (cfg.t0 > 0.0) {
        return std::max(cfg.t0, cfg.tf * 10.0);
    }
    // 10x the cost spread over a few random orders.
    const int n = instance.num_frontiers();
    Rng rng(mix_seed(cfg.seed, 0x7e3d));
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    double lo = greedy_cost;
    double hi = greedy_cost;
    for (int s = 0; s < 8; ++s) {
        for (int i = n - 1; i > 0; --i) {
            std::swap(order[i], order[rng.uniform_int(i + 1)]);
        }
        const double c = cost_unchecked(instance, order);
        if (std::isinf(c)) continue;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    const double spread = hi - lo;
    return std::max(10.0 * spread, cfg.tf * 10.0);
}

} // namespace

PlanResult anneal_plan(const PlanningInstance& instance, const AnnealConfig& cfg) {
    if (!cfg.valid()) {
        throw std::invalid_argument("anneal_plan: invalid config");
    }
    const int n = instance.num_frontiers();
    if (n == 0) {
        return PlanResult{};
    }
    std::vector<int> greedy = greedy_tour(instance);
    if (n == 1) {
        return make_result(instance, std::move(greedy));
    }
    const double greedy_cost = cost_unchecked(instance, greedy);

    std::vector<int> warm;
    if (static_cast<int>(cfg.warm_start.size()) == n) {
        std::vector<std::uint8_t> seen(n, 0);
        bool ok = true;
        for (const int idx : cfg.warm_start) {
            if (idx < 0 || idx >= n || seen[idx]) {
                ok = false;
                break;
            }
            seen[idx] = 1;
        }
        if (ok) warm = cfg.warm_start;
    }

    const double t0 = initial_temperature(instance, cfg, greedy_cost);

    std::vector<int> best_order = greedy;
    double best_cost = greedy_cost;
    if (!warm.empty()) {
        const double wc = cost_unchecked(instance, warm);
        if (wc < best_cost) {
            best_cost = wc;
            best_order = warm;
        }
    }

    std::vector<int> current;
    std::vector<int> proposal;
    for (int chain = 0; chain < cfg.chains; ++chain) {
        Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(chain)));
        current = (chain == 0 && !warm.empty()) ? warm : greedy;
        double current_cost = cost_unchecked(instance, current);

        for (double t = t0; t > cfg.tf; t *= cfg.cooling) {
            // higher temperature, more operation repetitions
            const int reps =
                std::max(1, static_cast<int>(std::lround(cfg.rep_scale * n * t / t0)));
            for (int r = 0; r < reps; ++r) {
                proposal = current;
                apply_op(proposal, sample_op(rng, cfg), rng);
                const double cost = cost_unchecked(instance, proposal);
                bool accept = false;
                if (cost < current_cost) {
                    accept = true;
                } else if (!std::isinf(cost)) {
                    accept = rng.uniform() < std::exp((current_cost - cost) / t);
                }
                if (accept) {
                    current.swap(proposal);
                    current_cost = cost;
                    if (cost < best_cost ||
                        (cost == best_cost && current < best_order)) {
                        best_cost = cost;
                        best_order = current;
                    }
                }
            }
        }
    }
    return make_result(instance, std::move(best_order));
}

std::optional<Vec3> next_goal(const PlanResult& plan, const PlanningInstance& instance) {
    if (plan.order.empty()) {
        return std::nullopt;
    }
    return instance.positions[plan.order.front()];
}

std::string instance_to_json(const PlanningInstance& instance) {
    nlohmann::json j;
    j["start"] = {instance.start.x(), instance.start.y(), instance.start.z()};
    nlohmann::json frontiers = nlohmann::json::array();
    for (int i = 0; i < instance.num_frontiers(); ++i) {
        const Vec3& p = instance.positions[i];
        frontiers.push_back({{"pos", {p.x(), p.y(), p.z()}}, {"p_obs", instance.p_obs[i]}});
    }
    j["frontiers"] = std::move(frontiers);
    nlohmann::json matrix = nlohmann::json::array();
    for (int r = 0; r < instance.distance.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < instance.distance.cols(); ++c) {
            const double d = instance.distance(r, c);
            if (std::isinf(d)) {
                row.push_back(nullptr); // JSON has no infinity
            } else {
                row.push_back(d);
            }
        }
        matrix.push_back(std::move(row));
    }
    j["matrix"] = std::move(matrix);
    return j.dump();
}

PlanningInstance instance_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PlanningInstance inst;
    const auto& s = j.at("start");
    inst.start = Vec3(s[0].get<double>(), s[1].get<double>(), s[2].get<double>());
    for (const auto& f : j.at("frontiers")) {
        const auto& p = f.at("pos");
        inst.positions.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        inst.p_obs.push_back(f.at("p_obs").get<double>());
    }
    const auto& matrix = j.at("matrix");
    const int m = static_cast<int>(matrix.size());
    inst.distance.resize(m, m);
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const auto& v = matrix[r][c];
            inst.distance(r, c) = v.is_null() ? kInfDistance : v.get<double>();
        }
    }
    if (!inst.valid()) {
        throw std::invalid_argument("instance_from_json: invalid instance");
    }
    return inst;
}

} // namespace beliefnav
