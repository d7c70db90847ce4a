#include "beliefnav/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "beliefnav/rng.hpp"

namespace beliefnav {

using nlohmann::json;

const char* to_string(PlannerMode m) {
    switch (m) {
        case PlannerMode::Anneal: return "anneal";
        case PlannerMode::GreedyMaxBelief: return "greedy";
        case PlannerMode::RandomFrontier: return "random";
    }
    return "?";
}

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::Success: return "success";
        case TerminationReason::StepLimit: return "step_limit";
        case TerminationReason::NoFrontiers: return "no_frontiers";
        case TerminationReason::Error: return "error";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// MappingPipeline
// ---------------------------------------------------------------------------

MappingPipeline::MappingPipeline(const GridConfig& cfg, const EpisodeConfig& ecfg,
                                 const LandmarkSet& landmarks, const DetectionRange& range)
    : grid_cfg_(cfg), ecfg_(ecfg), landmarks_(landmarks), range_(range),
      nav_(NavGrid::from_grid_config(cfg)) {
    obstacle_band_top_ = static_cast<int>(
        std::floor((ecfg.obstacle_band_max - cfg.world_origin.z()) / cfg.resolution));
    obstacle_band_top_ = std::min(obstacle_band_top_, cfg.extents.z() - 1);
}

void MappingPipeline::integrate(const Frame& frame, const CameraIntrinsics& intr,
                                EmbeddingProvider& embedder, Segmenter& segmenter) {
    std::vector<VoxelCoord> changed = update_semantic_map(semantic_, frame, intr, grid_cfg_,
                                                          ecfg_.semantic, embedder, segmenter);
    dirty_.insert(dirty_.end(), changed.begin(), changed.end());

    if (ecfg_.use_visibility) {
        update_visibility(visibility_, frame, intr, grid_cfg_, range_, ecfg_.max_depth);
    }

    for (int y = 0; y < frame.height(); ++y) {
        for (int x = 0; x < frame.width(); ++x) {
            const float d = frame.depth.at(x, y);
            if (!std::isfinite(d) || d <= 0.0f || d > ecfg_.max_depth) continue;
            const Vec3 pt = back_project(pixel_center(x), pixel_center(y), d, frame.pose, intr);
            const VoxelCoord u = world_to_voxel(pt, grid_cfg_);
            if (!grid_cfg_.in_bounds(u)) continue;
            occupancy_[u] = 1;
            if (u.z >= 1 && u.z <= obstacle_band_top_) {
                nav_.observe(u.x, u.y, CellState::Occupied);
            } else if (u.z == 0) {
                nav_.observe(u.x, u.y, CellState::Free);
            }
        }
    }
}

void MappingPipeline::stamp_agent(const Eigen::Vector2d& position, double radius) {
    const Eigen::Vector2i center = nav_.cell_of(position);
    const int reach = static_cast<int>(std::ceil(radius / nav_.resolution()));
    for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
            const int x = center.x() + dx;
            const int y = center.y() + dy;
            if (!nav_.in_bounds(x, y)) continue;
            if ((nav_.cell_center(x, y) - position).norm() <= radius + 0.5 * nav_.resolution()) {
                nav_.observe(x, y, CellState::Free);
            }
        }
    }
}

void MappingPipeline::stamp_collision(const Pose& pose) {
    const Eigen::Vector2d heading(std::cos(pose.yaw), std::sin(pose.yaw));
    const Eigen::Vector2d blocked =
        pose.position.head<2>() + (kForwardStep + kAgentRadius) * heading;
    const Eigen::Vector2i cell = nav_.cell_of(blocked);
    const Eigen::Vector2i own = nav_.cell_of(pose.position.head<2>());
    if (nav_.in_bounds(cell.x(), cell.y()) && cell != own) {
        nav_.set(cell.x(), cell.y(), CellState::Occupied);
    }
}

const BeliefMap& MappingPipeline::refresh_posterior() {
    if (!dirty_.empty()) {
        std::sort(dirty_.begin(), dirty_.end());
        dirty_.erase(std::unique(dirty_.begin(), dirty_.end()), dirty_.end());
        refresh_belief(belief_, semantic_, landmarks_, dirty_, ecfg_.belief);
        dirty_.clear();
    }
    if (ecfg_.use_visibility) {
        posterior_ = posterior(belief_, visibility_);
    } else {
        posterior_ = belief_;
    }
    return posterior_;
}

// ---------------------------------------------------------------------------
// Local waypoint following
// ---------------------------------------------------------------------------

namespace {

constexpr double kHeadingTolerance = 15.0 * M_PI / 180.0;

/// Nearest Free cell to a world point, searched in expanding rings.
std::optional<Eigen::Vector2i> snap_to_free(const NavGrid& grid, const Eigen::Vector2d& p,
                                            int max_ring = 6) {
    const Eigen::Vector2i c = grid.cell_of(p);
    for (int ring = 0; ring <= max_ring; ++ring) {
        std::optional<Eigen::Vector2i> best;
        double best_d = std::numeric_limits<double>::infinity();
        for (int dy = -ring; dy <= ring; ++dy) {
            for (int dx = -ring; dx <= ring; ++dx) {
                if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                const int x = c.x() + dx;
                const int y = c.y() + dy;
                if (!grid.in_bounds(x, y) || grid.at(x, y) != CellState::Free) continue;
                const double d = (grid.cell_center(x, y) - p).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = Eigen::Vector2i(x, y);
                }
            }
        }
        if (best) return best;
    }
    return std::nullopt;
}

} // namespace

std::variant<Action, ReplanNeeded> local_goto(const Pose& pose, const Vec3& goal,
                                              const NavGrid& grid, double stop_radius) {
    const Eigen::Vector2d pos = pose.position.head<2>();
    const Eigen::Vector2d goal_xy = goal.head<2>();
    if (stop_radius > 0.0 && (pos - goal_xy).norm() - kAgentRadius <= stop_radius) {
        return Action::Stop;
    }

    const Eigen::Vector2i start = grid.cell_of(pos);
    if (!grid.in_bounds(start.x(), start.y()) ||
        grid.at(start.x(), start.y()) != CellState::Free) {
        return ReplanNeeded{};
    }
    const std::optional<Eigen::Vector2i> goal_cell = snap_to_free(grid, goal_xy);
    if (!goal_cell) {
        return ReplanNeeded{};
    }
    const std::vector<Eigen::Vector2i> path = astar_path(grid, start, *goal_cell);
    if (path.empty()) {
        return ReplanNeeded{};
    }

    Eigen::Vector2d waypoint;
    if (path.size() <= 1) {
        waypoint = goal_xy;
    } else {
        // small lookahead smooths the discrete path
        const std::size_t ahead = std::min<std::size_t>(2, path.size() - 1);
        waypoint = grid.cell_center(path[ahead].x(), path[ahead].y());
    }
    if ((waypoint - pos).norm() < 1e-9) {
        waypoint = goal_xy;
    }

    const double desired = std::atan2(waypoint.y() - pos.y(), waypoint.x() - pos.x());
    const double err = wrap_angle(desired - pose.yaw);
    if (std::abs(err) > kHeadingTolerance) {
        return err > 0 ? Action::TurnLeft : Action::TurnRight;
    }
    return Action::MoveForward;
}

// ---------------------------------------------------------------------------
// Episode loop
// ---------------------------------------------------------------------------

namespace {

struct TraceWriter {
    std::ofstream out;
    explicit TraceWriter(const std::string& path) {
        if (!path.empty()) out.open(path);
    }
    void write(const json& j) {
        if (out.is_open()) out << j.dump() << "\n";
    }
};

/// Warm start: previous visiting order restricted to surviving frontiers
/// (matched by cell), with new frontiers appended in index order.
std::vector<int> build_warm_start(const std::vector<Eigen::Vector2i>& prev_cells,
                                  const std::vector<FrontierCandidate>& cands) {
    std::vector<int> order;
    std::vector<std::uint8_t> used(cands.size(), 0);
    for (const Eigen::Vector2i& cell : prev_cells) {
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!used[i] && cands[i].cell == cell) {
                order.push_back(static_cast<int>(i));
                used[i] = 1;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!used[i]) order.push_back(static_cast<int>(i));
    }
    return order;
}

} // namespace

EpisodeResult run_episode(const SceneSpec& scene, const EpisodeConfig& cfg,
                          const ProviderSet& providers) {
    EpisodeResult res;
    try {
        const std::string target = cfg.target.empty() ? scene.target_label : cfg.target;
        if (target.empty()) {
            throw std::invalid_argument("run_episode: no target category");
        }
        const DetectionRange range = cfg.detection_range
                                         ? *cfg.detection_range
                                         : providers.landmark_provider->detection_range(target);
        if (!range.valid()) {
            throw std::invalid_argument("run_episode: invalid detection range");
        }
        if (auto synth = std::dynamic_pointer_cast<SyntheticDetector>(providers.detector)) {
            synth->set_range(range);
        }
        LandmarkSet landmarks = providers.landmark_provider->landmarks(target);
        validate_landmark_set(landmarks);

        const GridConfig grid_cfg = grid_for_scene(scene, cfg.grid_resolution);
        MappingPipeline pipeline(grid_cfg, cfg, landmarks, range);

        AggregationConfig acfg = cfg.aggregation;
        if (acfg.fov_range <= 0.0) {
            acfg.fov_range = range.d_max;
        }

        if (scene.spawns.empty()) {
            throw std::invalid_argument("run_episode: scene has no spawns");
        }
        Pose pose = scene.spawns[cfg.seed % scene.spawns.size()];
        const Eigen::Vector2d spawn_xy = pose.position.head<2>();

        const std::optional<double> oracle =
            oracle_shortest_path(scene, spawn_xy, cfg.success_radius);

        Rng random_mode_rng(mix_seed(cfg.seed, 0x5eed));
        TraceWriter trace(cfg.trace_path);

        std::optional<Vec3> final_goal;
        std::vector<Eigen::Vector2i> prev_plan_cells;
        std::optional<Eigen::Vector2i> held_random_cell;
        bool stopped = false;

        auto observe_and_detect = [&](const Frame& frame) {
            pipeline.integrate(frame, cfg.camera, *providers.embedder, *providers.segmenter);
            pipeline.stamp_agent(pose.position.head<2>());
            if (auto det = providers.detector->detect(frame, cfg.camera, target)) {
                if (providers.verify(*det)) {
                    final_goal = det->world_point; // refreshed on every sighting
                }
            }
        };

        // exploration-mode goal selection; nullopt when no reachable frontier
        auto explore_action = [&]() -> std::optional<Action> {
            const BeliefMap& post = pipeline.refresh_posterior();
            const std::vector<Eigen::Vector2i> cells =
                detect_frontier_cells(pipeline.nav_grid(), cfg.min_frontier_cells);
            if (cells.empty()) {
                return std::nullopt;
            }

            // reachability first: FOV aggregation is the expensive part
            const Eigen::Vector2i agent_cell =
                pipeline.nav_grid().cell_of(pose.position.head<2>());
            std::vector<Eigen::Vector2i> kept_cells;
            std::vector<double> start_dist;
            for (const Eigen::Vector2i& cell : cells) {
                const double d = astar_distance(pipeline.nav_grid(), agent_cell, cell);
                if (std::isinf(d)) continue;
                kept_cells.push_back(cell);
                start_dist.push_back(d);
            }
            if (kept_cells.empty()) {
                return std::nullopt;
            }
            const std::vector<FrontierCandidate> cands =
                evaluate_frontiers(kept_cells, pipeline.nav_grid(), post, pipeline.occupancy(),
                                   grid_cfg, cfg.camera, acfg);

            const int n = static_cast<int>(cands.size());
            PlanningInstance instance;
            instance.start = pose.position;
            instance.distance = Eigen::MatrixXd::Zero(n + 1, n + 1);
            for (int i = 0; i < n; ++i) {
                instance.positions.push_back(cands[i].position);
                instance.p_obs.push_back(cands[i].observation_belief);
                instance.distance(0, i + 1) = start_dist[i];
                instance.distance(i + 1, 0) = start_dist[i];
                for (int j = 0; j < i; ++j) {
                    const double d =
                        astar_distance(pipeline.nav_grid(), cands[i].cell, cands[j].cell);
                    instance.distance(i + 1, j + 1) = d;
                    instance.distance(j + 1, i + 1) = d;
                }
            }

            Vec3 goal;
            double plan_cost_value = 0.0;
            ++res.plan_invocations;
            switch (cfg.planner_mode) {
                case PlannerMode::Anneal: {
                    AnnealConfig an = cfg.anneal;
                    an.seed = mix_seed(cfg.seed, 0x9000 + static_cast<std::uint64_t>(res.steps));
                    an.warm_start = build_warm_start(prev_plan_cells, cands);
                    const PlanResult plan = anneal_plan(instance, an);
                    plan_cost_value = plan.cost;
                    prev_plan_cells.clear();
                    for (const int idx : plan.order) {
                        prev_plan_cells.push_back(cands[idx].cell);
                    }
                    goal = *next_goal(plan, instance);
                    break;
                }
                case PlannerMode::GreedyMaxBelief: {
                    int best = 0;
                    for (int i = 1; i < n; ++i) {
                        if (instance.p_obs[i] > instance.p_obs[best]) best = i;
                    }
                    goal = instance.positions[best];
                    break;
                }
                case PlannerMode::RandomFrontier: {
                    int pick = -1;
                    if (held_random_cell) {
                        for (int i = 0; i < n; ++i) {
                            if (cands[i].cell == *held_random_cell) {
                                pick = i;
                                break;
                            }
                        }
                    }
                    if (pick < 0) {
                        pick = random_mode_rng.uniform_int(n);
                        held_random_cell = cands[pick].cell;
                    }
                    goal = instance.positions[pick];
                    break;
                }
            }

            Action action = Action::TurnLeft; // relocalize; the map will change
            const auto cmd = local_goto(pose, goal, pipeline.nav_grid(), -1.0);
            if (std::holds_alternative<Action>(cmd)) {
                action = std::get<Action>(cmd);
            }
            ++res.exploration_actions;

            trace.write({{"step", res.steps},
                         {"mode", to_string(cfg.planner_mode)},
                         {"pose", {pose.position.x(), pose.position.y(), pose.yaw}},
                         {"frontiers", n},
                         {"goal", {goal.x(), goal.y()}},
                         {"plan_cost", plan_cost_value},
                         {"action", to_string(action)}});
            return action;
        };

        // initialization spin: a full turn of observations
        for (int i = 0; i < 12 && res.steps < cfg.max_steps; ++i) {
            observe_and_detect(render(scene, pose, cfg.camera, cfg.max_depth));
            pose = step(scene, pose, Action::TurnLeft).pose;
            ++res.steps;
        }

        while (res.steps < cfg.max_steps) {
            const Frame frame = render(scene, pose, cfg.camera, cfg.max_depth);
            observe_and_detect(frame);

            std::optional<Action> chosen;
            if (final_goal) {
                const auto cmd = local_goto(pose, *final_goal, pipeline.nav_grid(),
                                            cfg.success_radius);
                if (std::holds_alternative<Action>(cmd)) {
                    chosen = std::get<Action>(cmd);
                } else {
                    // goal point unreachable on the current grid; resume
                    // exploration this step so the loop always acts
                    final_goal.reset();
                }
            }
            if (!chosen) {
                chosen = explore_action();
                if (!chosen) {
                    res.termination = TerminationReason::NoFrontiers;
                    break;
                }
            }
            const Action action = *chosen;

            const StepResult sr = step(scene, pose, action);
            ++res.steps;
            if (action == Action::MoveForward) {
                if (sr.collided) {
                    ++res.collisions;
                    pipeline.stamp_collision(pose);
                } else {
                    res.path_length += kForwardStep;
                    ++res.forward_actions;
                }
            }
            pose = sr.pose;
            if (action == Action::Stop) {
                stopped = true;
                break;
            }
        }

        const double final_dist = scene.target_distance(pose.position.head<2>());
        res.success = stopped && final_dist <= cfg.success_radius;
        if (res.success) {
            res.termination = TerminationReason::Success;
        } else if (res.termination != TerminationReason::NoFrontiers) {
            res.termination = TerminationReason::StepLimit;
        }

        res.optimal_length = oracle.value_or(res.success ? res.path_length : 0.0);
        if (res.success) {
            if (res.optimal_length <= 0.0) {
                res.spl = 1.0; // spawned inside the success region
            } else {
                res.spl = res.optimal_length / std::max(res.path_length, res.optimal_length);
            }
        } else {
            res.spl = 0.0;
        }
    } catch (const std::exception& e) {
        res.termination = TerminationReason::Error;
        res.error = e.what();
        res.success = false;
        res.spl = 0.0;
    }
    return res;
}

BatchResult run_batch(const SceneGenConfig& gen, const EpisodeConfig& cfg,
                      const ProviderSet& providers, int episodes, std::uint64_t base_seed,
                      const std::function<void(int, const EpisodeResult&)>& on_episode) {
    if (episodes < 1) {
        throw std::invalid_argument("run_batch: need at least one episode");
    }
    BatchResult batch;
    batch.episodes.reserve(episodes);
    int successes = 0;
    double spl_sum = 0.0;
    for (int i = 0; i < episodes; ++i) {
        const std::uint64_t scene_seed = base_seed + static_cast<std::uint64_t>(i);
        EpisodeResult result;
        try {
            const SceneSpec scene = generate_scene(scene_seed, gen);
            EpisodeConfig ecfg = cfg;
            ecfg.seed = mix_seed(cfg.seed, scene_seed);
            if (!cfg.trace_path.empty()) {
                ecfg.trace_path = cfg.trace_path + "." + std::to_string(i) + ".jsonl";
            }
            result = run_episode(scene, ecfg, providers);
        } catch (const std::exception& e) {
            result.termination = TerminationReason::Error;
            result.error = e.what();
        }
        if (result.termination == TerminationReason::Error) {
            batch.any_error = true;
        }
        if (result.success) ++successes;
        spl_sum += result.spl;
        batch.scene_seeds.push_back(scene_seed);
        if (on_episode) on_episode(i, result);
        batch.episodes.push_back(std::move(result));
    }
    batch.sr = static_cast<double>(successes) / episodes;
    batch.mean_spl = spl_sum / episodes;
    return batch;
}

std::string batch_to_json(const BatchResult& batch, const EpisodeConfig& cfg) {
    json j;
    j["config"] = {{"planner_mode", to_string(cfg.planner_mode)},
                   {"use_visibility", cfg.use_visibility},
                   {"max_steps", cfg.max_steps},
                   {"success_radius", cfg.success_radius},
                   {"seed", cfg.seed},
                   {"camera", {{"width", cfg.camera.width},
                               {"height", cfg.camera.height},
                               {"hfov", cfg.camera.hfov},
                               {"vfov", cfg.camera.vfov}}},
                   {"w_unobserved", cfg.aggregation.w_unobserved}};
    j["aggregate"] = {{"episodes", batch.episodes.size()},
                      {"sr", batch.sr},
                      {"mean_spl", batch.mean_spl},
                      {"any_error", batch.any_error}};
    json rows = json::array();
    for (std::size_t i = 0; i < batch.episodes.size(); ++i) {
        const EpisodeResult& r = batch.episodes[i];
        rows.push_back({{"scene_seed", batch.scene_seeds[i]},
                        {"success", r.success},
                        {"steps", r.steps},
                        {"path_length", r.path_length},
                        {"optimal_length", r.optimal_length},
                        {"spl", r.spl},
                        {"termination", to_string(r.termination)},
                        {"error", r.error}});
    }
    j["episodes"] = std::move(rows);
    return j.dump(2);
}

} // namespace beliefnav
