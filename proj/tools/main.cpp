// Command-line front end: batch episode runs, the planner benchmark,
// map snapshot dumps, and the ablation sweep.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "beliefnav/belief.hpp"
#include "beliefnav/planner.hpp"
#include "beliefnav/providers.hpp"
#include "beliefnav/rng.hpp"
#include "beliefnav/runner.hpp"
#include "beliefnav/semantic_map.hpp"
#include "beliefnav/simenv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace beliefnav;

namespace {

std::string default_data_dir() {
    // walk up from cwd looking for the data/ directory
    fs::path p = fs::current_path();
    for (int i = 0; i < 5; ++i) {
        if (fs::exists(p / "data" / "concepts_desk.json")) {
            return (p / "data").string();
        }
        if (!p.has_parent_path()) break;
        p = p.parent_path();
    }
    return "data";
}

void apply_config_file(EpisodeConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path);
    }
    json j = json::parse(in);
    if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<int>();
    if (j.contains("success_radius")) cfg.success_radius = j["success_radius"].get<double>();
    if (j.contains("target")) cfg.target = j["target"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("grid_resolution")) cfg.grid_resolution = j["grid_resolution"].get<double>();
    if (j.contains("max_depth")) cfg.max_depth = j["max_depth"].get<double>();
    if (j.contains("camera")) {
        const auto& c = j["camera"];
        cfg.camera.width = c.value("width", cfg.camera.width);
        cfg.camera.height = c.value("height", cfg.camera.height);
        if (c.contains("hfov_deg")) cfg.camera.hfov = c["hfov_deg"].get<double>() * M_PI / 180.0;
        if (c.contains("vfov_deg")) cfg.camera.vfov = c["vfov_deg"].get<double>() * M_PI / 180.0;
        cfg.camera.mount_height = c.value("mount_height", cfg.camera.mount_height);
    }
    if (j.contains("w_unobserved"))
        cfg.aggregation.w_unobserved = j["w_unobserved"].get<double>();
    if (j.contains("fov_range")) cfg.aggregation.fov_range = j["fov_range"].get<double>();
    if (j.contains("max_scale")) cfg.semantic.max_scale = j["max_scale"].get<int>();
    if (j.contains("scorer_weights")) {
        const auto& w = j["scorer_weights"];
        cfg.semantic.weights.w1 = w.value("w1", cfg.semantic.weights.w1);
        cfg.semantic.weights.w2 = w.value("w2", cfg.semantic.weights.w2);
        cfg.semantic.weights.w3 = w.value("w3", cfg.semantic.weights.w3);
        cfg.semantic.weights.w4 = w.value("w4", cfg.semantic.weights.w4);
    }
    if (j.contains("detection_range")) {
        DetectionRange r;
        r.d_min = j["detection_range"][0].get<double>();
        r.d_max = j["detection_range"][1].get<double>();
        if (j["detection_range"].size() > 2) r.falloff = j["detection_range"][2].get<double>();
        cfg.detection_range = r;
    }
    if (j.contains("anneal")) {
        const auto& a = j["anneal"];
        cfg.anneal.t0 = a.value("t0", cfg.anneal.t0);
        cfg.anneal.tf = a.value("tf", cfg.anneal.tf);
        cfg.anneal.cooling = a.value("cooling", cfg.anneal.cooling);
        cfg.anneal.chains = a.value("chains", cfg.anneal.chains);
    }
    if (j.contains("max_rooms")) { /* consumed by the caller's SceneGenConfig */ }
}

std::array<bool, 3> parse_level_mask(const std::string& csv,
                                     const std::array<const char*, 3>& names) {
    if (csv.empty() || csv == "all") {
        return {true, true, true};
    }
    std::array<bool, 3> mask = {false, false, false};
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        bool known = false;
        for (int i = 0; i < 3; ++i) {
            if (item == names[i]) {
                mask[i] = true;
                known = true;
            }
        }
        if (!known) {
            throw CLI::ValidationError("unknown level '" + item + "'");
        }
    }
    return mask;
}

ProviderSet build_providers(const std::string& provider, const std::string& data_dir,
                            const std::string& endpoint) {
    if (provider == "synthetic") {
        return make_synthetic_providers(data_dir + "/concepts_desk.json",
                                        data_dir + "/landmarks_desk.json");
    }
    if (provider == "remote") {
        RemoteConfig rcfg;
        const auto colon = endpoint.rfind(':');
        if (colon != std::string::npos) {
            rcfg.host = endpoint.substr(0, colon);
            rcfg.port = std::stoi(endpoint.substr(colon + 1));
        } else if (!endpoint.empty()) {
            rcfg.host = endpoint;
        }
        auto read_prompt = [&](const char* file) {
            std::ifstream in(data_dir + "/prompts/" + file);
            return std::string((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
        };
        rcfg.landmark_prompt = read_prompt("landmarks.txt");
        rcfg.detection_range_prompt = read_prompt("detection_range.txt");
        auto client = std::make_shared<RemoteProviderClient>(rcfg);
        ProviderSet set;
        set.embedder = client;
        set.landmark_provider = client;
        set.segmenter = std::make_shared<SyntheticSegmenter>();
        set.detector = std::make_shared<RemoteDetector>(rcfg);
        return set;
    }
    throw CLI::ValidationError("unknown provider '" + provider + "'");
}

int exit_code_for(const BatchResult& batch) { return batch.any_error ? 1 : 0; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voxel-belief frontier navigation: simulator, planner, and benchmarks"};
    app.require_subcommand(1);

    std::string data_dir = default_data_dir();
    app.add_option("--data-dir", data_dir, "Asset directory (concepts, landmark tables)");

    // ---- run ----------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run navigation episodes");
    std::string scene_path, out_path = "results.json", provider = "synthetic", endpoint;
    std::string planner_mode = "anneal", semantic_levels = "all", landmark_levels = "all";
    std::string config_path, trace_dir;
    int episodes = 10;
    std::uint64_t seed = 0;
    bool no_visibility = false;
    EpisodeConfig ecfg;
    SceneGenConfig gen;
    run->add_option("--scene", scene_path, "Scene JSON (omit to generate scenes)");
    run->add_option("--episodes", episodes, "Episode count");
    run->add_option("--seed", seed, "Base seed");
    run->add_option("--target", ecfg.target, "Target category override");
    run->add_option("--out", out_path, "Results JSON path");
    run->add_option("--config", config_path, "Config JSON overriding defaults");
    run->add_option("--trace-dir", trace_dir, "Per-episode JSONL trace directory");
    run->add_option("--provider", provider, "synthetic | remote");
    run->add_option("--endpoint", endpoint, "Remote provider host:port");
    run->add_option("--planner-mode", planner_mode, "anneal | greedy | random");
    run->add_option("--semantic-levels", semantic_levels, "Comma list: scene,region,object");
    run->add_option("--landmark-levels", landmark_levels, "Comma list: room,region,object");
    run->add_option("--max-steps", ecfg.max_steps, "Step budget per episode");
    run->add_flag("--no-visibility", no_visibility, "Disable the visibility map");
    run->add_option("--gen-target", gen.target_label, "Generated-scene target label");
    run->add_option("--gen-rooms", gen.max_rooms, "Max rooms in generated scenes");

    // ---- plan-bench ---------------------------------------------------
    auto* bench = app.add_subcommand("plan-bench",
                                     "Annealing vs exhaustive search on random instances");
    int bench_instances = 100, bench_frontiers = 10;
    std::uint64_t bench_seed = 0;
    std::string bench_out;
    AnnealConfig bench_cfg;
    bench->add_option("--instances", bench_instances, "Instance count");
    bench->add_option("--frontiers", bench_frontiers, "Frontiers per instance");
    bench->add_option("--seed", bench_seed, "Base seed");
    bench->add_option("--out", bench_out, "Write per-instance JSON report");
    bench->add_option("--chains", bench_cfg.chains, "Annealing chains");
    bench->add_option("--t0", bench_cfg.t0, "Initial temperature (0 = auto)");
    bench->add_option("--tf", bench_cfg.tf, "Terminal temperature");
    bench->add_option("--cooling", bench_cfg.cooling, "Cooling rate");

    // ---- dump ---------------------------------------------------------
    auto* dump = app.add_subcommand("dump", "Explore a scene briefly and dump map snapshots");
    std::string dump_scene, dump_dir = "snapshots";
    int dump_steps = 60;
    std::uint64_t dump_seed = 0;
    dump->add_option("--scene", dump_scene, "Scene JSON (omit to generate one)");
    dump->add_option("--steps", dump_steps, "Exploration steps before dumping");
    dump->add_option("--seed", dump_seed, "Seed");
    dump->add_option("--out", dump_dir, "Output directory");

    // ---- ablate -------------------------------------------------------
    auto* ablate = app.add_subcommand("ablate", "Compare full system against ablations");
    int ablate_episodes = 50;
    std::uint64_t ablate_seed = 0;
    std::string ablate_out, ablate_config;
    ablate->add_option("--episodes", ablate_episodes, "Episodes per configuration");
    ablate->add_option("--seed", ablate_seed, "Base seed");
    ablate->add_option("--out", ablate_out, "Write comparison JSON");
    ablate->add_option("--config", ablate_config, "Config JSON overriding defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            if (!config_path.empty()) apply_config_file(ecfg, config_path);
            ecfg.seed = seed;
            ecfg.use_visibility = !no_visibility;
            ecfg.semantic.enabled_levels =
                parse_level_mask(semantic_levels, {"scene", "region", "object"});
            ecfg.belief.enabled_levels =
                parse_level_mask(landmark_levels, {"room", "region", "object"});
            if (planner_mode == "anneal") ecfg.planner_mode = PlannerMode::Anneal;
            else if (planner_mode == "greedy") ecfg.planner_mode = PlannerMode::GreedyMaxBelief;
            else if (planner_mode == "random") ecfg.planner_mode = PlannerMode::RandomFrontier;
            else throw CLI::ValidationError("unknown planner mode " + planner_mode);

            ProviderSet providers = build_providers(provider, data_dir, endpoint);
            BatchResult batch;
            if (!scene_path.empty()) {
                const SceneSpec scene = SceneSpec::load(scene_path);
                batch.episodes.reserve(episodes);
                int successes = 0;
                double spl_sum = 0.0;
                for (int i = 0; i < episodes; ++i) {
                    EpisodeConfig cfg_i = ecfg;
                    cfg_i.seed = mix_seed(seed, i);
                    if (!trace_dir.empty()) {
                        cfg_i.trace_path = trace_dir + "/episode_" + std::to_string(i) + ".jsonl";
                    }
                    EpisodeResult r = run_episode(scene, cfg_i, providers);
                    if (r.success) ++successes;
                    spl_sum += r.spl;
                    if (r.termination == TerminationReason::Error) batch.any_error = true;
                    batch.scene_seeds.push_back(seed + i);
                    std::cerr << "episode " << i << ": " << to_string(r.termination)
                              << " steps=" << r.steps << " spl=" << r.spl << "\n";
                    batch.episodes.push_back(std::move(r));
                }
                batch.sr = static_cast<double>(successes) / episodes;
                batch.mean_spl = spl_sum / episodes;
            } else {
                if (!trace_dir.empty()) {
                    ecfg.trace_path = trace_dir + "/episode";
                }
                batch = run_batch(gen, ecfg, providers, episodes, seed,
                                  [](int i, const EpisodeResult& r) {
                                      std::cerr << "episode " << i << ": "
                                                << to_string(r.termination)
                                                << " steps=" << r.steps << " spl=" << r.spl
                                                << "\n";
                                  });
            }
            write_text(out_path, batch_to_json(batch, ecfg));
            std::cout << "SR " << batch.sr << "  mean SPL " << batch.mean_spl << "  ("
                      << batch.episodes.size() << " episodes) -> " << out_path << "\n";
            return exit_code_for(batch);
        }

        if (*bench) {
            Rng rng(bench_seed);
            int errors = 0;
            std::vector<double> times_ms;
            json rows = json::array();
            for (int i = 0; i < bench_instances; ++i) {
                PlanningInstance inst;
                inst.start = Vec3(rng.uniform(0, 20), rng.uniform(0, 20), 0);
                const int n = bench_frontiers;
                std::vector<Vec3> pts;
                for (int f = 0; f < n; ++f) {
                    pts.emplace_back(rng.uniform(0, 20), rng.uniform(0, 20), 0);
                    inst.positions.push_back(pts.back());
                    inst.p_obs.push_back(rng.uniform());
                }
                inst.distance = Eigen::MatrixXd::Zero(n + 1, n + 1);
                for (int a = 0; a <= n; ++a) {
                    const Vec3 pa = (a == 0) ? inst.start : inst.positions[a - 1];
                    for (int b = 0; b < a; ++b) {
                        const Vec3 pb = (b == 0) ? inst.start : inst.positions[b - 1];
                        const double d = (pa - pb).norm();
                        inst.distance(a, b) = d;
                        inst.distance(b, a) = d;
                    }
                }
                AnnealConfig acfg = bench_cfg;
                acfg.seed = mix_seed(bench_seed, i);
                const auto tic = std::chrono::steady_clock::now();
                const PlanResult sa = anneal_plan(inst, acfg);
                const auto toc = std::chrono::steady_clock::now();
                const double ms =
                    std::chrono::duration<double, std::milli>(toc - tic).count();
                times_ms.push_back(ms);
                const PlanResult exact = brute_force_plan(inst);
                const bool error = sa.cost > 1.10 * exact.cost;
                if (error) ++errors;
                rows.push_back({{"instance", i},
                                {"anneal_cost", sa.cost},
                                {"optimal_cost", exact.cost},
                                {"ratio", exact.cost > 0 ? sa.cost / exact.cost : 1.0},
                                {"time_ms", ms},
                                {"error", error}});
            }
            std::sort(times_ms.begin(), times_ms.end());
            const double median = times_ms[times_ms.size() / 2];
            const double rate = 100.0 * errors / bench_instances;
            std::cout << "instances " << bench_instances << ", frontiers " << bench_frontiers
                      << ": error rate " << rate << "% (cost > 110% of optimal), median "
                      << median << " ms/instance\n";
            if (!bench_out.empty()) {
                json report;
                report["error_rate_percent"] = rate;
                report["median_ms"] = median;
                report["instances"] = std::move(rows);
                write_text(bench_out, report.dump(2));
            }
            return 0;
        }

        if (*dump) {
            SceneSpec scene = dump_scene.empty() ? generate_scene(dump_seed)
                                                 : SceneSpec::load(dump_scene);
            fs::create_directories(dump_dir);
            ProviderSet providers = build_providers("synthetic", data_dir, "");

            EpisodeConfig cfg;
            cfg.seed = dump_seed;
            const std::string target = scene.target_label;
            const DetectionRange range = providers.landmark_provider->detection_range(target);
            LandmarkSet landmarks = providers.landmark_provider->landmarks(target);
            const GridConfig grid_cfg = grid_for_scene(scene, cfg.grid_resolution);
            MappingPipeline pipeline(grid_cfg, cfg, landmarks, range);

            Pose pose = scene.spawns.front();
            Rng rng(dump_seed);
            for (int i = 0; i < dump_steps; ++i) {
                const Frame frame = render(scene, pose, cfg.camera, cfg.max_depth);
                pipeline.integrate(frame, cfg.camera, *providers.embedder, *providers.segmenter);
                pipeline.stamp_agent(pose.position.head<2>());
                Action a = Action::TurnLeft;
                if (i >= 12) {
                    const int r = rng.uniform_int(4);
                    a = (r < 2) ? Action::MoveForward
                                : (r == 2 ? Action::TurnLeft : Action::TurnRight);
                }
                pose = step(scene, pose, a).pose;
            }
            const BeliefMap& post = pipeline.refresh_posterior();
            export_semantic_map(pipeline.semantic(), grid_cfg, dump_dir + "/semantic_map.bin");
            export_value_ply(pipeline.belief(), grid_cfg, dump_dir + "/belief.ply");
            export_value_ply(pipeline.visibility(), grid_cfg, dump_dir + "/visibility.ply");
            export_value_ply(post, grid_cfg, dump_dir + "/posterior.ply");
            scene.save(dump_dir + "/scene.json");
            std::cout << "wrote semantic_map.bin(.json), belief.ply, visibility.ply, "
                         "posterior.ply, scene.json to "
                      << dump_dir << "\n";
            return 0;
        }

        if (*ablate) {
            EpisodeConfig base;
            if (!ablate_config.empty()) apply_config_file(base, ablate_config);
            base.seed = ablate_seed;
            ProviderSet providers = build_providers("synthetic", data_dir, "");
            SceneGenConfig gen_cfg;

            struct Variant {
                const char* name;
                PlannerMode mode;
                bool visibility;
            };
            const Variant variants[] = {
                {"full", PlannerMode::Anneal, true},
                {"no_planner", PlannerMode::GreedyMaxBelief, true},
                {"no_visibility", PlannerMode::Anneal, false},
                {"random", PlannerMode::RandomFrontier, true},
            };
            json out;
            std::cout << "variant        SR     meanSPL\n";
            for (const Variant& v : variants) {
                EpisodeConfig cfg = base;
                cfg.planner_mode = v.mode;
                cfg.use_visibility = v.visibility;
                const BatchResult batch =
                    run_batch(gen_cfg, cfg, providers, ablate_episodes, ablate_seed);
                std::printf("%-13s %6.3f %8.3f\n", v.name, batch.sr, batch.mean_spl);
                out[v.name] = {{"sr", batch.sr}, {"mean_spl", batch.mean_spl}};
            }
            if (!ablate_out.empty()) {
                write_text(ablate_out, out.dump(2));
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
