#include "safegrid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "safegrid/errors.hpp"

namespace safegrid {

namespace fs = std::filesystem;
using nlohmann::json;

std::string method_name(Method m) {
    switch (m) {
        case Method::sno_mdp_classic: return "sno_mdp_classic";
        case Method::sno_mdp_es2: return "sno_mdp_es2";
        case Method::sno_mdp_pes2: return "sno_mdp_pes2";
        case Method::safemdp: return "safemdp";
        case Method::oracle: return "oracle";
    }
    throw std::invalid_argument("unknown method");
}

Method method_from_name(const std::string& name) {
    static const Method all[] = {Method::sno_mdp_classic, Method::sno_mdp_es2,
                                 Method::sno_mdp_pes2, Method::safemdp,
                                 Method::oracle};
    for (Method m : all) {
        if (method_name(m) == name) return m;
    }
    throw SpecError("methods: unknown method '" + name + "'");
}

namespace {

// ---------------------------------------------------------------- parsing

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw SpecError(path + ": " + why);
}

const json& need(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "required field is missing");
    return *it;
}

double need_number(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    return v.get<double>();
}

double opt_number(const json& j, const std::string& path, const char* key,
                  double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(path + "." + key, "must be a number");
    return v.get<double>();
}

int need_int(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
    return v.get<int>();
}

int opt_int(const json& j, const std::string& path, const char* key,
            int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(path + "." + key, "must be an integer");
    return v.get<int>();
}

std::string need_string(const json& j, const std::string& path,
                        const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_string()) fail(path + "." + key, "must be a string");
    return v.get<std::string>();
}

bool opt_bool(const json& j, const std::string& path, const char* key,
              bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(path + "." + key, "must be a boolean");
    return v.get<bool>();
}

Kernel parse_kernel(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
    Kernel k;
    const std::string family = need_string(j, path, "family");
    try {
        k.family = kernel_family_from_name(family);
    } catch (const std::exception&) {
        fail(path + ".family", "must be 'rbf' or 'matern52'");
    }
    k.lengthscale = need_number(j, path, "lengthscale");
    k.variance = need_number(j, path, "variance");
    if (!(k.lengthscale > 0.0)) fail(path + ".lengthscale", "must be positive");
    if (!(k.variance > 0.0)) fail(path + ".variance", "must be positive");
    return k;
}

json kernel_json(const Kernel& k) {
    return {{"family", kernel_family_name(k.family)},
            {"lengthscale", k.lengthscale},
            {"variance", k.variance}};
}

ConfidenceSchedule parse_schedule(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "must be an object");
    ConfidenceSchedule sched;
    const std::string mode = need_string(j, path, "mode");
    if (mode == "fixed") {
        sched.mode = ScheduleMode::fixed;
        sched.fixed_value = need_number(j, path, "value");
        if (!(sched.fixed_value > 0.0)) fail(path + ".value", "must be positive");
    } else if (mode == "theoretical") {
        sched.mode = ScheduleMode::theoretical;
        sched.rkhs_bound = need_number(j, path, "rkhs_bound");
        sched.noise_scale = need_number(j, path, "noise_scale");
        sched.failure_probability = need_number(j, path, "failure_probability");
        if (!(sched.failure_probability > 0.0 &&
              sched.failure_probability < 1.0)) {
            fail(path + ".failure_probability", "must lie in (0, 1)");
        }
        if (j.contains("info_gain")) {
            const json& g = j.at("info_gain");
            if (!g.is_array()) fail(path + ".info_gain", "must be an array");
            for (const json& v : g) {
                if (!v.is_number() || v.get<double>() < 0.0) {
                    fail(path + ".info_gain", "entries must be nonnegative");
                }
                sched.info_gain.push_back(v.get<double>());
            }
        }
    } else {
        fail(path + ".mode", "must be 'fixed' or 'theoretical'");
    }
    sched.scale_is_squared = opt_bool(j, path, "scale_is_squared", false);
    return sched;
}

json schedule_json(const ConfidenceSchedule& s) {
    json j{{"mode", schedule_mode_name(s.mode)},
           {"scale_is_squared", s.scale_is_squared}};
    if (s.mode == ScheduleMode::fixed) {
        j["value"] = s.fixed_value;
    } else {
        j["rkhs_bound"] = s.rkhs_bound;
        j["noise_scale"] = s.noise_scale;
        j["failure_probability"] = s.failure_probability;
        j["info_gain"] = s.info_gain;
    }
    return j;
}

State parse_state(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
        !j[1].is_number_integer()) {
        fail(path, "must be a [x, y] integer pair");
    }
    return {j[0].get<int>(), j[1].get<int>()};
}

std::uint64_t parse_seed(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        fail(path, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

}  // namespace

ExperimentSpec parse_experiment_spec(const json& doc,
                                     const std::string& base_dir) {
    if (!doc.is_object()) fail("spec", "top level must be an object");
    ExperimentSpec spec;

    const json& env = need(doc, "spec", "environment");
    if (!env.is_object()) fail("environment", "must be an object");
    const std::string type = need_string(env, "environment", "type");
    if (type == "synthetic") {
        SyntheticEnvSpec s;
        s.width = need_int(env, "environment", "width");
        s.height = need_int(env, "environment", "height");
        if (s.width < 1 || s.height < 1) {
            fail("environment.width", "grid dimensions must be positive");
        }
        s.cell_size = opt_number(env, "environment", "cell_size", 1.0);
        if (!(s.cell_size > 0.0)) fail("environment.cell_size", "must be positive");
        s.kernel_reward = parse_kernel(need(env, "environment", "kernel_reward"),
                                       "environment.kernel_reward");
        s.kernel_safety = parse_kernel(need(env, "environment", "kernel_safety"),
                                       "environment.kernel_safety");
        s.r_max = opt_number(env, "environment", "r_max", 1.0);
        if (!(s.r_max > 0.0)) fail("environment.r_max", "must be positive");
        s.seed = env.contains("seed")
                     ? parse_seed(env.at("seed"), "environment.seed")
                     : 0;
        spec.synthetic = std::move(s);
    } else if (type == "elevation") {
        ElevationEnvSpec e;
        std::string file = need_string(env, "environment", "file");
        fs::path p(file);
        if (p.is_relative()) p = fs::path(base_dir) / p;
        e.file = p.lexically_normal().string();
        const std::string format = need_string(env, "environment", "format");
        try {
            e.format = elevation_format_from_name(format);
        } catch (const SpecError&) {
            fail("environment.format", "must be 'csv' or 'esri_ascii'");
        }
        if (e.format == ElevationFormat::csv) {
            if (!env.contains("cell_size")) {
                fail("environment.cell_size",
                     "required for csv elevation grids");
            }
            e.cell_size = need_number(env, "environment", "cell_size");
            if (!(e.cell_size > 0.0)) {
                fail("environment.cell_size", "must be positive");
            }
        } else {
            e.cell_size = opt_number(env, "environment", "cell_size", 1.0);
        }
        e.kernel_reward = parse_kernel(need(env, "environment", "kernel_reward"),
                                       "environment.kernel_reward");
        e.r_max = opt_number(env, "environment", "r_max", 1.0);
        if (!(e.r_max > 0.0)) fail("environment.r_max", "must be positive");
        e.seed = env.contains("seed")
                     ? parse_seed(env.at("seed"), "environment.seed")
                     : 0;

        std::ifstream in(e.file);
        if (!in) fail("environment.file", "cannot open '" + e.file + "'");
        e.field = ingest_elevation_grid(in, e.format, e.cell_size);
        if (e.field.width < 2 || e.field.height < 2) {
            fail("environment.file", "elevation grid must be at least 2x2");
        }
        spec.elevation = std::move(e);
    } else {
        fail("environment.type", "must be 'synthetic' or 'elevation'");
    }

    const json& agent = need(doc, "spec", "agent");
    if (!agent.is_object()) fail("agent", "must be an object");
    AgentSpec& a = spec.agent;
    a.threshold = need_number(agent, "agent", "threshold");
    if (agent.contains("lipschitz") && !agent.at("lipschitz").is_string()) {
        a.lipschitz = need_number(agent, "agent", "lipschitz");
        if (!(*a.lipschitz >= 0.0)) fail("agent.lipschitz", "must be nonnegative");
    } else if (agent.contains("lipschitz")) {
        if (agent.at("lipschitz").get<std::string>() != "auto") {
            fail("agent.lipschitz", "must be a number or 'auto'");
        }
    }
    a.discount = need_number(agent, "agent", "discount");
    if (!(a.discount < 1.0)) fail("agent.discount", "discount must be < 1");
    if (!(a.discount >= 0.0)) fail("agent.discount", "discount must be >= 0");
    a.eps_g = opt_number(agent, "agent", "eps_g", 0.1);
    if (!(a.eps_g > 0.0)) fail("agent.eps_g", "must be positive");
    a.alpha = parse_schedule(need(agent, "agent", "alpha"), "agent.alpha");
    a.beta = parse_schedule(need(agent, "agent", "beta"), "agent.beta");
    if (agent.contains("initial_safe_set") &&
        !agent.at("initial_safe_set").is_string()) {
        const json& s0 = agent.at("initial_safe_set");
        if (!s0.is_array() || s0.empty()) {
            fail("agent.initial_safe_set",
                 "must be 'auto' or a nonempty array of [x, y] pairs");
        }
        std::vector<State> states;
        for (std::size_t i = 0; i < s0.size(); ++i) {
            states.push_back(parse_state(
                s0[i], "agent.initial_safe_set[" + std::to_string(i) + "]"));
        }
        a.initial_safe_set = std::move(states);
    } else if (agent.contains("initial_safe_set")) {
        if (agent.at("initial_safe_set").get<std::string>() != "auto") {
            fail("agent.initial_safe_set", "must be 'auto' or an array");
        }
    }
    if (agent.contains("start") && !agent.at("start").is_string()) {
        a.start = parse_state(agent.at("start"), "agent.start");
    } else if (agent.contains("start")) {
        if (agent.at("start").get<std::string>() != "auto") {
            fail("agent.start", "must be 'auto' or a [x, y] pair");
        }
    }
    if (a.start && !a.initial_safe_set) {
        fail("agent.start",
             "explicit start requires an explicit initial_safe_set");
    }
    if (a.start && a.initial_safe_set) {
        const bool in_s0 =
            std::find(a.initial_safe_set->begin(), a.initial_safe_set->end(),
                      *a.start) != a.initial_safe_set->end();
        if (!in_s0) fail("agent.start", "must lie in initial_safe_set");
    }
    a.max_steps = need_int(agent, "agent", "max_steps");
    if (a.max_steps < 1) fail("agent.max_steps", "must be >= 1");
    a.noise.sigma_r = opt_number(agent, "agent", "noise_sigma_reward", 0.0);
    a.noise.sigma_g = opt_number(agent, "agent", "noise_sigma_safety", 0.0);
    if (a.noise.sigma_r < 0.0) fail("agent.noise_sigma_reward", "must be >= 0");
    if (a.noise.sigma_g < 0.0) fail("agent.noise_sigma_safety", "must be >= 0");
    if (agent.contains("kernel_reward")) {
        a.kernel_reward =
            parse_kernel(agent.at("kernel_reward"), "agent.kernel_reward");
    }
    if (agent.contains("kernel_safety")) {
        a.kernel_safety =
            parse_kernel(agent.at("kernel_safety"), "agent.kernel_safety");
    }
    if (spec.elevation && !a.kernel_safety) {
        fail("agent.kernel_safety",
             "required for elevation environments (no generator kernel to "
             "inherit)");
    }
    a.vi_tol = opt_number(agent, "agent", "vi_tol", 1e-6);
    if (!(a.vi_tol > 0.0)) fail("agent.vi_tol", "must be positive");
    a.vi_max_iter = opt_int(agent, "agent", "vi_max_iter", 10000);
    if (a.vi_max_iter < 1) fail("agent.vi_max_iter", "must be >= 1");

    const json& seeds = need(doc, "spec", "seeds");
    if (!seeds.is_array() || seeds.empty()) {
        fail("seeds", "must be a nonempty array of nonnegative integers");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        spec.seeds.push_back(
            parse_seed(seeds[i], "seeds[" + std::to_string(i) + "]"));
    }

    const json& methods = need(doc, "spec", "methods");
    if (!methods.is_array() || methods.empty()) {
        fail("methods", "must be a nonempty array");
    }
    for (const json& m : methods) {
        if (!m.is_string()) fail("methods", "entries must be strings");
        spec.methods.push_back(method_from_name(m.get<std::string>()));
    }

    spec.output_dir = doc.contains("output_dir")
                          ? need_string(doc, "spec", "output_dir")
                          : "out";
    spec.snapshot_sets = opt_bool(doc, "spec", "snapshot_sets", false);
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("spec file: cannot open '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SpecError("spec file '" + path + "': invalid JSON: " + e.what());
    }
    const std::string base =
        fs::path(path).has_parent_path()
            ? fs::path(path).parent_path().string()
            : std::string(".");
    return parse_experiment_spec(doc, base);
}

json resolve_spec_json(const ExperimentSpec& spec) {
    json env;
    if (spec.synthetic) {
        const SyntheticEnvSpec& s = *spec.synthetic;
        env = {{"type", "synthetic"},
               {"width", s.width},
               {"height", s.height},
               {"cell_size", s.cell_size},
               {"kernel_reward", kernel_json(s.kernel_reward)},
               {"kernel_safety", kernel_json(s.kernel_safety)},
               {"r_max", s.r_max},
               {"seed", s.seed}};
    } else {
        const ElevationEnvSpec& e = *spec.elevation;
        env = {{"type", "elevation"},
               {"file", e.file},
               {"format", e.format == ElevationFormat::csv ? "csv"
                                                           : "esri_ascii"},
               {"cell_size", e.cell_size},
               {"kernel_reward", kernel_json(e.kernel_reward)},
               {"r_max", e.r_max},
               {"seed", e.seed}};
    }

    const AgentSpec& a = spec.agent;
    json agent{{"threshold", a.threshold},
               {"discount", a.discount},
               {"eps_g", a.eps_g},
               {"alpha", schedule_json(a.alpha)},
               {"beta", schedule_json(a.beta)},
               {"max_steps", a.max_steps},
               {"noise_sigma_reward", a.noise.sigma_r},
               {"noise_sigma_safety", a.noise.sigma_g},
               {"vi_tol", a.vi_tol},
               {"vi_max_iter", a.vi_max_iter}};
    if (a.lipschitz) agent["lipschitz"] = *a.lipschitz;
    else agent["lipschitz"] = "auto";
    if (a.initial_safe_set) {
        json arr = json::array();
        for (const State& s : *a.initial_safe_set) {
            arr.push_back(json::array({s.x, s.y}));
        }
        agent["initial_safe_set"] = arr;
    } else {
        agent["initial_safe_set"] = "auto";
    }
    if (a.start) agent["start"] = json::array({a.start->x, a.start->y});
    else agent["start"] = "auto";
    if (a.kernel_reward) agent["kernel_reward"] = kernel_json(*a.kernel_reward);
    if (a.kernel_safety) agent["kernel_safety"] = kernel_json(*a.kernel_safety);

    json methods = json::array();
    for (Method m : spec.methods) methods.push_back(method_name(m));
    json seeds = json::array();
    for (std::uint64_t s : spec.seeds) seeds.push_back(s);

    return json{{"environment", env},   {"agent", agent},
                {"seeds", seeds},       {"methods", methods},
                {"output_dir", spec.output_dir},
                {"snapshot_sets", spec.snapshot_sets}};
}

SeedEnvironment build_environment(const ExperimentSpec& spec,
                                  std::uint64_t run_seed) {
    if (spec.synthetic) {
        const SyntheticEnvSpec& s = *spec.synthetic;
        GridWorld world(s.width, s.height, s.cell_size);
        EnvironmentTruth env =
            sample_gp_environment(world, s.kernel_reward, s.kernel_safety,
                                  s.seed + run_seed, s.r_max);
        return {world, std::move(env)};
    }
    const ElevationEnvSpec& e = *spec.elevation;
    GridWorld world = e.field.make_world();
    EnvironmentTruth env;
    env.seed = e.seed + run_seed;
    env.r_max = e.r_max;
    env.safety = slope_safety_from_elevation(e.field);
    std::mt19937_64 rng(env.seed);
    env.reward = sample_gp_field(world, e.kernel_reward, rng);
    rescale_reward_field(env.reward, e.r_max);
    return {world, std::move(env)};
}

AgentConfig make_agent_config(const ExperimentSpec& spec,
                              const SeedEnvironment& se, Method method,
                              std::uint64_t run_seed) {
    const AgentSpec& a = spec.agent;
    AgentConfig cfg;
    cfg.threshold_h = a.threshold;
    cfg.discount = a.discount;
    cfg.eps_g = a.eps_g;
    cfg.alpha_schedule = a.alpha;
    cfg.beta_schedule = a.beta;
    cfg.max_steps = a.max_steps;
    cfg.seed = run_seed;
    cfg.noise = a.noise;
    cfg.vi_tol = a.vi_tol;
    cfg.vi_max_iter = a.vi_max_iter;

    if (spec.synthetic) {
        cfg.kernel_r = a.kernel_reward.value_or(spec.synthetic->kernel_reward);
        cfg.kernel_g = a.kernel_safety.value_or(spec.synthetic->kernel_safety);
    } else {
        cfg.kernel_r = a.kernel_reward.value_or(spec.elevation->kernel_reward);
        cfg.kernel_g = *a.kernel_safety;  // required by validation
    }

    cfg.lipschitz = a.lipschitz ? *a.lipschitz
                                : euclidean_lipschitz_bound(se.world, se.env.safety);

    if (a.initial_safe_set) {
        cfg.initial_safe_set = *a.initial_safe_set;
    } else {
        int best = 0;
        for (int s = 1; s < se.world.size(); ++s) {
            if (se.env.safety[s] > se.env.safety[best]) best = s;
        }
        if (se.env.safety[best] < a.threshold) {
            throw std::runtime_error(
                "auto initial_safe_set: no truly safe cell exists (max g = " +
                std::to_string(se.env.safety[best]) + " < threshold)");
        }
        cfg.initial_safe_set = {se.world.state(best)};
    }
    cfg.start_state = a.start ? *a.start : cfg.initial_safe_set.front();

    switch (method) {
        case Method::sno_mdp_classic: cfg.stop_mode = StopMode::classic; break;
        case Method::sno_mdp_es2: cfg.stop_mode = StopMode::es2; break;
        case Method::sno_mdp_pes2: cfg.stop_mode = StopMode::pes2; break;
        default: cfg.stop_mode = StopMode::classic; break;
    }
    return cfg;
}

TrajectoryLog run_cell(const ExperimentSpec& spec, const SeedEnvironment& se,
                       Method method, std::uint64_t run_seed,
                       const SnapshotHook& hook) {
    const AgentConfig cfg = make_agent_config(spec, se, method, run_seed);
    switch (method) {
        case Method::safemdp:
            return run_safemdp_baseline(cfg, se.env, se.world, hook);
        case Method::oracle: return run_oracle(cfg, se.env, se.world, hook);
        default: return run_sno_mdp(cfg, se.env, se.world, hook);
    }
}

namespace {

std::string cell_stem(Method m, std::uint64_t seed) {
    return method_name(m) + "_seed" + std::to_string(seed);
}

struct CellTask {
    Method method;
    std::uint64_t seed;
    int seed_index;
    bool write_output;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, int jobs, bool verbose) {
    const fs::path out(spec.output_dir);

    // Fail-fast: every output path must be fresh.
    std::vector<fs::path> targets;
    targets.push_back(out / "summary.csv");
    for (std::uint64_t seed : spec.seeds) {
        targets.push_back(out / ("env_seed" + std::to_string(seed) + ".csv"));
        for (Method m : spec.methods) {
            targets.push_back(out / (cell_stem(m, seed) + ".jsonl"));
            if (spec.snapshot_sets && m != Method::oracle) {
                targets.push_back(out / (cell_stem(m, seed) + ".sets.csv"));
            }
        }
    }
    for (const fs::path& p : targets) {
        if (fs::exists(p)) {
            throw SpecError("output collision: '" + p.string() +
                            "' already exists (outputs are never overwritten)");
        }
    }
    fs::create_directories(out);

    // Per-seed worlds, then the oracle runs used as the normalization
    // denominator (written out only when requested as a method).
    std::vector<SeedEnvironment> envs;
    envs.reserve(spec.seeds.size());
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        envs.push_back(build_environment(spec, spec.seeds[i]));
        std::ofstream snap(out /
                           ("env_seed" + std::to_string(spec.seeds[i]) + ".csv"));
        write_environment_snapshot(snap, envs[i].world, envs[i].env);
    }

    const bool oracle_requested =
        std::find(spec.methods.begin(), spec.methods.end(), Method::oracle) !=
        spec.methods.end();

    std::vector<CellTask> tasks;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        for (Method m : spec.methods) {
            tasks.push_back({m, spec.seeds[i], static_cast<int>(i), true});
        }
        if (!oracle_requested) {
            tasks.push_back({Method::oracle, spec.seeds[i],
                             static_cast<int>(i), false});
        }
    }

    std::map<std::pair<std::string, std::uint64_t>, RunSummary> summaries;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string first_error;

    auto worker = [&]() {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const CellTask& task = tasks[i];
            try {
                const fs::path final_path =
                    out / (cell_stem(task.method, task.seed) + ".jsonl");
                const fs::path partial_path =
                    out / (cell_stem(task.method, task.seed) + ".jsonl.partial");
                const fs::path sets_path =
                    out / (cell_stem(task.method, task.seed) + ".sets.csv");

                SnapshotHook hook;
                std::shared_ptr<std::ofstream> sets_out;
                if (task.write_output && spec.snapshot_sets &&
                    task.method != Method::oracle) {
                    sets_out = std::make_shared<std::ofstream>(
                        sets_path.string() + ".partial");
                    auto first = std::make_shared<bool>(true);
                    const GridWorld* world = &envs[task.seed_index].world;
                    hook = [sets_out, first, world](const ExplorationSnapshot& s) {
                        write_set_snapshot(*sets_out, s.t, *world, s.sets,
                                           s.intervals, *first);
                        *first = false;
                    };
                }

                TrajectoryLog log = run_cell(spec, envs[task.seed_index],
                                             task.method, task.seed, hook);
                if (task.write_output) {
                    {
                        std::ofstream f(partial_path);
                        log.write_ndjson(f);
                    }
                    fs::rename(partial_path, final_path);
                    if (sets_out) {
                        sets_out->close();
                        fs::rename(sets_path.string() + ".partial", sets_path);
                    }
                    if (verbose) {
                        std::lock_guard<std::mutex> lk(mu);
                        std::cerr << "[run] " << cell_stem(task.method, task.seed)
                                  << ": steps=" << log.summary.total_steps
                                  << " unsafe=" << log.summary.unsafe_actions
                                  << " t_transition=" << log.summary.t_transition
                                  << "\n";
                    }
                }
                std::lock_guard<std::mutex> lk(mu);
                summaries[{method_name(task.method), task.seed}] = log.summary;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(mu);
                if (first_error.empty()) {
                    first_error = cell_stem(task.method, task.seed) + ": " +
                                  e.what();
                }
                failed.store(true);
            }
        }
    };

    const int n_workers =
        std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();

    if (failed.load()) {
        std::cerr << "run aborted: " << first_error << "\n";
        return 1;
    }

    // Summary table, methods in spec order.
    std::ofstream table(out / "summary.csv");
    table << "method,mean_norm_reward,min_norm_reward,max_norm_reward,"
             "unsafe_actions,mean_t_transition\n";
    for (Method m : spec.methods) {
        double sum = 0.0, lo = 0.0, hi = 0.0, tsum = 0.0;
        int unsafe = 0;
        bool first = true;
        for (std::uint64_t seed : spec.seeds) {
            const RunSummary& s = summaries.at({method_name(m), seed});
            const RunSummary& oracle = summaries.at({"oracle", seed});
            const double norm = s.cum_reward / oracle.cum_reward;
            sum += norm;
            lo = first ? norm : std::min(lo, norm);
            hi = first ? norm : std::max(hi, norm);
            first = false;
            unsafe += s.unsafe_actions;
            tsum += s.t_transition;
        }
        const double n = static_cast<double>(spec.seeds.size());
        table << method_name(m) << ',' << fmt(sum / n) << ',' << fmt(lo) << ','
              << fmt(hi) << ',' << unsafe << ',' << fmt(tsum / n) << '\n';
    }
    return 0;
}

void emit_plotdata(const std::string& log_dir, const std::string& out_dir) {
    const fs::path in_dir(log_dir);
    if (!fs::is_directory(in_dir)) {
        throw std::runtime_error("plotdata: '" + log_dir +
                                 "' is not a directory");
    }
    std::vector<fs::path> log_files;
    std::vector<fs::path> sets_files;
    for (const auto& entry : fs::directory_iterator(in_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 6 && name.ends_with(".jsonl")) {
            log_files.push_back(entry.path());
        } else if (name.ends_with(".sets.csv")) {
            sets_files.push_back(entry.path());
        }
    }
    std::sort(log_files.begin(), log_files.end());
    std::sort(sets_files.begin(), sets_files.end());
    if (log_files.empty()) {
        throw std::runtime_error("plotdata: no .jsonl logs in '" + log_dir +
                                 "'");
    }

    std::vector<TrajectoryLog> logs;
    for (const fs::path& p : log_files) {
        std::ifstream f(p);
        logs.push_back(TrajectoryLog::read_ndjson(f, p.string()));
    }

    std::map<std::uint64_t, const TrajectoryLog*> oracle_by_seed;
    for (const TrajectoryLog& log : logs) {
        if (log.meta.method == "oracle") {
            oracle_by_seed[log.meta.seed] = &log;
        }
    }

    const fs::path out(out_dir);
    fs::create_directories(out);

    auto fresh = [&](const fs::path& p) -> std::ofstream {
        if (fs::exists(p)) {
            throw std::runtime_error("plotdata: output collision: '" +
                                     p.string() + "' already exists");
        }
        return std::ofstream(p);
    };

    for (const TrajectoryLog& log : logs) {
        const auto it = oracle_by_seed.find(log.meta.seed);
        if (it == oracle_by_seed.end()) {
            throw std::runtime_error(
                "plotdata: no oracle log for seed " +
                std::to_string(log.meta.seed) +
                " (needed as the normalization denominator)");
        }
        const TrajectoryLog& oracle = *it->second;
        std::ofstream f = fresh(out / ("plot_" + log.meta.method + "_seed" +
                                       std::to_string(log.meta.seed) + ".csv"));
        f << "t,avg50_norm,x_minus,phase\n";
        for (const StepRecord& s : log.steps) {
            const double mine = trailing_average_reward(log.steps, s.t);
            const double denom = trailing_average_reward(oracle.steps, s.t);
            f << s.t << ',' << fmt(denom > 0.0 ? mine / denom : 0.0) << ','
              << s.x_minus_size << ',' << phase_name(s.phase) << '\n';
        }
    }

    std::ofstream markers = fresh(out / "plot_transitions.csv");
    markers << "method,seed,t_transition,transitioned\n";
    for (const TrajectoryLog& log : logs) {
        markers << log.meta.method << ',' << log.meta.seed << ','
                << log.summary.t_transition << ','
                << (log.summary.transitioned ? 1 : 0) << '\n';
    }

    for (const fs::path& p : sets_files) {
        std::ifstream src(p);
        std::string header;
        if (!std::getline(src, header) ||
            header != "t,x,y,in_x_minus,in_x_plus,in_g,l,u,w") {
            throw std::runtime_error("plotdata: '" + p.string() +
                                     "':1: unexpected snapshot header");
        }
        std::ofstream dst =
            fresh(out / ("plot_" + p.filename().string()));
        dst << header << '\n';
        std::string line;
        while (std::getline(src, line)) dst << line << '\n';
    }
}

}  // namespace safegrid
