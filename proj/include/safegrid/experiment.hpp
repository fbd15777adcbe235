#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "safegrid/agent.hpp"
#include "safegrid/elevation.hpp"
#include "safegrid/environment.hpp"

namespace safegrid {

enum class Method {
    sno_mdp_classic,
    sno_mdp_es2,
    sno_mdp_pes2,
    safemdp,
    oracle,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SyntheticEnvSpec {
    int width = 20;
    int height = 20;
    double cell_size = 1.0;
    Kernel kernel_reward;
    Kernel kernel_safety;
    double r_max = 1.0;
    std::uint64_t seed = 0;  // base offset added to each run seed
};

struct ElevationEnvSpec {
    std::string file;  // resolved path
    ElevationFormat format = ElevationFormat::csv;
    double cell_size = 1.0;  // csv only; the esri header wins otherwise
    Kernel kernel_reward;    // prior for the generated reward field
    double r_max = 1.0;
    std::uint64_t seed = 0;
    ElevationField field;  // parsed during validation
};

struct AgentSpec {
    double threshold = 0.0;
    std::optional<double> lipschitz;  // nullopt: empirical constant of g
    double discount = 0.99;
    double eps_g = 0.1;
    ConfidenceSchedule alpha;
    ConfidenceSchedule beta;
    std::optional<std::vector<State>> initial_safe_set;  // nullopt: safest cell
    std::optional<State> start;                          // nullopt: first S0 state
    int max_steps = 1000;
    ObservationNoise noise;
    std::optional<Kernel> kernel_reward;  // belief kernels; default from env
    std::optional<Kernel> kernel_safety;
    double vi_tol = 1e-6;
    int vi_max_iter = 10000;
};

struct ExperimentSpec {
    std::optional<SyntheticEnvSpec> synthetic;
    std::optional<ElevationEnvSpec> elevation;
    AgentSpec agent;
    std::vector<std::uint64_t> seeds;
    std::vector<Method> methods;
    std::string output_dir = "out";
    bool snapshot_sets = false;
};

/// Parses and validates a spec document. `base_dir` anchors relative
/// file references. Throws SpecError with a field-level message.
ExperimentSpec parse_experiment_spec(const nlohmann::json& doc,
                                     const std::string& base_dir);

/// Loads, parses and validates a spec file.
ExperimentSpec load_experiment_spec(const std::string& path);

/// The fully-resolved configuration: parsing this document again yields
/// an identical spec.
nlohmann::json resolve_spec_json(const ExperimentSpec& spec);

/// World plus ground truth for one run seed.
struct SeedEnvironment {
    GridWorld world;
    EnvironmentTruth env;
};
SeedEnvironment build_environment(const ExperimentSpec& spec,
                                  std::uint64_t run_seed);

/// Per-seed agent configuration with auto fields resolved against the
/// generated world (safest-cell initial set, empirical Lipschitz bound).
AgentConfig make_agent_config(const ExperimentSpec& spec,
                              const SeedEnvironment& se, Method method,
                              std::uint64_t run_seed);

/// Runs one (method, seed) cell.
TrajectoryLog run_cell(const ExperimentSpec& spec, const SeedEnvironment& se,
                       Method method, std::uint64_t run_seed,
                       const SnapshotHook& hook = {});

/// Executes every (method x seed) cell, writes one log per cell plus a
/// summary table. `jobs` cells run concurrently. Returns a process exit
/// status (0 success, 1 run abort).
int run_experiment(const ExperimentSpec& spec, int jobs, bool verbose);

/// Reads the logs in `log_dir` and emits per-cell time series
/// (t, trailing-50 reward normalized by the same-seed oracle, |X-|,
/// phase), a transition marker table, and copies of any set snapshot
/// files. Throws on malformed or missing inputs.
void emit_plotdata(const std::string& log_dir, const std::string& out_dir);

}  // namespace safegrid
