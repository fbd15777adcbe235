#pragma once

#include <functional>
#include <string>
#include <vector>

#include "safegrid/environment.hpp"
#include "safegrid/grid_world.hpp"
#include "safegrid/kernel.hpp"
#include "safegrid/safe_sets.hpp"
#include "safegrid/schedule.hpp"
#include "safegrid/trajectory.hpp"

namespace safegrid {

enum class StopMode { classic, es2, pes2 };

std::string stop_mode_name(StopMode m);
StopMode stop_mode_from_name(const std::string& name);

struct AgentConfig {
    double threshold_h = 0.0;
    double lipschitz = 1.0;
    double discount = 0.99;
    double eps_g = 0.1;
    ConfidenceSchedule alpha_schedule;  // reward confidence
    ConfidenceSchedule beta_schedule;   // safety confidence
    StopMode stop_mode = StopMode::classic;
    std::vector<State> initial_safe_set;
    State start_state;
    int max_steps = 1000;
    std::uint64_t seed = 0;
    Kernel kernel_r;
    Kernel kernel_g;
    ObservationNoise noise;
    double vi_tol = 1e-6;
    int vi_max_iter = 10000;

    void validate(const GridWorld& world) const;
};

/// Fired once per outer exploration iteration, after the intervals and
/// safe sets have been recomputed.
struct ExplorationSnapshot {
    int t = 0;  // actions executed so far
    int outer_iteration = 0;
    State agent_state;
    const SafetyIntervals& intervals;
    const SafeSetState& sets;
};
using SnapshotHook = std::function<void(const ExplorationSnapshot&)>;

/// Stepwise safe exploration followed by reward optimization. Phase 1
/// expands the pessimistic safe set by walking to maximum-width
/// expanders, updating both GPs at every visited state. After each goal
/// arrival the configured stop rule is tested (the classic width rule
/// stays active as a backstop under es2/pes2). Phase 2 freezes beliefs,
/// solves the optimistic-reward Bellman equation over the admissible set
/// determined by whichever rule fired, and follows the greedy policy
/// until max_steps.
TrajectoryLog run_sno_mdp(const AgentConfig& config,
                          const EnvironmentTruth& env, const GridWorld& world,
                          const SnapshotHook& hook = {});

/// Safe exploration only: expands forever (until max_steps), idling in
/// place once no expander remains. Never optimizes reward.
TrajectoryLog run_safemdp_baseline(const AgentConfig& config,
                                   const EnvironmentTruth& env,
                                   const GridWorld& world,
                                   const SnapshotHook& hook = {});

/// Full-knowledge baseline: computes the safely-reachable closure of the
/// initial set using the true safety values in place of confidence
/// bounds, then follows the greedy policy of the true-reward Bellman
/// solution over that set.
TrajectoryLog run_oracle(const AgentConfig& config, const EnvironmentTruth& env,
                         const GridWorld& world, const SnapshotHook& hook = {});

/// The safely-reachable closure used by the oracle.
StateSet oracle_safe_set(const AgentConfig& config,
                         const EnvironmentTruth& env, const GridWorld& world);

}  // namespace safegrid
