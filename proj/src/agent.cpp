#include "safegrid/agent.hpp"

#include <cmath>
#include <stdexcept>

#include "safegrid/errors.hpp"
#include "safegrid/planning.hpp"

namespace safegrid {

std::string stop_mode_name(StopMode m) {
    switch (m) {
        case StopMode::classic: return "classic";
        case StopMode::es2: return "es2";
        case StopMode::pes2: return "pes2";
    }
    throw std::invalid_argument("unknown stop mode");
}

StopMode stop_mode_from_name(const std::string& name) {
    if (name == "classic") return StopMode::classic;
    if (name == "es2") return StopMode::es2;
    if (name == "pes2") return StopMode::pes2;
    throw std::invalid_argument("unknown stop mode: " + name);
}

void AgentConfig::validate(const GridWorld& world) const {
    if (initial_safe_set.empty()) {
        throw std::invalid_argument("initial_safe_set must be nonempty");
    }
    bool start_in_s0 = false;
    for (const State& s : initial_safe_set) {
        if (!world.contains(s)) {
            throw std::invalid_argument("initial_safe_set state outside grid");
        }
        if (s == start_state) start_in_s0 = true;
    }
    if (!start_in_s0) {
        throw std::invalid_argument("start_state must lie in initial_safe_set");
    }
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw std::invalid_argument("discount must be < 1 and >= 0");
    }
    if (!(eps_g > 0.0)) throw std::invalid_argument("eps_g must be positive");
    if (!(lipschitz >= 0.0)) {
        throw std::invalid_argument("lipschitz must be nonnegative");
    }
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (!std::isfinite(threshold_h)) {
        throw std::invalid_argument("threshold h must be finite");
    }
    if (!(noise.sigma_r >= 0.0 && noise.sigma_g >= 0.0)) {
        throw std::invalid_argument("observation noise must be nonnegative");
    }
    alpha_schedule.validate();
    beta_schedule.validate();
    kernel_r.validate();
    kernel_g.validate();
}

namespace {

StateSet make_state_set(const GridWorld& world, const std::vector<State>& states) {
    StateSet out(world.size());
    for (const State& s : states) out.insert(world.index(s));
    return out;
}

struct RunDriver {
    const AgentConfig& config;
    const EnvironmentTruth& env;
    const GridWorld& world;
    const SnapshotHook& hook;
    bool stop_rules_enabled;

    std::mt19937_64 rng;
    GpModel gp_r;
    GpModel gp_g;
    SafetyIntervals intervals;
    SafeSetState sets;
    State position;
    int t = 0;
    int outer_iterations = 0;
    double current_max_width = 0.0;
    TrajectoryLog log;

    RunDriver(const AgentConfig& cfg, const EnvironmentTruth& e,
              const GridWorld& w, const SnapshotHook& h, bool stops)
        : config(cfg),
          env(e),
          world(w),
          hook(h),
          stop_rules_enabled(stops),
          rng(cfg.seed),
          gp_r(w, cfg.kernel_r, cfg.noise.sigma_r * cfg.noise.sigma_r),
          gp_g(w, cfg.kernel_g, cfg.noise.sigma_g * cfg.noise.sigma_g),
          intervals(SafetyIntervals::make(
              w, make_state_set(w, cfg.initial_safe_set), cfg.threshold_h)),
          sets(SafeSetState::seed(w,
                                  make_state_set(w, cfg.initial_safe_set))),
          position(cfg.start_state) {
        log.meta.method = "";
        log.meta.seed = cfg.seed;
        log.meta.width = w.width();
        log.meta.height = w.height();
        log.meta.cell_size = w.cell_size();
        log.meta.threshold = cfg.threshold_h;
        log.meta.discount = cfg.discount;
        log.meta.start = cfg.start_state;
    }

    void observe_here() {
        for (const Observation& o : observe(env, world, position, config.noise, rng)) {
            gp_r.add_observation(o.state, o.reward_sample);
            gp_g.add_observation(o.state, o.safety_sample);
        }
    }

    void record_step(Action a, Phase phase) {
        position = world.transition(position, a);
        ++t;
        StepRecord rec;
        rec.t = t;
        rec.state = position;
        rec.action = a;
        rec.phase = phase;
        rec.reward = env.reward_at(world, position);
        rec.safety = env.safety_at(world, position);
        rec.unsafe = rec.safety < config.threshold_h;
        rec.x_minus_size = sets.x_minus.count();
        rec.x_plus_size = sets.x_plus.count();
        rec.expander_count = sets.expander_set.count();
        rec.max_width = current_max_width;
        log.steps.push_back(rec);
    }

    /// Phase 1. Returns the frozen admissible set for phase 2, or an
    /// empty optional when max_steps ran out before any rule fired.
    std::optional<StateSet> explore() {
        observe_here();

        std::uint64_t seen_g = ~std::uint64_t{0};
        double last_beta = std::nan("");
        std::vector<Belief> beliefs_g;
        std::vector<double> warm_value;
        bool have_warm = false;
        int outer = 0;

        while (t < config.max_steps) {
            ++outer;
            outer_iterations = outer;
            const double beta = sigma_multiplier(config.beta_schedule, outer);
            const bool changed =
                gp_g.revision() != seen_g || beta != last_beta;
            if (changed) {
                seen_g = gp_g.revision();
                last_beta = beta;
                beliefs_g = gp_g.posterior_all();
                intervals = update_intervals(intervals, beliefs_g, beta);
                // Iterate both expansion operators to their joint fixed
                // point under the current intervals; a single application
                // leaves the sets short of the Lipschitz closure that the
                // expander test assumes.
                while (true) {
                    const StateSet prev_minus = sets.x_minus;
                    const StateSet prev_plus = sets.x_plus;
                    sets = expand_safe_set(sets, intervals, world,
                                           config.lipschitz, BoundSide::lower);
                    sets = expand_safe_set(sets, intervals, world,
                                           config.lipschitz, BoundSide::upper);
                    if (sets.x_minus == prev_minus && sets.x_plus == prev_plus) {
                        break;
                    }
                }
                auto [g, widths] =
                    expanders(sets, intervals, world, config.lipschitz);
                sets.expander_set = g;
                sets.widths = std::move(widths);
                current_max_width = 0.0;
                for (int s = 0; s < world.size(); ++s) {
                    if (sets.expander_set.contains(s)) {
                        current_max_width =
                            std::max(current_max_width, sets.widths[s]);
                    }
                }
                if (hook) {
                    hook(ExplorationSnapshot{t, outer, position, intervals,
                                             sets});
                }
            }

            // Walk to the widest expander first; stop rules are tested
            // after each goal arrival.
            const auto goal = select_goal(sets.expander_set, sets.widths);
            if (goal) {
                std::vector<Action> path = shortest_safe_path(
                    world, sets.x_minus, position, world.state(*goal));
                if (path.empty()) path.push_back(Action::stay);
                for (Action a : path) {
                    record_step(a, Phase::explore_safety);
                    observe_here();
                    if (t >= config.max_steps) return std::nullopt;
                }
            } else if (!stop_rules_enabled) {
                // Nothing left to expand and no termination: idle in place.
                record_step(Action::stay, Phase::explore_safety);
                observe_here();
                continue;
            }
            if (!stop_rules_enabled) continue;

            const double alpha = sigma_multiplier(config.alpha_schedule, outer);
            if (config.stop_mode == StopMode::es2) {
                StopCheckResult res = es2_stop_check(
                    world, sets.x_minus, sets.x_plus, gp_r.posterior_all(),
                    alpha, config.discount, config.vi_tol,
                    have_warm ? &warm_value : nullptr);
                warm_value = std::move(res.solution.value);
                have_warm = true;
                if (res.stop) return res.next_set;
            } else if (config.stop_mode == StopMode::pes2) {
                StopCheckResult res = pes2_stop_check(
                    world, sets.x_minus, sets.x_plus, gp_r.posterior_all(),
                    gp_g.posterior_all(), alpha, config.threshold_h,
                    config.discount, config.vi_tol,
                    have_warm ? &warm_value : nullptr);
                warm_value = std::move(res.solution.value);
                have_warm = true;
                if (res.stop) return res.next_set;
            }
            // Width rule: the primary rule in classic mode and the
            // backstop otherwise. An empty expander set means nothing is
            // left to expand.
            if (!goal) return sets.x_minus;
            if (current_max_width < config.eps_g) return sets.x_minus;
        }
        return std::nullopt;
    }

    /// Greedy rollout of a fixed reward field over a frozen admissible
    /// set (the oracle's phase).
    void optimize_fixed(const StateSet& admissible,
                        const std::vector<double>& reward_field) {
        MdpView view;
        view.world = world;
        view.admissible = admissible;
        view.reward = reward_field;
        view.discount = config.discount;
        const ValueSolution sol =
            value_iteration(view, config.vi_tol, config.vi_max_iter);
        while (t < config.max_steps) {
            record_step(greedy_action(view, sol.value, position),
                        Phase::optimize_reward);
        }
    }

    /// Reward optimization over a frozen admissible set. The agent keeps
    /// observing as it moves, so the exploration bonus in U decays and
    /// the plan is re-solved whenever the reward belief actually changes.
    void optimize(const StateSet& admissible) {
        MdpView view;
        view.world = world;
        view.admissible = admissible;
        view.discount = config.discount;
        view.reward.assign(world.size(), 0.0);
        const std::vector<int> adm_states = admissible.to_vector();

        std::vector<double> value;
        bool solved = false;
        std::uint64_t seen_r = ~std::uint64_t{0};
        double last_alpha = std::nan("");
        int phase2_steps = 0;
        while (t < config.max_steps) {
            const double alpha = sigma_multiplier(
                config.alpha_schedule, outer_iterations + 1 + phase2_steps);
            if (!solved || gp_r.revision() != seen_r || alpha != last_alpha) {
                seen_r = gp_r.revision();
                last_alpha = alpha;
                const auto beliefs = gp_r.posterior(adm_states);
                for (std::size_t i = 0; i < adm_states.size(); ++i) {
                    view.reward[adm_states[i]] =
                        beliefs[i].mean + alpha * beliefs[i].std;
                }
                const ValueSolution sol =
                    value_iteration(view, config.vi_tol, config.vi_max_iter,
                                    solved ? &value : nullptr);
                value = sol.value;
                solved = true;
            }
            record_step(greedy_action(view, value, position),
                        Phase::optimize_reward);
            observe_here();
            ++phase2_steps;
        }
    }
};

}  // namespace

TrajectoryLog run_sno_mdp(const AgentConfig& config,
                          const EnvironmentTruth& env, const GridWorld& world,
                          const SnapshotHook& hook) {
    config.validate(world);
    RunDriver run(config, env, world, hook, /*stops=*/true);
    run.log.meta.method = "sno_mdp_" + stop_mode_name(config.stop_mode);

    const auto admissible = run.explore();
    if (admissible) run.optimize(*admissible);
    run.log.finalize_summary();
    return run.log;
}

TrajectoryLog run_safemdp_baseline(const AgentConfig& config,
                                   const EnvironmentTruth& env,
                                   const GridWorld& world,
                                   const SnapshotHook& hook) {
    config.validate(world);
    RunDriver run(config, env, world, hook, /*stops=*/false);
    run.log.meta.method = "safemdp";
    run.explore();
    run.log.finalize_summary();
    return run.log;
}

StateSet oracle_safe_set(const AgentConfig& config,
                         const EnvironmentTruth& env, const GridWorld& world) {
    SafetyIntervals truth;
    truth.lower = env.safety;
    truth.upper = env.safety;
    truth.initial_set = make_state_set(world, config.initial_safe_set);
    truth.threshold = config.threshold_h;

    SafeSetState ss = SafeSetState::seed(world, truth.initial_set);
    while (true) {
        const StateSet prev = ss.x_minus;
        ss = expand_safe_set(ss, truth, world, config.lipschitz,
                             BoundSide::lower);
        if (ss.x_minus == prev) break;
    }
    return ss.x_minus;
}

TrajectoryLog run_oracle(const AgentConfig& config, const EnvironmentTruth& env,
                         const GridWorld& world, const SnapshotHook& hook) {
    config.validate(world);
    RunDriver run(config, env, world, hook, /*stops=*/true);
    run.log.meta.method = "oracle";

    const StateSet safe = oracle_safe_set(config, env, world);
    run.sets.x_minus = safe;
    run.sets.x_plus = safe;
    run.sets.expander_set = StateSet(world.size());
    run.optimize_fixed(safe, env.reward);
    run.log.finalize_summary();
    return run.log;
}

}  // namespace safegrid
