#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "safegrid/gp.hpp"
#include "safegrid/grid_world.hpp"

namespace safegrid {

/// An MDP restricted to an admissible state set. Backups maximize over
/// successor states reachable by some action and lying in the admissible
/// set; `stay` guarantees every admissible state has at least one such
/// successor. When `survival` is present, a successor's backup value is
/// weighted by its survival probability (the virtual absorbing state has
/// zero reward and value, so it never needs to be materialized).
struct MdpView {
    GridWorld world = GridWorld(1, 1);
    StateSet admissible;
    std::vector<double> reward;  // per state, full grid indexing
    double discount = 0.9;
    std::optional<std::vector<double>> survival;

    void validate() const;
};

struct ValueSolution {
    std::vector<double> value;   // zero outside the admissible set
    std::vector<Action> policy;  // stay outside the admissible set
    double residual = 0.0;
    int iterations = 0;
};

/// One synchronous Bellman sweep; returns the new values and the
/// sup-norm change over admissible states.
std::pair<std::vector<double>, double> bellman_backup(
    const MdpView& view, const std::vector<double>& value);

/// Synchronous value iteration until the sup-norm change drops below
/// tol. Greedy policy extraction breaks ties by action order (stay
/// first). Throws NonConvergenceError if max_iter sweeps are exhausted.
/// An optional warm start seeds the value function (the fixed point does
/// not depend on it).
ValueSolution value_iteration(const MdpView& view, double tol = 1e-6,
                              int max_iter = 10000,
                              const std::vector<double>* warm_start = nullptr);

/// Greedy action at `s` against a solved value function; valid for any
/// state with at least one action into the admissible set (not only
/// admissible states themselves).
Action greedy_action(const MdpView& view, const std::vector<double>& value,
                     State s);

/// Upper confidence bound U = mu + alpha_scale * sigma per state.
std::vector<double> optimistic_reward(const std::vector<Belief>& beliefs_r,
                                      double alpha_scale);

/// Exploration-driving reward: optimistic (mu + alpha*sigma) on
/// X+ \ X-, pessimistic (mu - alpha*sigma) on X-, zero elsewhere.
std::vector<double> es2_auxiliary_reward(const std::vector<Belief>& beliefs_r,
                                         double alpha_scale,
                                         const StateSet& x_minus,
                                         const StateSet& x_plus);

struct StopCheckResult {
    bool stop = false;
    StateSet next_set;       // Y (or Z): image of X- under the greedy policy
    ValueSolution solution;  // auxiliary-MDP solution, reusable as warm start
};

/// Solves the auxiliary MDP over X+ with the exploration-driving reward
/// and reports whether the greedy policy keeps X- inside itself.
StopCheckResult es2_stop_check(const GridWorld& world, const StateSet& x_minus,
                               const StateSet& x_plus,
                               const std::vector<Belief>& beliefs_r,
                               double alpha_scale, double discount, double tol,
                               const std::vector<double>* warm_start = nullptr);

/// Probability that each state satisfies the safety constraint under a
/// Gaussian belief: 1 - 0.5*erfc((mu - h) / (sqrt(2)*sigma)); a zero
/// sigma degenerates to the indicator of mu >= h.
std::vector<double> pes2_survival(const std::vector<Belief>& beliefs_g,
                                  double h);

/// As es2_stop_check, but the auxiliary MDP weights successor backups by
/// the survival probability derived from the safety beliefs.
StopCheckResult pes2_stop_check(const GridWorld& world,
                                const StateSet& x_minus,
                                const StateSet& x_plus,
                                const std::vector<Belief>& beliefs_r,
                                const std::vector<Belief>& beliefs_g,
                                double alpha_scale, double h, double discount,
                                double tol,
                                const std::vector<double>* warm_start = nullptr);

/// Minimum-length action sequence from `from` to `to` that never leaves
/// `x_minus` (breadth-first, neighbors expanded in action order). Throws
/// DisconnectedSafeSetError when no such path exists.
std::vector<Action> shortest_safe_path(const GridWorld& world,
                                       const StateSet& x_minus, State from,
                                       State to);

}  // namespace safegrid
