#include "safegrid/planning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "safegrid/errors.hpp"

namespace safegrid {

void MdpView::validate() const {
    if (static_cast<int>(reward.size()) != world.size()) {
        throw std::invalid_argument("MdpView: reward must cover all states");
    }
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw std::invalid_argument("MdpView: discount must lie in [0, 1)");
    }
    if (survival) {
        if (static_cast<int>(survival->size()) != world.size()) {
            throw std::invalid_argument(
                "MdpView: survival must cover all states");
        }
        for (int s = 0; s < world.size(); ++s) {
            if (!admissible.contains(s)) continue;
            const double p = (*survival)[s];
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument(
                    "MdpView: survival probabilities must lie in [0, 1]");
            }
        }
    }
}

namespace {

inline double successor_value(const MdpView& view,
                              const std::vector<double>& value, int sp) {
    double q = view.reward[sp] + view.discount * value[sp];
    if (view.survival) q *= (*view.survival)[sp];
    return q;
}

}  // namespace

std::pair<std::vector<double>, double> bellman_backup(
    const MdpView& view, const std::vector<double>& value) {
    std::vector<double> next(view.world.size(), 0.0);
    double delta = 0.0;
    for (int s = 0; s < view.world.size(); ++s) {
        if (!view.admissible.contains(s)) continue;
        const State st = view.world.state(s);
        bool found = false;
        double best = 0.0;
        for (Action a : kAllActions) {
            const int sp = view.world.index(view.world.transition(st, a));
            if (!view.admissible.contains(sp)) continue;
            const double q = successor_value(view, value, sp);
            if (!found || q > best) {
                best = q;
                found = true;
            }
        }
        next[s] = best;
        delta = std::max(delta, std::abs(next[s] - value[s]));
    }
    return {std::move(next), delta};
}

ValueSolution value_iteration(const MdpView& view, double tol, int max_iter,
                              const std::vector<double>* warm_start) {
    view.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol <= 0");

    ValueSolution sol;
    sol.value.assign(view.world.size(), 0.0);
    if (warm_start && static_cast<int>(warm_start->size()) == view.world.size()) {
        for (int s = 0; s < view.world.size(); ++s) {
            if (view.admissible.contains(s)) sol.value[s] = (*warm_start)[s];
        }
    }

    double delta = 0.0;
    bool converged = false;
    for (int k = 1; k <= max_iter; ++k) {
        auto [next, d] = bellman_backup(view, sol.value);
        sol.value = std::move(next);
        sol.iterations = k;
        delta = d;
        if (delta < tol) {
            converged = true;
            break;
        }
    }
    sol.residual = delta;
    if (!converged) {
        throw NonConvergenceError(
            "value_iteration: no convergence after " +
                std::to_string(max_iter) +
                " sweeps (residual " + std::to_string(delta) + ")",
            delta, max_iter);
    }

    sol.policy.assign(view.world.size(), Action::stay);
    for (int s = 0; s < view.world.size(); ++s) {
        if (!view.admissible.contains(s)) continue;
        sol.policy[s] = greedy_action(view, sol.value, view.world.state(s));
    }
    return sol;
}

Action greedy_action(const MdpView& view, const std::vector<double>& value,
                     State s) {
    bool found = false;
    double best = 0.0;
    Action choice = Action::stay;
    for (Action a : kAllActions) {
        const int sp = view.world.index(view.world.transition(s, a));
        if (!view.admissible.contains(sp)) continue;
        const double q = successor_value(view, value, sp);
        if (!found || q > best) {
            best = q;
            choice = a;
            found = true;
        }
    }
    if (!found) {
        throw std::invalid_argument(
            "greedy_action: no action leads into the admissible set");
    }
    return choice;
}

std::vector<double> optimistic_reward(const std::vector<Belief>& beliefs_r,
                                      double alpha_scale) {
    std::vector<double> u(beliefs_r.size());
    for (std::size_t s = 0; s < beliefs_r.size(); ++s) {
        u[s] = beliefs_r[s].mean + alpha_scale * beliefs_r[s].std;
    }
    return u;
}

std::vector<double> es2_auxiliary_reward(const std::vector<Belief>& beliefs_r,
                                         double alpha_scale,
                                         const StateSet& x_minus,
                                         const StateSet& x_plus) {
    if (!is_subset(x_minus, x_plus)) {
        throw std::invalid_argument("es2_auxiliary_reward: X- must be in X+");
    }
    std::vector<double> r(beliefs_r.size(), 0.0);
    for (std::size_t s = 0; s < beliefs_r.size(); ++s) {
        const int i = static_cast<int>(s);
        if (x_minus.contains(i)) {
            r[s] = beliefs_r[s].mean - alpha_scale * beliefs_r[s].std;
        } else if (x_plus.contains(i)) {
            r[s] = beliefs_r[s].mean + alpha_scale * beliefs_r[s].std;
        }
    }
    return r;
}

namespace {

StopCheckResult stop_check_impl(const GridWorld& world,
                                const StateSet& x_minus,
                                const StateSet& x_plus,
                                const std::vector<Belief>& beliefs_r,
                                double alpha_scale, double discount, double tol,
                                std::optional<std::vector<double>> survival,
                                const std::vector<double>* warm_start) {
    if (x_minus.empty()) {
        throw std::invalid_argument("stop check: X- must be nonempty");
    }
    MdpView view;
    view.world = world;
    view.admissible = x_plus;
    view.reward = es2_auxiliary_reward(beliefs_r, alpha_scale, x_minus, x_plus);
    view.discount = discount;
    view.survival = std::move(survival);

    StopCheckResult result;
    result.solution = value_iteration(view, tol, 10000, warm_start);
    result.next_set = StateSet(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (!x_minus.contains(s)) continue;
        const State st = world.state(s);
        result.next_set.insert(
            world.index(world.transition(st, result.solution.policy[s])));
    }
    result.stop = is_subset(result.next_set, x_minus);
    return result;
}

}  // namespace

StopCheckResult es2_stop_check(const GridWorld& world, const StateSet& x_minus,
                               const StateSet& x_plus,
                               const std::vector<Belief>& beliefs_r,
                               double alpha_scale, double discount, double tol,
                               const std::vector<double>* warm_start) {
    return stop_check_impl(world, x_minus, x_plus, beliefs_r, alpha_scale,
                           discount, tol, std::nullopt, warm_start);
}

std::vector<double> pes2_survival(const std::vector<Belief>& beliefs_g,
                                  double h) {
    std::vector<double> p(beliefs_g.size());
    for (std::size_t s = 0; s < beliefs_g.size(); ++s) {
        const double sigma = beliefs_g[s].std;
        if (!(sigma >= 0.0)) {
            throw std::invalid_argument("pes2_survival: sigma must be >= 0");
        }
        if (sigma == 0.0) {
            p[s] = beliefs_g[s].mean >= h ? 1.0 : 0.0;
        } else {
            p[s] = 1.0 - 0.5 * std::erfc((beliefs_g[s].mean - h) /
                                         (std::sqrt(2.0) * sigma));
        }
    }
    return p;
}

StopCheckResult pes2_stop_check(const GridWorld& world,
                                const StateSet& x_minus,
                                const StateSet& x_plus,
                                const std::vector<Belief>& beliefs_r,
                                const std::vector<Belief>& beliefs_g,
                                double alpha_scale, double h, double discount,
                                double tol,
                                const std::vector<double>* warm_start) {
    return stop_check_impl(world, x_minus, x_plus, beliefs_r, alpha_scale,
                           discount, tol, pes2_survival(beliefs_g, h),
                           warm_start);
}

std::vector<Action> shortest_safe_path(const GridWorld& world,
                                       const StateSet& x_minus, State from,
                                       State to) {
    const int start = world.index(from);
    const int goal = world.index(to);
    if (!x_minus.contains(start) || !x_minus.contains(goal)) {
        throw std::invalid_argument(
            "shortest_safe_path: endpoints must lie in the safe set");
    }
    if (start == goal) return {};

    std::vector<int> prev_state(world.size(), -1);
    std::vector<Action> prev_action(world.size(), Action::stay);
    std::vector<char> seen(world.size(), 0);
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        if (s == goal) break;
        const State st = world.state(s);
        for (Action a : kAllActions) {
            const int t = world.index(world.transition(st, a));
            if (seen[t] || !x_minus.contains(t)) continue;
            seen[t] = 1;
            prev_state[t] = s;
            prev_action[t] = a;
            queue.push_back(t);
        }
    }
    if (!seen[goal]) {
        throw DisconnectedSafeSetError(
            "shortest_safe_path: goal unreachable inside the safe set");
    }
    std::vector<Action> path;
    for (int s = goal; s != start; s = prev_state[s]) {
        path.push_back(prev_action[s]);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

}  // namespace safegrid
