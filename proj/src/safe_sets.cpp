#include "safegrid/safe_sets.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace safegrid {

SafetyIntervals SafetyIntervals::make(const GridWorld& world,
                                      const StateSet& s0, double h) {
    if (s0.empty()) {
        throw std::invalid_argument("initial safe set must be nonempty");
    }
    SafetyIntervals iv;
    iv.lower.assign(world.size(), -kSentinel);
    iv.upper.assign(world.size(), kSentinel);
    iv.initial_set = s0;
    iv.threshold = h;
    for (int s = 0; s < world.size(); ++s) {
        if (s0.contains(s)) iv.lower[s] = h;
    }
    return iv;
}

SafetyIntervals update_intervals(const SafetyIntervals& iv,
                                 const std::vector<Belief>& beliefs,
                                 double scale) {
    if (static_cast<int>(beliefs.size()) != static_cast<int>(iv.lower.size())) {
        throw std::invalid_argument(
            "update_intervals: beliefs must cover all grid states");
    }
    SafetyIntervals out = iv;
    for (std::size_t s = 0; s < beliefs.size(); ++s) {
        const double lo = beliefs[s].mean - scale * beliefs[s].std;
        const double hi = beliefs[s].mean + scale * beliefs[s].std;
        double new_l = std::max(out.lower[s], lo);
        double new_u = std::min(out.upper[s], hi);
        if (new_l > new_u) {
            // Empty intersection: collapse onto the old bound that the new
            // interval overshot.
            if (lo > out.upper[s]) new_l = new_u = out.upper[s];
            else new_l = new_u = out.lower[s];
        }
        out.lower[s] = new_l;
        out.upper[s] = new_u;
    }
    return out;
}

StateSet candidate_set(const SafetyIntervals& iv, const GridWorld& world,
                       const StateSet& base, BoundSide bound, double L) {
    if (base.empty()) {
        throw std::invalid_argument("candidate_set: base must be nonempty");
    }
    const std::vector<double>& b =
        bound == BoundSide::lower ? iv.lower : iv.upper;
    const std::vector<int> base_states = base.to_vector();
    StateSet out(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (base.contains(s)) {
            out.insert(s);
            continue;
        }
        const State st = world.state(s);
        for (int sp : base_states) {
            if (b[sp] - L * world.distance(st, world.state(sp)) >=
                iv.threshold) {
                out.insert(s);
                break;
            }
        }
    }
    return out;
}

StateSet reachable_set(const GridWorld& world, const StateSet& x) {
    StateSet out = x;
    if (out.universe() == 0) out = StateSet(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (!x.contains(s)) continue;
        for (Action a : kAllActions) {
            out.insert(world.index(world.transition(world.state(s), a)));
        }
    }
    return out;
}

StateSet returnable_set(const GridWorld& world, const StateSet& through,
                        const StateSet& xbar) {
    StateSet result = xbar;
    if (result.universe() == 0) result = StateSet(world.size());
    bool grew = true;
    while (grew) {
        grew = false;
        for (int s = 0; s < world.size(); ++s) {
            if (result.contains(s) || !through.contains(s)) continue;
            for (Action a : kAllActions) {
                const int t = world.index(world.transition(world.state(s), a));
                if (result.contains(t)) {
                    result.insert(s);
                    grew = true;
                    break;
                }
            }
        }
    }
    return result;
}

SafeSetState SafeSetState::seed(const GridWorld& world, const StateSet& s0) {
    SafeSetState ss;
    ss.x_minus = s0;
    ss.x_plus = s0;
    ss.s_minus = s0;
    ss.s_plus = s0;
    ss.expander_set = StateSet(world.size());
    ss.widths.assign(world.size(), 0.0);
    return ss;
}

SafeSetState expand_safe_set(const SafeSetState& prev,
                             const SafetyIntervals& iv, const GridWorld& world,
                             double L, BoundSide side) {
    const StateSet& prev_x =
        side == BoundSide::lower ? prev.x_minus : prev.x_plus;
    if (prev_x.empty()) {
        throw std::invalid_argument(
            "expand_safe_set: previous side set must be nonempty");
    }
    const StateSet cand = candidate_set(iv, world, prev_x, side, L);
    const StateSet reach = reachable_set(world, prev_x);
    const StateSet ret = returnable_set(world, cand, prev_x);

    StateSet x(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (cand.contains(s) && reach.contains(s) && ret.contains(s)) {
            x.insert(s);
        }
    }

    SafeSetState out = prev;
    if (side == BoundSide::lower) {
        out.s_minus = cand;
        out.x_minus = x;
    } else {
        out.s_plus = cand;
        out.x_plus = x;
    }
    return out;
}

std::pair<StateSet, std::vector<double>> expanders(const SafeSetState& ss,
                                                   const SafetyIntervals& iv,
                                                   const GridWorld& world,
                                                   double L) {
    if (ss.x_minus.empty()) {
        throw std::invalid_argument("expanders: X- must be nonempty");
    }
    std::vector<double> widths(world.size());
    for (int s = 0; s < world.size(); ++s) widths[s] = iv.width(s);

    std::vector<int> outside;
    for (int s = 0; s < world.size(); ++s) {
        if (!ss.s_minus.contains(s)) outside.push_back(s);
    }

    StateSet g(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (!ss.x_minus.contains(s)) continue;
        const State st = world.state(s);
        for (int sp : outside) {
            if (iv.upper[s] - L * world.distance(st, world.state(sp)) >=
                iv.threshold) {
                g.insert(s);
                break;
            }
        }
    }
    return {g, widths};
}

std::optional<int> select_goal(const StateSet& g,
                               const std::vector<double>& widths) {
    std::optional<int> best;
    for (int s = 0; s < g.universe(); ++s) {
        if (!g.contains(s)) continue;
        if (!best || widths[s] > widths[*best]) best = s;
    }
    return best;
}

void write_set_snapshot(std::ostream& out, int t, const GridWorld& world,
                        const SafeSetState& ss, const SafetyIntervals& iv,
                        bool header) {
    if (header) out << "t,x,y,in_x_minus,in_x_plus,in_g,l,u,w\n";
    char buf[160];
    for (int s = 0; s < world.size(); ++s) {
        const State st = world.state(s);
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%.17g,%.17g,%.17g\n",
                      t, st.x, st.y, ss.x_minus.contains(s) ? 1 : 0,
                      ss.x_plus.contains(s) ? 1 : 0,
                      ss.expander_set.contains(s) ? 1 : 0, iv.lower[s],
                      iv.upper[s], iv.width(s));
        out << buf;
    }
}

}  // namespace safegrid
