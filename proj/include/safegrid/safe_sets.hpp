#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "safegrid/gp.hpp"
#include "safegrid/grid_world.hpp"

namespace safegrid {

enum class BoundSide { lower, upper };

/// Per-state confidence intervals [l, u] on the safety function,
/// intersected across updates so l never decreases and u never
/// increases. States in the initial safe set start at [h, sentinel];
/// everything else starts fully unknown at [-sentinel, sentinel].
struct SafetyIntervals {
    static constexpr double kSentinel = 1e12;

    std::vector<double> lower;
    std::vector<double> upper;
    StateSet initial_set;
    double threshold = 0.0;  // h

    static SafetyIntervals make(const GridWorld& world, const StateSet& s0,
                                double h);

    double width(int s) const { return upper[s] - lower[s]; }
};

/// Intersects the current intervals with [mu - scale*sigma,
/// mu + scale*sigma] per state. An empty intersection collapses to the
/// violated old bound, which keeps l <= u and preserves monotonicity.
SafetyIntervals update_intervals(const SafetyIntervals& iv,
                                 const std::vector<Belief>& beliefs,
                                 double scale);

/// {s | exists s' in base: bound(s') - L*d(s, s') >= h} united with base.
StateSet candidate_set(const SafetyIntervals& iv, const GridWorld& world,
                       const StateSet& base, BoundSide bound, double L);

/// base united with its one-step forward image.
StateSet reachable_set(const GridWorld& world, const StateSet& x);

/// States that can reach `xbar` along a path staying inside `through`:
/// the least fixed point of the one-step return operator seeded at xbar.
StateSet returnable_set(const GridWorld& world, const StateSet& through,
                        const StateSet& xbar);

/// Snapshot of the safe-space computation after one synchronized update.
struct SafeSetState {
    StateSet x_minus;
    StateSet x_plus;
    StateSet s_minus;
    StateSet s_plus;
    StateSet expander_set;       // G
    std::vector<double> widths;  // w = u - l, per state

    static SafeSetState seed(const GridWorld& world, const StateSet& s0);
};

/// One expansion step of the chosen side: recomputes S and X for that
/// side from the previous X and the current intervals.
SafeSetState expand_safe_set(const SafeSetState& prev,
                             const SafetyIntervals& iv, const GridWorld& world,
                             double L, BoundSide side);

/// Expanders G (certified states whose optimistic bound could certify at
/// least one state outside the pessimistic candidate set) and the width
/// field w = u - l over all states.
std::pair<StateSet, std::vector<double>> expanders(const SafeSetState& ss,
                                                   const SafetyIntervals& iv,
                                                   const GridWorld& world,
                                                   double L);

/// Goal state: the expander of maximum width, ties broken by the
/// smallest (row, column) index. Empty G yields nullopt, signalling that
/// exploration has nothing left to target.
std::optional<int> select_goal(const StateSet& g,
                               const std::vector<double>& widths);

/// Flat snapshot rows: t, x, y, in_X_minus, in_X_plus, in_G, l, u, w.
void write_set_snapshot(std::ostream& out, int t, const GridWorld& world,
                        const SafeSetState& ss, const SafetyIntervals& iv,
                        bool header);

}  // namespace safegrid
