#pragma once

#include <span>
#include <string>
#include <vector>

#include "safegrid/gp.hpp"

namespace safegrid {

enum class ScheduleMode { fixed, theoretical };

ScheduleMode schedule_mode_from_name(const std::string& name);
std::string schedule_mode_name(ScheduleMode m);

/// Produces the confidence scaling factor for iteration t >= 1.
///
/// In fixed mode the factor is `fixed_value` for all t. In theoretical
/// mode it is B + sigma * sqrt(2 * (Gamma_{t-1} + 1 + log(1/Delta))),
/// with the Gamma sequence supplied in `info_gain` (Gamma_k at index k,
/// constant-extended past the end, zero when empty).
///
/// `scale_is_squared` selects how the factor multiplies a posterior
/// std: false means the factor is applied directly (it is already the
/// square-rooted multiplier), true means its square root is applied.
struct ConfidenceSchedule {
    ScheduleMode mode = ScheduleMode::fixed;
    double fixed_value = 2.0;
    double rkhs_bound = 1.0;           // B
    double noise_scale = 1.0;          // sigma
    double failure_probability = 0.05; // Delta in (0, 1)
    std::vector<double> info_gain;     // Gamma_0, Gamma_1, ...
    bool scale_is_squared = false;

    void validate() const;
};

/// Raw schedule value at iteration t (t >= 1).
double confidence_scale(const ConfidenceSchedule& sched, int t);

/// The multiplier actually applied to a posterior std at iteration t.
double sigma_multiplier(const ConfidenceSchedule& sched, int t);

/// Greedy lower-bound estimate of the mutual information obtainable from
/// observing all candidate states: repeatedly pick the state with the
/// largest current posterior variance and accumulate
/// 0.5 * log(1 + var / noise_variance). Requires noise_variance > 0.
double info_gain_estimate(const GpModel& gp, std::span<const int> candidates);

/// Prefix sums of the greedy accumulation above: entry k-1 estimates the
/// information after k picks, suitable as a Gamma sequence.
std::vector<double> info_gain_profile(const GpModel& gp,
                                      std::span<const int> candidates);

}  // namespace safegrid
