#include "safegrid/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace safegrid {

ScheduleMode schedule_mode_from_name(const std::string& name) {
    if (name == "fixed") return ScheduleMode::fixed;
    if (name == "theoretical") return ScheduleMode::theoretical;
    throw std::invalid_argument("unknown schedule mode: " + name);
}

std::string schedule_mode_name(ScheduleMode m) {
    return m == ScheduleMode::fixed ? "fixed" : "theoretical";
}

void ConfidenceSchedule::validate() const {
    if (mode == ScheduleMode::fixed) {
        if (!(fixed_value > 0.0)) {
            throw std::invalid_argument("schedule fixed_value must be positive");
        }
        return;
    }
    if (!(rkhs_bound > 0.0)) {
        throw std::invalid_argument("schedule rkhs_bound must be positive");
    }
    if (!(noise_scale > 0.0)) {
        throw std::invalid_argument("schedule noise_scale must be positive");
    }
    if (!(failure_probability > 0.0 && failure_probability < 1.0)) {
        throw std::invalid_argument(
            "schedule failure_probability must lie in (0, 1)");
    }
    for (double g : info_gain) {
        if (!(g >= 0.0)) {
            throw std::invalid_argument("schedule info_gain must be nonnegative");
        }
    }
}

double confidence_scale(const ConfidenceSchedule& sched, int t) {
    if (t < 1) throw std::invalid_argument("confidence_scale: t must be >= 1");
    sched.validate();
    if (sched.mode == ScheduleMode::fixed) return sched.fixed_value;

    double gamma_prev = 0.0;
    if (!sched.info_gain.empty()) {
        const int k = t - 1;
        const int last = static_cast<int>(sched.info_gain.size()) - 1;
        gamma_prev = sched.info_gain[std::min(k, last)];
    }
    return sched.rkhs_bound +
           sched.noise_scale *
               std::sqrt(2.0 * (gamma_prev + 1.0 +
                                std::log(1.0 / sched.failure_probability)));
}

double sigma_multiplier(const ConfidenceSchedule& sched, int t) {
    const double raw = confidence_scale(sched, t);
    return sched.scale_is_squared ? std::sqrt(raw) : raw;
}

std::vector<double> info_gain_profile(const GpModel& gp,
                                      std::span<const int> candidates) {
    if (!(gp.noise_variance() > 0.0)) {
        throw std::invalid_argument(
            "info_gain_estimate requires a positive noise variance");
    }
    std::vector<double> profile;
    if (candidates.empty()) return profile;

    GpModel fantasy = gp;  // variances do not depend on the observed values
    std::vector<int> remaining(candidates.begin(), candidates.end());
    double total = 0.0;
    while (!remaining.empty()) {
        const auto beliefs = fantasy.posterior(remaining);
        int best = 0;
        for (int i = 1; i < static_cast<int>(remaining.size()); ++i) {
            if (beliefs[i].std > beliefs[best].std) best = i;
        }
        const double var = beliefs[best].std * beliefs[best].std;
        total += 0.5 * std::log1p(var / gp.noise_variance());
        profile.push_back(total);
        fantasy.add_observation(remaining[best], 0.0);
        remaining.erase(remaining.begin() + best);
    }
    return profile;
}

double info_gain_estimate(const GpModel& gp, std::span<const int> candidates) {
    const auto profile = info_gain_profile(gp, candidates);
    return profile.empty() ? 0.0 : profile.back();
}

}  // namespace safegrid
