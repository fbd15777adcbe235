#pragma once

#include <string>

#include "safegrid/grid_world.hpp"

namespace safegrid {

enum class KernelFamily { rbf, matern52 };

std::string kernel_family_name(KernelFamily f);
KernelFamily kernel_family_from_name(const std::string& name);

/// Stationary covariance function. `variance` is the prior variance
/// k(s, s); `lengthscale` is in the same physical units as grid
/// distances (cells scaled by cell_size).
struct Kernel {
    KernelFamily family = KernelFamily::rbf;
    double lengthscale = 1.0;
    double variance = 1.0;

    void validate() const;
};

/// Covariance at separation `distance`.
double kernel_eval(const Kernel& k, double distance);

/// Covariance between two grid states under the world's metric.
inline double kernel_eval(const Kernel& k, const GridWorld& world, State a,
                          State b) {
    return kernel_eval(k, world.distance(a, b));
}

}  // namespace safegrid
