#include "safegrid/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace safegrid {

std::string kernel_family_name(KernelFamily f) {
    switch (f) {
        case KernelFamily::rbf: return "rbf";
        case KernelFamily::matern52: return "matern52";
    }
    throw std::invalid_argument("unknown kernel family");
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "rbf") return KernelFamily::rbf;
    if (name == "matern52") return KernelFamily::matern52;
    throw std::invalid_argument("unknown kernel family: " + name);
}

void Kernel::validate() const {
    if (!(lengthscale > 0.0)) {
        throw std::invalid_argument("kernel lengthscale must be positive");
    }
    if (!(variance > 0.0)) {
        throw std::invalid_argument("kernel variance must be positive");
    }
}

double kernel_eval(const Kernel& k, double distance) {
    const double d = std::abs(distance);
    switch (k.family) {
        case KernelFamily::rbf: {
            const double z = d / k.lengthscale;
            return k.variance * std::exp(-0.5 * z * z);
        }
        case KernelFamily::matern52: {
            const double z = std::sqrt(5.0) * d / k.lengthscale;
            return k.variance * (1.0 + z + z * z / 3.0) * std::exp(-z);
        }
    }
    throw std::invalid_argument("unknown kernel family");
}

}  // namespace safegrid
