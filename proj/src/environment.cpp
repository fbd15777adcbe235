#include "safegrid/environment.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "safegrid/errors.hpp"

namespace safegrid {

namespace {

Eigen::MatrixXd full_kernel_matrix(const GridWorld& world, const Kernel& k) {
    const int n = world.size();
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        const State si = world.state(i);
        K(i, i) = kernel_eval(k, 0.0);
        for (int j = i + 1; j < n; ++j) {
            const double v = kernel_eval(k, world, si, world.state(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

/// LLT with an incremental diagonal jitter ladder: 1e-10, 1e-9, ... 1e-6.
Eigen::LLT<Eigen::MatrixXd> cholesky_with_jitter(Eigen::MatrixXd K,
                                                 const char* what) {
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() == Eigen::Success) return llt;
    for (double jitter = 1e-10; jitter <= 1.0000001e-6; jitter *= 10.0) {
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        llt.compute(Kj);
        if (llt.info() == Eigen::Success) return llt;
    }
    throw IllConditionedError(std::string(what) +
                              ": kernel matrix is not positive definite "
                              "even after jitter up to 1e-6");
}

}  // namespace

std::vector<double> sample_gp_field(const GridWorld& world,
                                    const Kernel& kernel,
                                    std::mt19937_64& rng) {
    kernel.validate();
    const int n = world.size();
    const auto llt = cholesky_with_jitter(full_kernel_matrix(world, kernel),
                                          "sample_gp_field");
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z(i) = gauss(rng);
    Eigen::VectorXd field = llt.matrixL() * z;
    return {field.data(), field.data() + n};
}

void rescale_reward_field(std::vector<double>& field, double r_max) {
    if (!(r_max > 0.0)) {
        throw std::invalid_argument("r_max must be positive");
    }
    double lo = field[0], hi = field[0];
    for (double v : field) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo < 1e-12) {
        for (double& v : field) v = r_max;
        return;
    }
    const double a = 0.01 * r_max;
    const double scale = (r_max - a) / (hi - lo);
    for (double& v : field) v = a + (v - lo) * scale;
}

EnvironmentTruth sample_gp_environment(const GridWorld& world,
                                       const Kernel& kernel_r,
                                       const Kernel& kernel_g,
                                       std::uint64_t seed, double r_max) {
    std::mt19937_64 rng(seed);
    EnvironmentTruth env;
    env.seed = seed;
    env.r_max = r_max;
    env.reward = sample_gp_field(world, kernel_r, rng);
    env.safety = sample_gp_field(world, kernel_g, rng);
    rescale_reward_field(env.reward, r_max);
    return env;
}

std::vector<Observation> observe(const EnvironmentTruth& env,
                                 const GridWorld& world, State s,
                                 const ObservationNoise& noise,
                                 std::mt19937_64& rng) {
    if (!world.contains(s)) {
        throw std::invalid_argument("observe: state outside the grid");
    }
    std::vector<Observation> out;
    out.reserve(kAllActions.size());
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Action a : kAllActions) {
        const State target = world.transition(s, a);
        bool seen = false;
        for (const Observation& o : out) {
            if (o.state == target) {
                seen = true;
                break;
            }
        }
        if (seen) continue;
        Observation obs;
        obs.state = target;
        obs.reward_sample = env.reward_at(world, target);
        obs.safety_sample = env.safety_at(world, target);
        if (noise.sigma_r > 0.0) obs.reward_sample += noise.sigma_r * gauss(rng);
        if (noise.sigma_g > 0.0) obs.safety_sample += noise.sigma_g * gauss(rng);
        out.push_back(obs);
    }
    return out;
}

double max_adjacent_slope(const GridWorld& world,
                          const std::vector<double>& values) {
    double best = 0.0;
    for (int i = 0; i < world.size(); ++i) {
        const State s = world.state(i);
        for (Action a : {Action::up, Action::right}) {
            const State t = world.transition(s, a);
            if (t == s) continue;
            const double slope =
                std::abs(values[world.index(t)] - values[i]) / world.cell_size();
            best = std::max(best, slope);
        }
    }
    return best;
}

double euclidean_lipschitz_bound(const GridWorld& world,
                                 const std::vector<double>& values) {
    double best = 0.0;
    for (int i = 0; i < world.size(); ++i) {
        const State si = world.state(i);
        for (int j = i + 1; j < world.size(); ++j) {
            const double ratio = std::abs(values[j] - values[i]) /
                                 world.distance(si, world.state(j));
            best = std::max(best, ratio);
        }
    }
    return best;
}

void write_environment_snapshot(std::ostream& out, const GridWorld& world,
                                const EnvironmentTruth& env) {
    out << "x,y,reward,safety\n";
    char buf[96];
    for (int i = 0; i < world.size(); ++i) {
        const State s = world.state(i);
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g\n", s.x, s.y,
                      env.reward[i], env.safety[i]);
        out << buf;
    }
}

}  // namespace safegrid
