#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

#include "safegrid/grid_world.hpp"
#include "safegrid/kernel.hpp"

namespace safegrid {

/// Ground-truth reward and safety fields, indexed by grid state index.
/// Reward values lie in (0, r_max]; safety values are finite reals.
struct EnvironmentTruth {
    std::vector<double> reward;
    std::vector<double> safety;
    double r_max = 1.0;
    std::uint64_t seed = 0;

    double reward_at(const GridWorld& world, State s) const {
        return reward[world.index(s)];
    }
    double safety_at(const GridWorld& world, State s) const {
        return safety[world.index(s)];
    }
};

/// One noisy measurement of both functions at a state.
struct Observation {
    State state;
    double reward_sample = 0.0;
    double safety_sample = 0.0;
};

/// Standard deviations of the additive Gaussian observation noise.
/// Zero means exact readings (and no RNG consumption).
struct ObservationNoise {
    double sigma_r = 0.0;
    double sigma_g = 0.0;
};

/// One exact draw from the zero-mean GP prior over all grid states,
/// via a dense Cholesky factorization with a jitter ladder.
std::vector<double> sample_gp_field(const GridWorld& world,
                                    const Kernel& kernel,
                                    std::mt19937_64& rng);

/// Affine rescale in place: the minimum maps to 0.01*r_max and the
/// maximum to r_max (a constant field maps to r_max everywhere).
void rescale_reward_field(std::vector<double>& field, double r_max);

/// Draws both ground-truth fields from zero-mean GP priors over the full
/// grid via a dense Cholesky factorization, then rescales the reward
/// affinely so its minimum maps to 0.01*r_max and its maximum to r_max.
/// Deterministic given the seed (reward field drawn first, then safety).
EnvironmentTruth sample_gp_environment(const GridWorld& world,
                                       const Kernel& kernel_r,
                                       const Kernel& kernel_g,
                                       std::uint64_t seed, double r_max);

/// Measurements at `s` and each distinct in-grid 4-neighbor, in action
/// order (stay, up, right, down, left) with boundary duplicates removed.
std::vector<Observation> observe(const EnvironmentTruth& env,
                                 const GridWorld& world, State s,
                                 const ObservationNoise& noise,
                                 std::mt19937_64& rng);

/// Largest |Δf|/d over 4-neighbor pairs: the steepest single-step slope
/// of a per-state field.
double max_adjacent_slope(const GridWorld& world,
                          const std::vector<double>& values);

/// Largest |Δf|/d over all state pairs: the field's true Lipschitz
/// constant with respect to the Euclidean grid metric. The adjacent-pair
/// maximum underestimates this (diagonal separations are shorter in
/// Euclidean distance than any grid path), so safety certification must
/// use this bound.
double euclidean_lipschitz_bound(const GridWorld& world,
                                 const std::vector<double>& values);

/// Flat snapshot of the true fields, columns: x, y, reward, safety.
void write_environment_snapshot(std::ostream& out, const GridWorld& world,
                                const EnvironmentTruth& env);

}  // namespace safegrid
