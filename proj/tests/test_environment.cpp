#include <doctest.h>

#include <cmath>
#include <sstream>

#include "safegrid/environment.hpp"

using namespace safegrid;

namespace {
Kernel rbf(double lengthscale, double variance) {
    return {KernelFamily::rbf, lengthscale, variance};
}
}  // namespace

TEST_CASE("same seed reproduces identical fields") {
    GridWorld world(6, 6);
    const auto a = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 42, 1.0);
    const auto b = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 42, 1.0);
    CHECK(a.reward == b.reward);
    CHECK(a.safety == b.safety);
    const auto c = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 43, 1.0);
    CHECK(a.safety != c.safety);
}

TEST_CASE("reward rescaling lands in (0, r_max]") {
    GridWorld world(8, 8);
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const auto env =
            sample_gp_environment(world, rbf(2, 1), rbf(2, 1), seed, 2.5);
        double lo = env.reward[0], hi = env.reward[0];
        for (double v : env.reward) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo == doctest::Approx(0.025));
        CHECK(hi == doctest::Approx(2.5));
        CHECK(lo > 0.0);
    }
}

TEST_CASE("empirical covariance of safety draws matches the kernel") {
    // Monte-Carlo estimate over many seeds on a small grid.
    GridWorld world(5, 5);
    const Kernel k = rbf(2.0, 1.0);
    const State sa{1, 1}, sb{3, 2};
    const int ia = world.index(sa), ib = world.index(sb);
    const int n = 10000;
    double sum_a = 0, sum_b = 0, sum_ab = 0, sum_aa = 0;
    for (int seed = 0; seed < n; ++seed) {
        const auto env = sample_gp_environment(world, k, k, seed, 1.0);
        sum_a += env.safety[ia];
        sum_b += env.safety[ib];
        sum_ab += env.safety[ia] * env.safety[ib];
        sum_aa += env.safety[ia] * env.safety[ia];
    }
    const double cov_ab = sum_ab / n - (sum_a / n) * (sum_b / n);
    const double var_a = sum_aa / n - (sum_a / n) * (sum_a / n);
    CHECK(cov_ab ==
          doctest::Approx(kernel_eval(k, world, sa, sb)).epsilon(0.05));
    CHECK(var_a == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("noiseless observe returns the exact truth for the 5-cell cross") {
    GridWorld world(6, 6);
    const auto env = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 7, 1.0);
    std::mt19937_64 rng(0);
    const auto obs = observe(env, world, {3, 3}, {}, rng);
    REQUIRE(obs.size() == 5);
    for (const Observation& o : obs) {
        CHECK(o.reward_sample == env.reward_at(world, o.state));
        CHECK(o.safety_sample == env.safety_at(world, o.state));
    }
}

TEST_CASE("corner observation deduplicates to 3 cells") {
    GridWorld world(6, 6);
    const auto env = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 7, 1.0);
    std::mt19937_64 rng(0);
    const auto obs = observe(env, world, {0, 0}, {}, rng);
    REQUIRE(obs.size() == 3);
    CHECK(obs[0].state == State{0, 0});
    CHECK(obs[1].state == State{0, 1});
    CHECK(obs[2].state == State{1, 0});
}

TEST_CASE("safety observation noise has the configured scale") {
    GridWorld world(4, 4);
    const auto env = sample_gp_environment(world, rbf(2, 1), rbf(2, 1), 3, 1.0);
    ObservationNoise noise;
    noise.sigma_g = 0.075;
    std::mt19937_64 rng(11);
    const State s{1, 1};
    const double truth = env.safety_at(world, s);
    const int n = 10000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const auto obs = observe(env, world, s, noise, rng);
        const double v = obs[0].safety_sample - truth;
        sum += v;
        sum2 += v * v;
    }
    const double stddev = std::sqrt(sum2 / n - (sum / n) * (sum / n));
    CHECK(stddev == doctest::Approx(0.075).epsilon(0.05));
}

TEST_CASE("max_adjacent_slope picks the steepest neighbor pair") {
    GridWorld world(3, 2, 2.0);
    // row 0: 0 1 5 ; row 1: 0 1 9
    std::vector<double> f = {0, 1, 5, 0, 1, 9};
    CHECK(max_adjacent_slope(world, f) == doctest::Approx(8.0 / 2.0));
}

TEST_CASE("euclidean lipschitz bound dominates the adjacent-pair slope") {
    GridWorld world(2, 2, 1.0);
    // Diagonal pair differs by 2 over sqrt(2): steeper in the Euclidean
    // metric than any adjacent pair.
    std::vector<double> f = {0, 1, 1, 2};
    CHECK(max_adjacent_slope(world, f) == doctest::Approx(1.0));
    CHECK(euclidean_lipschitz_bound(world, f) ==
          doctest::Approx(2.0 / std::sqrt(2.0)));
    // The bound certifies: |f(s) - f(s')| <= L * d(s, s') for all pairs.
    const double L = euclidean_lipschitz_bound(world, f);
    for (int i = 0; i < world.size(); ++i) {
        for (int j = 0; j < world.size(); ++j) {
            if (i == j) continue;
            CHECK(std::abs(f[i] - f[j]) <=
                  L * world.distance(world.state(i), world.state(j)) + 1e-12);
        }
    }
}

TEST_CASE("environment snapshot stream has the fixed column order") {
    GridWorld world(2, 1);
    EnvironmentTruth env;
    env.reward = {0.25, 1.0};
    env.safety = {0.5, -0.5};
    std::ostringstream out;
    write_environment_snapshot(out, world, env);
    CHECK(out.str() == "x,y,reward,safety\n0,0,0.25,0.5\n1,0,1,-0.5\n");
}
