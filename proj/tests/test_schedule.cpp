#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "safegrid/schedule.hpp"

using namespace safegrid;

TEST_CASE("fixed schedule returns its constant for every t") {
    ConfidenceSchedule s;
    s.mode = ScheduleMode::fixed;
    s.fixed_value = 2.0;
    for (int t : {1, 2, 10, 1000}) CHECK(confidence_scale(s, t) == 2.0);
}

TEST_CASE("theoretical schedule evaluates the closed form") {
    ConfidenceSchedule s;
    s.mode = ScheduleMode::theoretical;
    s.rkhs_bound = 1.0;
    s.noise_scale = 1.0;
    s.failure_probability = std::exp(-1.0);
    s.info_gain = {0.0};
    // B + sigma*sqrt(2*(Gamma_0 + 1 + log(1/Delta))) = 1 + sqrt(4) = 3
    CHECK(confidence_scale(s, 1) == doctest::Approx(3.0));
}

TEST_CASE("theoretical schedule is nondecreasing under nondecreasing gamma") {
    ConfidenceSchedule s;
    s.mode = ScheduleMode::theoretical;
    s.rkhs_bound = 0.5;
    s.noise_scale = 1.3;
    s.failure_probability = 0.05;
    s.info_gain = {0.0, 0.4, 1.1, 2.0, 2.0, 3.7};
    double prev = 0.0;
    for (int t = 1; t <= 10; ++t) {
        const double v = confidence_scale(s, t);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("invalid failure probability is a configuration error") {
    ConfidenceSchedule s;
    s.mode = ScheduleMode::theoretical;
    s.failure_probability = 1.5;
    CHECK_THROWS_AS(confidence_scale(s, 1), std::invalid_argument);
    s.failure_probability = 0.0;
    CHECK_THROWS_AS(confidence_scale(s, 1), std::invalid_argument);
}

TEST_CASE("sigma multiplier honors scale_is_squared") {
    ConfidenceSchedule s;
    s.mode = ScheduleMode::fixed;
    s.fixed_value = 4.0;
    CHECK(sigma_multiplier(s, 3) == doctest::Approx(4.0));
    s.scale_is_squared = true;
    CHECK(sigma_multiplier(s, 3) == doctest::Approx(2.0));
}

TEST_CASE("info gain of zero candidates is zero") {
    GridWorld world(3, 3);
    GpModel gp(world, {KernelFamily::rbf, 1.0, 1.0}, 0.1);
    CHECK(info_gain_estimate(gp, std::vector<int>{}) == 0.0);
}

TEST_CASE("info gain of a single candidate is the one-term formula") {
    GridWorld world(3, 3);
    const double v = 1.7, noise = 0.2;
    GpModel gp(world, {KernelFamily::rbf, 1.0, v}, noise);
    const double got = info_gain_estimate(gp, std::vector<int>{4});
    CHECK(got == doctest::Approx(0.5 * std::log(1.0 + v / noise)));
}

TEST_CASE("info gain requires positive noise variance") {
    GridWorld world(3, 3);
    GpModel gp(world, {KernelFamily::rbf, 1.0, 1.0}, 0.0);
    CHECK_THROWS_AS(info_gain_estimate(gp, std::vector<int>{0}),
                    std::invalid_argument);
}

TEST_CASE("greedy profile brackets the exhaustive subset optimum") {
    // 3-state chain: greedy_k must land within (1 - 1/e) of the best
    // size-k subset's mutual information and never exceed it.
    GridWorld world(3, 1);
    const Kernel k{KernelFamily::rbf, 1.2, 1.0};
    const double noise = 0.3;
    GpModel gp(world, k, noise);
    const std::vector<int> candidates = {0, 1, 2};
    const auto profile = info_gain_profile(gp, candidates);
    REQUIRE(profile.size() == 3);

    Eigen::Matrix3d K;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            K(i, j) = kernel_eval(k, world, world.state(i), world.state(j));
        }
    }
    auto mi_of_subset = [&](const std::vector<int>& subset) {
        const int m = static_cast<int>(subset.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                A(i, j) += K(subset[i], subset[j]) / noise;
            }
        }
        return 0.5 * std::log(A.determinant());
    };

    const std::vector<std::vector<std::vector<int>>> subsets_by_size = {
        {{0}, {1}, {2}},
        {{0, 1}, {0, 2}, {1, 2}},
        {{0, 1, 2}}};
    for (int kk = 1; kk <= 3; ++kk) {
        double best = 0.0;
        for (const auto& subset : subsets_by_size[kk - 1]) {
            best = std::max(best, mi_of_subset(subset));
        }
        const double greedy = profile[kk - 1];
        CHECK(greedy <= best + 1e-9);
        CHECK(greedy >= (1.0 - std::exp(-1.0)) * best - 1e-9);
    }
}
