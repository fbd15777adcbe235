#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "safegrid/errors.hpp"
#include "oracles.hpp"
#include "safegrid/planning.hpp"

using namespace safegrid;

namespace {

StateSet make_set(const GridWorld& world, std::initializer_list<State> states) {
    StateSet out(world.size());
    for (State s : states) out.insert(world.index(s));
    return out;
}

}  // namespace

TEST_CASE("single absorbing state solves to r over 1 minus gamma") {
    GridWorld world(1, 1);
    MdpView view;
    view.world = world;
    view.admissible = make_set(world, {{0, 0}});
    view.reward = {0.7};
    view.discount = 0.9;
    const auto sol = value_iteration(view, 1e-9);
    CHECK(sol.value[0] == doctest::Approx(7.0).epsilon(1e-6));
    CHECK(sol.policy[0] == Action::stay);
    CHECK(sol.residual < 1e-9);
}

TEST_CASE("two-state chain matches the hand fixed point") {
    GridWorld world(2, 1);
    MdpView view;
    view.world = world;
    view.admissible = make_set(world, {{0, 0}, {1, 0}});
    view.reward = {0.0, 1.0};
    view.discount = 0.9;
    const auto sol = value_iteration(view, 1e-10, 10000);
    CHECK(sol.value[0] == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(sol.value[1] == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(sol.policy[0] == Action::right);
}

TEST_CASE("zero survival probability kills all value") {
    GridWorld world(3, 1);
    MdpView view;
    view.world = world;
    view.admissible = make_set(world, {{0, 0}, {1, 0}, {2, 0}});
    view.reward = {1.0, 2.0, 3.0};
    view.discount = 0.9;
    view.survival = std::vector<double>(world.size(), 0.0);
    const auto sol = value_iteration(view);
    for (int s = 0; s < 3; ++s) CHECK(sol.value[s] == 0.0);
}

TEST_CASE("sup-norm deltas contract at rate gamma") {
    GridWorld world(4, 4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MdpView view;
    view.world = world;
    view.admissible = StateSet(world.size());
    view.reward.resize(world.size());
    for (int s = 0; s < world.size(); ++s) {
        if (unit(rng) < 0.7) view.admissible.insert(s);
        view.reward[s] = unit(rng);
    }
    view.admissible.insert(0);
    view.discount = 0.93;

    std::vector<double> v(world.size(), 0.0);
    double prev_delta = -1.0;
    for (int k = 0; k < 60; ++k) {
        auto [next, delta] = bellman_backup(view, v);
        v = std::move(next);
        if (prev_delta >= 0.0) {
            CHECK(delta <= view.discount * prev_delta + 1e-12);
        }
        prev_delta = delta;
    }
}

TEST_CASE("stored policy reproduces the maximizing backup") {
    GridWorld world(3, 3);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MdpView view;
    view.world = world;
    view.admissible = StateSet(world.size());
    view.reward.resize(world.size());
    for (int s = 0; s < world.size(); ++s) {
        view.admissible.insert(s);
        view.reward[s] = unit(rng);
    }
    view.discount = 0.8;
    const auto sol = value_iteration(view, 1e-10);
    for (int s = 0; s < world.size(); ++s) {
        const State st = world.state(s);
        const int chosen = world.index(world.transition(st, sol.policy[s]));
        const double chosen_q =
            view.reward[chosen] + view.discount * sol.value[chosen];
        for (Action a : kAllActions) {
            const int sp = world.index(world.transition(st, a));
            CHECK(chosen_q >=
                  view.reward[sp] + view.discount * sol.value[sp] - 1e-8);
        }
    }
}

TEST_CASE("non-convergence raises with the residual attached") {
    GridWorld world(1, 1);
    MdpView view;
    view.world = world;
    view.admissible = make_set(world, {{0, 0}});
    view.reward = {1.0};
    view.discount = 0.99;
    CHECK_THROWS_AS(value_iteration(view, 1e-12, 3), NonConvergenceError);
    try {
        value_iteration(view, 1e-12, 3);
    } catch (const NonConvergenceError& e) {
        CHECK(e.iterations == 3);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("value iteration matches policy enumeration on fuzzed views") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double gammas[4] = {0.0, 0.3, 0.6, 0.9};
    for (int trial = 0; trial < 100; ++trial) {
        GridWorld world(3, 2);
        MdpView view;
        view.world = world;
        view.admissible = StateSet(world.size());
        std::uniform_int_distribution<int> cell(0, world.size() - 1);
        const int n_adm = 1 + static_cast<int>(unit(rng) * 6);
        for (int i = 0; i < n_adm; ++i) view.admissible.insert(cell(rng));
        view.reward.resize(world.size());
        for (auto& r : view.reward) r = -1.0 + 2.0 * unit(rng);
        view.discount = gammas[trial % 4];
        if (trial % 2 == 1) {
            std::vector<double> p(world.size());
            for (auto& v : p) v = unit(rng);
            view.survival = std::move(p);
        }

        const auto sol = value_iteration(view, 1e-10, 100000);
        const auto oracle = oracles::enumerate_policies(view);
        for (int s = 0; s < world.size(); ++s) {
            CHECK(std::abs(sol.value[s] - oracle[s]) < 1e-6);
        }
    }
}

TEST_CASE("optimistic reward adds the scaled bonus") {
    std::vector<Belief> beliefs = {{1.0, 0.5}, {0.2, 0.0}};
    const auto u = optimistic_reward(beliefs, 3.0);
    CHECK(u[0] == doctest::Approx(2.5));
    CHECK(u[1] == doctest::Approx(0.2));
    const auto u0 = optimistic_reward(beliefs, 0.0);
    CHECK(u0[0] == doctest::Approx(1.0));
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        CHECK(u[i] >= beliefs[i].mean);
    }
}

TEST_CASE("auxiliary reward takes the pessimistic branch inside X-") {
    GridWorld world(3, 1);
    const auto x_minus = make_set(world, {{0, 0}});
    const auto x_plus = make_set(world, {{0, 0}, {1, 0}});
    std::vector<Belief> beliefs(world.size(), Belief{1.0, 0.5});
    const auto r = es2_auxiliary_reward(beliefs, 3.0, x_minus, x_plus);
    CHECK(r[0] == doctest::Approx(-0.5));  // mu - alpha*sigma
    CHECK(r[1] == doctest::Approx(2.5));   // mu + alpha*sigma
    CHECK(r[2] == 0.0);                    // outside X+

    for (auto& b : beliefs) b.std = 0.0;
    const auto flat = es2_auxiliary_reward(beliefs, 3.0, x_minus, x_plus);
    CHECK(flat[0] == doctest::Approx(1.0));
    CHECK(flat[1] == doctest::Approx(1.0));
}

TEST_CASE("es2 stops when the optimistic space adds nothing") {
    GridWorld world(3, 3);
    const auto x = make_set(world, {{0, 0}, {1, 0}});
    std::vector<Belief> beliefs(world.size(), Belief{0.5, 0.1});
    const auto res = es2_stop_check(world, x, x, beliefs, 3.0, 0.9, 1e-8);
    CHECK(res.stop);
    CHECK(is_subset(res.next_set, x));
}

TEST_CASE("a high-variance frontier keeps exploration alive") {
    GridWorld world(3, 1);
    const auto x_minus = make_set(world, {{0, 0}});
    const auto x_plus = make_set(world, {{0, 0}, {1, 0}});
    std::vector<Belief> beliefs(world.size(), Belief{0.5, 0.0});
    beliefs[world.index({1, 0})] = {0.5, 2.0};  // huge reward upside
    const auto res = es2_stop_check(world, x_minus, x_plus, beliefs, 3.0, 0.9,
                                    1e-8);
    CHECK(!res.stop);
    CHECK(res.next_set.contains(world.index({1, 0})));
}

TEST_CASE("myopic agent with a dull frontier stops") {
    GridWorld world(3, 1);
    const auto x_minus = make_set(world, {{0, 0}});
    const auto x_plus = make_set(world, {{0, 0}, {1, 0}});
    std::vector<Belief> beliefs(world.size());
    beliefs[0] = {0.9, 0.0};                    // r' inside = 0.9
    beliefs[world.index({1, 0})] = {0.1, 0.1};  // r' frontier = 0.4
    const auto res =
        es2_stop_check(world, x_minus, x_plus, beliefs, 3.0, 0.0, 1e-8);
    CHECK(res.stop);
}

TEST_CASE("survival probability hits the erfc anchors") {
    std::vector<Belief> beliefs = {
        {0.0, 1.0},    // mu = h
        {100.0, 1.0},  // far above
        {-100.0, 1.0}, // far below
        {1.0, 1.0},    // one sigma above
        {0.3, 0.0},    // degenerate, safe
        {-0.3, 0.0},   // degenerate, unsafe
    };
    const auto p = pes2_survival(beliefs, 0.0);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(1.0));
    CHECK(p[2] == doctest::Approx(0.0));
    CHECK(p[3] == doctest::Approx(oracles::normal_cdf(1.0)).epsilon(1e-9));
    CHECK(p[3] == doctest::Approx(0.8413).epsilon(1e-4));
    CHECK(p[4] == 1.0);
    CHECK(p[5] == 0.0);
}

TEST_CASE("survival is monotone in the mean and bounded in [0,1]") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double h = -1.0 + 2.0 * unit(rng);
        const double sigma = unit(rng) < 0.2 ? 0.0 : 0.01 + unit(rng);
        const double m1 = -2.0 + 4.0 * unit(rng);
        const double m2 = m1 + 2.0 * unit(rng);
        const auto p = pes2_survival({{m1, sigma}, {m2, sigma}}, h);
        CHECK(p[0] >= 0.0);
        CHECK(p[0] <= 1.0);
        CHECK(p[1] >= p[0] - 1e-12);
    }
}

TEST_CASE("pes2 equals es2 when survival is forced to one") {
    GridWorld world(3, 2);
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        StateSet x_minus(world.size()), x_plus(world.size());
        std::uniform_int_distribution<int> cell(0, world.size() - 1);
        x_minus.insert(cell(rng));
        for (int s = 0; s < world.size(); ++s) {
            if (unit(rng) < 0.5) x_plus.insert(s);
        }
        for (int s = 0; s < world.size(); ++s) {
            if (x_minus.contains(s)) x_plus.insert(s);
        }
        std::vector<Belief> beliefs_r(world.size());
        for (auto& b : beliefs_r) b = {-1.0 + 2.0 * unit(rng), unit(rng)};
        // sigma = 0 and mean above h everywhere -> p identically 1
        std::vector<Belief> beliefs_g(world.size(), Belief{5.0, 0.0});

        const auto a =
            es2_stop_check(world, x_minus, x_plus, beliefs_r, 3.0, 0.85, 1e-9);
        const auto b = pes2_stop_check(world, x_minus, x_plus, beliefs_r,
                                       beliefs_g, 3.0, 0.0, 0.85, 1e-9);
        CHECK(a.stop == b.stop);
        CHECK(a.next_set == b.next_set);
    }
}

TEST_CASE("a nearly-lethal frontier flips the decision to stop") {
    GridWorld world(3, 1);
    const auto x_minus = make_set(world, {{0, 0}});
    const auto x_plus = make_set(world, {{0, 0}, {1, 0}});
    std::vector<Belief> beliefs_r(world.size(), Belief{0.5, 0.0});
    beliefs_r[world.index({1, 0})] = {0.5, 0.4};  // modest upside

    std::vector<Belief> beliefs_g(world.size(), Belief{5.0, 0.0});
    const auto es2 =
        es2_stop_check(world, x_minus, x_plus, beliefs_r, 3.0, 0.9, 1e-9);
    CHECK(!es2.stop);

    // p(frontier) ~ 0.01: mu - h = -2.326 sigma.
    beliefs_g[world.index({1, 0})] = {-2.326, 1.0};
    const auto pes2 = pes2_stop_check(world, x_minus, x_plus, beliefs_r,
                                      beliefs_g, 3.0, 0.0, 0.9, 1e-9);
    CHECK(pes2.stop);
}

TEST_CASE("trivial and corridor paths") {
    GridWorld world(3, 1);
    StateSet safe(world.size());
    for (int s = 0; s < world.size(); ++s) safe.insert(s);
    CHECK(shortest_safe_path(world, safe, {1, 0}, {1, 0}).empty());
    const auto path = shortest_safe_path(world, safe, {0, 0}, {2, 0});
    CHECK(path == std::vector<Action>{Action::right, Action::right});
}

TEST_CASE("L-shaped safe region forces the long way around") {
    GridWorld world(4, 4);
    StateSet safe(world.size());
    for (int y = 0; y < 4; ++y) safe.insert(world.index({0, y}));
    for (int x = 0; x < 4; ++x) safe.insert(world.index({x, 3}));
    const auto path = shortest_safe_path(world, safe, {0, 0}, {3, 3});
    CHECK(path.size() == 6);

    // Exhaustive enumeration of all simple paths in the restricted graph.
    int best = 1 << 20;
    std::vector<int> stack = {world.index({0, 0})};
    std::vector<char> on_path(world.size(), 0);
    on_path[stack[0]] = 1;
    const int goal = world.index({3, 3});
    auto dfs = [&](auto&& self, int s, int depth) -> void {
        if (s == goal) {
            best = std::min(best, depth);
            return;
        }
        for (Action a : kAllActions) {
            const int t = world.index(world.transition(world.state(s), a));
            if (t == s || !safe.contains(t) || on_path[t]) continue;
            on_path[t] = 1;
            self(self, t, depth + 1);
            on_path[t] = 0;
        }
    };
    dfs(dfs, stack[0], 0);
    CHECK(static_cast<int>(path.size()) == best);
}

TEST_CASE("a disconnected goal raises the dedicated error") {
    GridWorld world(5, 1);
    StateSet safe(world.size());
    safe.insert(world.index({0, 0}));
    safe.insert(world.index({4, 0}));
    CHECK_THROWS_AS(shortest_safe_path(world, safe, {0, 0}, {4, 0}),
                    DisconnectedSafeSetError);
    CHECK_THROWS_AS(shortest_safe_path(world, safe, {1, 0}, {4, 0}),
                    std::invalid_argument);
}

TEST_CASE("path length matches min-plus distances on fuzzed safe sets") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> dim(2, 5);
    for (int trial = 0; trial < 120; ++trial) {
        GridWorld world(dim(rng), dim(rng));
        StateSet safe(world.size());
        for (int s = 0; s < world.size(); ++s) {
            if (unit(rng) < 0.6) safe.insert(s);
        }
        if (safe.empty()) safe.insert(0);
        const auto states = safe.to_vector();
        std::uniform_int_distribution<int> pick(0,
                                                static_cast<int>(states.size()) -
                                                    1);
        const int from = states[pick(rng)];
        const int to = states[pick(rng)];

        // Floyd-Warshall over the restricted graph.
        const int inf = 1 << 20;
        std::vector<std::vector<int>> d(world.size(),
                                        std::vector<int>(world.size(), inf));
        for (int s = 0; s < world.size(); ++s) {
            if (!safe.contains(s)) continue;
            d[s][s] = 0;
            for (Action a : kAllActions) {
                const int t = world.index(world.transition(world.state(s), a));
                if (safe.contains(t)) d[s][t] = std::min(d[s][t], t == s ? 0 : 1);
            }
        }
        for (int k = 0; k < world.size(); ++k) {
            for (int i = 0; i < world.size(); ++i) {
                for (int j = 0; j < world.size(); ++j) {
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
                }
            }
        }

        if (d[from][to] >= inf) {
            CHECK_THROWS_AS(shortest_safe_path(world, safe, world.state(from),
                                               world.state(to)),
                            DisconnectedSafeSetError);
            continue;
        }
        const auto path =
            shortest_safe_path(world, safe, world.state(from), world.state(to));
        CHECK(static_cast<int>(path.size()) == d[from][to]);
        State pos = world.state(from);
        for (Action a : path) {
            pos = world.transition(pos, a);
            CHECK(safe.contains(world.index(pos)));
        }
        CHECK(world.index(pos) == to);
    }
}
