#include <doctest.h>

#include <sstream>

#include "safegrid/trajectory.hpp"

using namespace safegrid;

namespace {

TrajectoryLog sample_log() {
    TrajectoryLog log;
    log.meta.method = "oracle";
    log.meta.seed = 9;
    log.meta.width = 3;
    log.meta.height = 2;
    log.meta.cell_size = 1.0;
    log.meta.threshold = -0.25;
    log.meta.discount = 0.5;
    log.meta.start = State{0, 0};
    for (int t = 1; t <= 4; ++t) {
        StepRecord s;
        s.t = t;
        s.state = {t % 3, 0};
        s.action = Action::right;
        s.phase = t <= 2 ? Phase::explore_safety : Phase::optimize_reward;
        s.reward = 1.0;
        s.safety = t == 3 ? -0.5 : 0.5;
        s.unsafe = s.safety < log.meta.threshold;
        s.x_minus_size = t;
        s.x_plus_size = t + 1;
        s.expander_count = 1;
        s.max_width = 0.5;
        log.steps.push_back(s);
    }
    log.finalize_summary();
    return log;
}

}  // namespace

TEST_CASE("summary derives from the step stream") {
    const auto log = sample_log();
    CHECK(log.summary.total_steps == 4);
    CHECK(log.summary.transitioned);
    CHECK(log.summary.t_transition == 3);
    CHECK(log.summary.unsafe_actions == 1);
    // discounted: 1 + 0.5 + 0.25 + 0.125
    CHECK(log.summary.cum_discounted == doctest::Approx(1.875));
    CHECK(log.summary.cum_reward == doctest::Approx(4.0));
    CHECK(log.summary.cum_reward_explore == doctest::Approx(2.0));
    CHECK(log.summary.cum_reward_optimize == doctest::Approx(2.0));
    CHECK(log.summary.cum_discounted_explore == doctest::Approx(1.5));
    CHECK(log.summary.cum_discounted_optimize == doctest::Approx(0.375));
    CHECK(log.summary.trailing50_final == doctest::Approx(1.0));
    CHECK(log.summary.final_state == State{1, 0});
}

TEST_CASE("a run with no optimize phase reports t_transition = total steps") {
    auto log = sample_log();
    for (auto& s : log.steps) s.phase = Phase::explore_safety;
    log.finalize_summary();
    CHECK(!log.summary.transitioned);
    CHECK(log.summary.t_transition == log.summary.total_steps);
}

TEST_CASE("ndjson round-trips exactly") {
    const auto log = sample_log();
    std::ostringstream out;
    log.write_ndjson(out);

    std::istringstream in(out.str());
    const auto back = TrajectoryLog::read_ndjson(in, "mem");
    CHECK(back.meta.method == log.meta.method);
    CHECK(back.meta.seed == log.meta.seed);
    CHECK(back.meta.schema_version == kLogSchemaVersion);
    REQUIRE(back.steps.size() == log.steps.size());
    for (std::size_t i = 0; i < log.steps.size(); ++i) {
        CHECK(back.steps[i].t == log.steps[i].t);
        CHECK(back.steps[i].state == log.steps[i].state);
        CHECK(back.steps[i].action == log.steps[i].action);
        CHECK(back.steps[i].phase == log.steps[i].phase);
        CHECK(back.steps[i].reward == log.steps[i].reward);
        CHECK(back.steps[i].unsafe == log.steps[i].unsafe);
    }
    CHECK(back.summary.cum_discounted == log.summary.cum_discounted);
    CHECK(back.summary.t_transition == log.summary.t_transition);

    std::ostringstream again;
    back.write_ndjson(again);
    CHECK(again.str() == out.str());
}

TEST_CASE("malformed logs name the source and line") {
    std::istringstream bad("{\"record\":\"meta\"");
    try {
        TrajectoryLog::read_ndjson(bad, "runs/x.jsonl");
        FAIL("expected parse failure");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("runs/x.jsonl:1") != std::string::npos);
    }

    std::istringstream missing("{\"record\":\"step\",\"t\":1}\n");
    try {
        TrajectoryLog::read_ndjson(missing, "runs/y.jsonl");
        FAIL("expected parse failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("runs/y.jsonl:1") !=
              std::string::npos);
    }

    std::istringstream empty("");
    CHECK_THROWS_WITH_AS(TrajectoryLog::read_ndjson(empty, "z"),
                         doctest::Contains("meta"), std::runtime_error);
}

TEST_CASE("trailing average uses at most the last 50 steps") {
    std::vector<StepRecord> steps;
    for (int t = 1; t <= 120; ++t) {
        StepRecord s;
        s.t = t;
        s.reward = t <= 70 ? 0.0 : 1.0;
        steps.push_back(s);
    }
    CHECK(trailing_average_reward(steps, 120) == doctest::Approx(1.0));
    CHECK(trailing_average_reward(steps, 70) == doctest::Approx(0.0));
    CHECK(trailing_average_reward(steps, 95) == doctest::Approx(0.5));
    CHECK(trailing_average_reward(steps, 10) == doctest::Approx(0.0));
    CHECK(trailing_average_reward({}, 10) == 0.0);
}
