#include "safegrid/trajectory.hpp"

#include <json.hpp>

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace safegrid {

using nlohmann::json;

std::string phase_name(Phase p) {
    return p == Phase::explore_safety ? "explore_safety" : "optimize_reward";
}

Phase phase_from_name(const std::string& name) {
    if (name == "explore_safety") return Phase::explore_safety;
    if (name == "optimize_reward") return Phase::optimize_reward;
    throw std::invalid_argument("unknown phase: " + name);
}

void TrajectoryLog::write_ndjson(std::ostream& out) const {
    json m{{"record", "meta"},
           {"schema_version", meta.schema_version},
           {"method", meta.method},
           {"seed", meta.seed},
           {"width", meta.width},
           {"height", meta.height},
           {"cell_size", meta.cell_size},
           {"threshold", meta.threshold},
           {"discount", meta.discount},
           {"start_x", meta.start.x},
           {"start_y", meta.start.y}};
    out << m.dump() << '\n';
    for (const StepRecord& s : steps) {
        json line{{"record", "step"},
                  {"t", s.t},
                  {"x", s.state.x},
                  {"y", s.state.y},
                  {"action", action_name(s.action)},
                  {"phase", phase_name(s.phase)},
                  {"reward", s.reward},
                  {"safety", s.safety},
                  {"unsafe", s.unsafe},
                  {"x_minus", s.x_minus_size},
                  {"x_plus", s.x_plus_size},
                  {"g", s.expander_count},
                  {"max_width", s.max_width}};
        out << line.dump() << '\n';
    }
    json sm{{"record", "summary"},
            {"total_steps", summary.total_steps},
            {"t_transition", summary.t_transition},
            {"transitioned", summary.transitioned},
            {"cum_discounted", summary.cum_discounted},
            {"cum_reward", summary.cum_reward},
            {"cum_reward_explore", summary.cum_reward_explore},
            {"cum_reward_optimize", summary.cum_reward_optimize},
            {"cum_discounted_explore", summary.cum_discounted_explore},
            {"cum_discounted_optimize", summary.cum_discounted_optimize},
            {"trailing50_final", summary.trailing50_final},
            {"unsafe_actions", summary.unsafe_actions},
            {"final_x", summary.final_state.x},
            {"final_y", summary.final_state.y}};
    out << sm.dump() << '\n';
}

TrajectoryLog TrajectoryLog::read_ndjson(std::istream& in,
                                         const std::string& source_name) {
    TrajectoryLog log;
    bool have_meta = false;
    bool have_summary = false;
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) -> void {
        throw std::runtime_error(source_name + ":" + std::to_string(line_no) +
                                 ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        try {
            const std::string record = j.at("record").get<std::string>();
            if (record == "meta") {
                log.meta.schema_version = j.at("schema_version").get<int>();
                if (log.meta.schema_version != kLogSchemaVersion) {
                    fail("unsupported schema_version " +
                         std::to_string(log.meta.schema_version));
                }
                log.meta.method = j.at("method").get<std::string>();
                log.meta.seed = j.at("seed").get<std::uint64_t>();
                log.meta.width = j.at("width").get<int>();
                log.meta.height = j.at("height").get<int>();
                log.meta.cell_size = j.at("cell_size").get<double>();
                log.meta.threshold = j.at("threshold").get<double>();
                log.meta.discount = j.at("discount").get<double>();
                log.meta.start = {j.at("start_x").get<int>(),
                                  j.at("start_y").get<int>()};
                have_meta = true;
            } else if (record == "step") {
                StepRecord s;
                s.t = j.at("t").get<int>();
                s.state = {j.at("x").get<int>(), j.at("y").get<int>()};
                s.action = action_from_name(j.at("action").get<std::string>());
                s.phase = phase_from_name(j.at("phase").get<std::string>());
                s.reward = j.at("reward").get<double>();
                s.safety = j.at("safety").get<double>();
                s.unsafe = j.at("unsafe").get<bool>();
                s.x_minus_size = j.at("x_minus").get<int>();
                s.x_plus_size = j.at("x_plus").get<int>();
                s.expander_count = j.at("g").get<int>();
                s.max_width = j.at("max_width").get<double>();
                log.steps.push_back(s);
            } else if (record == "summary") {
                RunSummary& sm = log.summary;
                sm.total_steps = j.at("total_steps").get<int>();
                sm.t_transition = j.at("t_transition").get<int>();
                sm.transitioned = j.at("transitioned").get<bool>();
                sm.cum_discounted = j.at("cum_discounted").get<double>();
                sm.cum_reward = j.at("cum_reward").get<double>();
                sm.cum_reward_explore = j.at("cum_reward_explore").get<double>();
                sm.cum_reward_optimize =
                    j.at("cum_reward_optimize").get<double>();
                sm.cum_discounted_explore =
                    j.at("cum_discounted_explore").get<double>();
                sm.cum_discounted_optimize =
                    j.at("cum_discounted_optimize").get<double>();
                sm.trailing50_final = j.at("trailing50_final").get<double>();
                sm.unsafe_actions = j.at("unsafe_actions").get<int>();
                sm.final_state = {j.at("final_x").get<int>(),
                                  j.at("final_y").get<int>()};
                have_summary = true;
            } else {
                fail("unknown record type '" + record + "'");
            }
        } catch (const json::exception& e) {
            fail(std::string("missing or mistyped field: ") + e.what());
        }
    }
    ++line_no;
    if (!have_meta) fail("log has no meta record");
    if (!have_summary) fail("log has no summary record");
    return log;
}

void TrajectoryLog::finalize_summary() {
    RunSummary& sm = summary;
    sm = RunSummary{};
    sm.total_steps = static_cast<int>(steps.size());
    sm.final_state = steps.empty() ? meta.start : steps.back().state;
    double discount_pow = 1.0;
    int first_optimize = 0;
    for (const StepRecord& s : steps) {
        const double d = discount_pow * s.reward;
        discount_pow *= meta.discount;
        sm.cum_discounted += d;
        sm.cum_reward += s.reward;
        if (s.phase == Phase::explore_safety) {
            sm.cum_reward_explore += s.reward;
            sm.cum_discounted_explore += d;
        } else {
            sm.cum_reward_optimize += s.reward;
            sm.cum_discounted_optimize += d;
            if (first_optimize == 0) first_optimize = s.t;
        }
        if (s.unsafe) ++sm.unsafe_actions;
    }
    sm.transitioned = first_optimize != 0;
    sm.t_transition = sm.transitioned ? first_optimize : sm.total_steps;
    sm.trailing50_final =
        trailing_average_reward(steps, sm.total_steps);
}

double trailing_average_reward(const std::vector<StepRecord>& steps, int t,
                               int window) {
    if (steps.empty() || t < 1) return 0.0;
    const int end = std::min<int>(t, static_cast<int>(steps.size()));
    const int begin = std::max(0, end - window);
    double sum = 0.0;
    for (int i = begin; i < end; ++i) sum += steps[i].reward;
    return sum / (end - begin);
}

}  // namespace safegrid
