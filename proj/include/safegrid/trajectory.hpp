#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "safegrid/grid_world.hpp"

namespace safegrid {

constexpr int kLogSchemaVersion = 1;

enum class Phase { explore_safety, optimize_reward };

std::string phase_name(Phase p);
Phase phase_from_name(const std::string& name);

struct StepRecord {
    int t = 0;  // 1-based action index
    State state;  // state occupied after the action
    Action action = Action::stay;
    Phase phase = Phase::explore_safety;
    double reward = 0.0;
    double safety = 0.0;
    bool unsafe = false;  // safety < h
    int x_minus_size = 0;
    int x_plus_size = 0;
    int expander_count = 0;
    double max_width = 0.0;
};

struct RunMeta {
    int schema_version = kLogSchemaVersion;
    std::string method;
    std::uint64_t seed = 0;
    int width = 0;
    int height = 0;
    double cell_size = 1.0;
    double threshold = 0.0;
    double discount = 0.99;
    State start;
};

struct RunSummary {
    int total_steps = 0;
    int t_transition = 0;  // first optimize_reward step; total_steps if none
    bool transitioned = false;
    double cum_discounted = 0.0;
    double cum_reward = 0.0;  // undiscounted
    double cum_reward_explore = 0.0;
    double cum_reward_optimize = 0.0;
    double cum_discounted_explore = 0.0;
    double cum_discounted_optimize = 0.0;
    double trailing50_final = 0.0;
    int unsafe_actions = 0;
    State final_state;
};

/// Complete record of one run: a meta line, one line per step, and a
/// summary line, serialized as newline-delimited JSON.
struct TrajectoryLog {
    RunMeta meta;
    std::vector<StepRecord> steps;
    RunSummary summary;

    void write_ndjson(std::ostream& out) const;

    /// Parses a serialized log. Errors name `source_name` and the
    /// offending 1-based line.
    static TrajectoryLog read_ndjson(std::istream& in,
                                     const std::string& source_name);

    /// Derives the summary fields from meta and steps.
    void finalize_summary();
};

/// Mean reward over the trailing window (at most 50 steps) ending at
/// 1-based step t.
double trailing_average_reward(const std::vector<StepRecord>& steps, int t,
                               int window = 50);

}  // namespace safegrid
