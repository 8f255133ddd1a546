#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "feedctl/errors.hpp"

namespace feedctl {

// Two-threshold feeding rule with an oversupply cutoff on the windowed count.
struct ControlConfig {
    double act_on = 0.0;
    double act_off = 0.0;
    long long count_max = 0;
    int window = 20;

    void validate() const {
        if (!std::isfinite(act_on) || !std::isfinite(act_off)) throw ConfigError("activity thresholds must be finite");
        if (act_off > act_on) throw ConfigError("act_off must not exceed act_on");
        if (count_max < 0) throw ConfigError("count_max must be >= 0");
        if (window < 1) throw ConfigError("window must be >= 1");
    }
};

enum class DecisionReason { Startup, ActivityLow, ActivityHigh, Oversupply };

inline std::string_view to_string(DecisionReason r) {
    switch (r) {
        case DecisionReason::Startup: return "startup";
        case DecisionReason::ActivityLow: return "activity_low";
        case DecisionReason::ActivityHigh: return "activity_high";
        case DecisionReason::Oversupply: return "oversupply";
    }
    return "unknown";
}

struct ControlState {
    bool feeding = false;
    DecisionReason reason = DecisionReason::Startup;
};

struct ControlDecision {
    std::int64_t frame = 0;
    bool feeding = false;
    long long windowed_count = 0;
    std::optional<double> windowed_activity;
    DecisionReason reason = DecisionReason::Startup;
};

// Oversupply wins, then low activity, then high activity; inside the dead band
// (act_off, act_on) the previous state holds. Without an activity signal the
// rule runs on the count alone and activity never limits feeding.
inline ControlDecision control_decide(ControlState& state, std::int64_t frame, long long windowed_count,
                                      std::optional<double> windowed_activity, const ControlConfig& config) {
    if (windowed_count >= config.count_max) {
        state = {false, DecisionReason::Oversupply};
    } else if (!windowed_activity) {
        state = {true, DecisionReason::ActivityHigh};
    } else if (*windowed_activity <= config.act_off) {
        state = {false, DecisionReason::ActivityLow};
    } else if (*windowed_activity >= config.act_on) {
        state = {true, DecisionReason::ActivityHigh};
    }
    return {frame, state.feeding, windowed_count, windowed_activity, state.reason};
}

}  // namespace feedctl
