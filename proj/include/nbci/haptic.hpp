#pragma once

#include <cstdint>

#include "nbci/protocol.hpp"

namespace nbci {

/// Simulated device pose along the driven workspace axis. The 27 cm axis
/// is centered at zero, so positions stay within [-13.5, +13.5] cm.
struct HapticState {
    double position_cm = 0.0;
    double step_cm = 1.0;
    double min_cm = -13.5;
    double max_cm = +13.5;
    std::int64_t last_seq = -1;  // -1: nothing applied yet

    bool operator==(const HapticState&) const = default;
};

/// Applies one command: +1 steps right, -1 steps left, 0 leaves the pose;
/// the result is clamped to the workspace. Commands whose sequence is not
/// newer than `last_seq` are replays and leave the state untouched.
HapticState haptic_step(const HapticState& state, const Command& cmd);

} // namespace nbci
