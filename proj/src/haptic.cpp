#include "nbci/haptic.hpp"

#include <algorithm>

namespace nbci {

HapticState haptic_step(const HapticState& state, const Command& cmd) {
    if (static_cast<std::int64_t>(cmd.sequence) <= state.last_seq) return state;
    HapticState next = state;
    next.last_seq = cmd.sequence;
    next.position_cm += cmd.direction * state.step_cm;
    next.position_cm = std::clamp(next.position_cm, state.min_cm, state.max_cm);
    return next;
}

} // namespace nbci
