#pragma once

#include <string>
#include <string_view>

#include "nbci/errors.hpp"

namespace nbci {

/// The three mental tasks. RIGHT/LEFT are the imagined device movements,
/// REST is the baseline used as the negative class.
enum class TaskLabel { kRight, kLeft, kRest };

/// Experimental condition: pure motor imagery, or action observation
/// combined with motor imagery.
enum class Condition { kMi, kAomi };

constexpr std::string_view to_string(TaskLabel l) noexcept {
    switch (l) {
        case TaskLabel::kRight: return "RIGHT";
        case TaskLabel::kLeft: return "LEFT";
        case TaskLabel::kRest: return "REST";
    }
    return "?";
}

constexpr std::string_view to_string(Condition c) noexcept {
    switch (c) {
        case Condition::kMi: return "MI";
        case Condition::kAomi: return "AOMI";
    }
    return "?";
}

inline TaskLabel task_label_from_string(std::string_view s) {
    if (s == "RIGHT") return TaskLabel::kRight;
    if (s == "LEFT") return TaskLabel::kLeft;
    if (s == "REST") return TaskLabel::kRest;
    throw DataError("unknown task label '" + std::string(s) + "'");
}

inline Condition condition_from_string(std::string_view s) {
    if (s == "MI") return Condition::kMi;
    if (s == "AOMI") return Condition::kAomi;
    throw DataError("unknown condition '" + std::string(s) + "'");
}

/// Class convention used throughout: task (RIGHT or LEFT) maps to +1,
/// REST maps to -1.
constexpr int class_sign(TaskLabel l) noexcept {
    return l == TaskLabel::kRest ? -1 : +1;
}

} // namespace nbci
