#pragma once

#include <cstdint>

namespace banksim {

using cycle_t = uint64_t;

// Sentinel for "no upcoming event".
inline constexpr cycle_t kNever = ~cycle_t(0);

// 64-byte cache-line granularity used throughout the model.
inline constexpr uint32_t kLineBytes = 64;
inline constexpr uint32_t kLineShift = 6;

}  // namespace banksim
