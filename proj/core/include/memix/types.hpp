#pragma once

#include <cstdint>

namespace memix {

using Vpn = std::uint64_t;
using Pc = std::uint64_t;
using Token = std::uint32_t;
using Nanos = std::uint64_t;

inline constexpr std::uint32_t kDefaultVocab = 64;
inline constexpr std::uint8_t kDefaultPageSizeBits = 12;

}  // namespace memix
