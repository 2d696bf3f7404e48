#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "memix/types.hpp"

namespace memix {

// One page-granular access (or fault): virtual page number plus the
// program counter of the access site. The pc is opaque.
struct AccessEvent {
  Vpn vpn = 0;
  Pc pc = 0;

  friend bool operator==(const AccessEvent&, const AccessEvent&) = default;
};

// A miss event carries the same fields; kept as a separate name for
// readability at call sites that only see faults.
using MissEvent = AccessEvent;

enum class TraceKind : std::uint8_t {
  full_access = 0,
  miss_log = 1,
};

const char* to_string(TraceKind kind) noexcept;

struct Trace {
  TraceKind kind = TraceKind::full_access;
  std::uint8_t page_size_bits = kDefaultPageSizeBits;
  // Local-memory fraction the miss log was collected at; 0 for full traces.
  float capacity_fraction = 0.0f;
  std::vector<AccessEvent> events;

  friend bool operator==(const Trace&, const Trace&) = default;

  // Largest representable vpn + 1 for this page size.
  std::uint64_t vpn_limit() const noexcept;
  // Number of distinct pages touched.
  std::size_t footprint() const;
};

// "MXT1" binary format. Header is 16 bytes, each record 16 bytes.
inline constexpr std::size_t kTraceHeaderBytes = 16;
inline constexpr std::size_t kTraceRecordBytes = 16;

std::vector<std::uint8_t> encode_trace(const Trace& trace);
Trace decode_trace(std::span<const std::uint8_t> bytes);

Trace load_trace(const std::filesystem::path& path);
void save_trace(const Trace& trace, const std::filesystem::path& path);

// Debug text form: "vpn,pc" header, hexadecimal values. Always loads as a
// full-access trace with the default page size.
Trace load_trace_csv(const std::filesystem::path& path);
void save_trace_csv(const Trace& trace, const std::filesystem::path& path);

}  // namespace memix
