#include "memix/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "binio.hpp"
#include "memix/error.hpp"
#include "memix/io.hpp"

namespace memix {

namespace {

constexpr std::string_view kMagic = "MXT1";
constexpr std::uint8_t kVersion = 1;

}  // namespace

const char* to_string(TraceKind kind) noexcept {
  return kind == TraceKind::miss_log ? "miss_log" : "full_access";
}

std::uint64_t Trace::vpn_limit() const noexcept {
  return page_size_bits == 0 ? ~std::uint64_t{0} : std::uint64_t{1} << (64 - page_size_bits);
}

std::size_t Trace::footprint() const {
  std::unordered_set<Vpn> pages;
  pages.reserve(events.size());
  for (const auto& e : events) pages.insert(e.vpn);
  return pages.size();
}

std::vector<std::uint8_t> encode_trace(const Trace& trace) {
  detail::ByteWriter w;
  w.reserve(kTraceHeaderBytes + trace.events.size() * kTraceRecordBytes);
  w.put_bytes(kMagic);
  w.put_u8(kVersion);
  w.put_u8(static_cast<std::uint8_t>(trace.kind));
  w.put_u8(trace.page_size_bits);
  w.put_u8(0);
  w.put_f32(trace.kind == TraceKind::full_access ? 0.0f : trace.capacity_fraction);
  w.put_u32(0);
  for (const auto& e : trace.events) {
    w.put_u64(e.vpn);
    w.put_u64(e.pc);
  }
  return std::move(w).take();
}

Trace decode_trace(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (!r.starts_with(kMagic)) throw FormatError(FormatErrc::bad_magic, "expected MXT1 header");
  r.skip(kMagic.size());

  const auto version = r.u8();
  if (version != kVersion) {
    throw FormatError(FormatErrc::unsupported_version, "trace version " + std::to_string(version));
  }
  Trace t;
  const auto kind = r.u8();
  if (kind > 1) throw FormatError(FormatErrc::bad_field, "trace kind " + std::to_string(kind));
  t.kind = static_cast<TraceKind>(kind);
  t.page_size_bits = r.u8();
  if (t.page_size_bits >= 64) throw FormatError(FormatErrc::bad_field, "page_size_bits out of range");
  r.u8();
  t.capacity_fraction = r.f32();
  r.u32();
  if (t.kind == TraceKind::miss_log && !(t.capacity_fraction > 0.0f && t.capacity_fraction <= 1.0f)) {
    throw FormatError(FormatErrc::bad_field, "miss log capacity_fraction must be in (0,1]");
  }

  if (r.remaining() % kTraceRecordBytes != 0) {
    throw FormatError(FormatErrc::truncated, "partial record at end of trace");
  }
  const auto limit = t.vpn_limit();
  t.events.resize(r.remaining() / kTraceRecordBytes);
  for (auto& e : t.events) {
    e.vpn = r.u64();
    e.pc = r.u64();
    if (e.vpn >= limit) throw FormatError(FormatErrc::bad_field, "vpn exceeds address space");
  }
  return t;
}

Trace load_trace(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_trace(bytes);
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  const auto bytes = encode_trace(trace);
  write_file_atomic(path, bytes);
}

namespace {

std::uint64_t parse_hex(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.starts_with("0x") || s.starts_with("0X")) s.remove_prefix(2);
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw FormatError(FormatErrc::bad_field, "line " + std::to_string(line) + ": bad hex value");
  }
  return v;
}

}  // namespace

Trace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("vpn,pc", 0) != 0) {
    throw FormatError(FormatErrc::bad_magic, "expected 'vpn,pc' header");
  }
  Trace t;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw FormatError(FormatErrc::bad_field, "line " + std::to_string(lineno) + ": missing comma");
    }
    std::string_view sv(line);
    AccessEvent e{parse_hex(sv.substr(0, comma), lineno), parse_hex(sv.substr(comma + 1), lineno)};
    if (e.vpn >= t.vpn_limit()) throw FormatError(FormatErrc::bad_field, "vpn exceeds address space");
    t.events.push_back(e);
  }
  return t;
}

void save_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "vpn,pc\n" << std::hex;
  for (const auto& e : trace.events) out << "0x" << e.vpn << ",0x" << e.pc << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace memix
