#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <system_error>

#include "memix/error.hpp"
#include "memix/io.hpp"

namespace memix {

const char* to_string(FormatErrc code) noexcept {
  switch (code) {
    case FormatErrc::bad_magic: return "bad magic";
    case FormatErrc::unsupported_version: return "unsupported version";
    case FormatErrc::truncated: return "truncated";
    case FormatErrc::trailing_data: return "trailing data";
    case FormatErrc::shape_mismatch: return "shape mismatch";
    case FormatErrc::bad_field: return "bad field";
    case FormatErrc::non_finite: return "non-finite value";
  }
  return "unknown format error";
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

namespace {

std::filesystem::path temp_sibling(const std::filesystem::path& path) {
  std::random_device rd;
  auto name = path.filename().string() + ".tmp" + std::to_string(rd());
  return path.parent_path() / name;
}

void write_raw_atomic(const std::filesystem::path& path, const char* data, std::size_t n) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp.string());
    out.write(data, static_cast<std::streamsize>(n));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  write_raw_atomic(path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_raw_atomic(path, text.data(), text.size());
}

}  // namespace memix
