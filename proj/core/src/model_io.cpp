#include <cmath>
#include <string>

#include "binio.hpp"
#include "memix/error.hpp"
#include "memix/io.hpp"
#include "memix/model.hpp"

namespace memix {

namespace {

constexpr std::string_view kMagic = "MXW1";
constexpr std::uint8_t kVersion = 1;

template <typename Weights, typename Fn>
void for_each_array(Weights& w, Fn&& fn) {
  fn(w.addr_embed);
  fn(w.pc_embed);
  for (auto& l : w.layers) {
    fn(l.w_q);
    fn(l.w_k);
    fn(l.w_v);
    fn(l.w_o);
    fn(l.ffn_in);
    fn(l.ffn_out);
  }
  fn(w.head);
}

}  // namespace

std::vector<std::uint8_t> encode_weights(const ModelConfig& config, const ModelWeights& weights) {
  // Constructing the model validates shapes and finiteness.
  RetentionModel checked(config, weights);
  if (config.layers() > 255 || config.vocab > 0xffff || config.hidden > 0xffff || config.ffn_mult > 0xffff) {
    throw ConfigError("model dimensions exceed the MXW1 header fields");
  }

  detail::ByteWriter w;
  w.reserve(12 + 4 * config.layers() + 4 * config.parameter_count());
  w.put_bytes(kMagic);
  w.put_u8(kVersion);
  w.put_u8(static_cast<std::uint8_t>(config.layers()));
  w.put_u16(static_cast<std::uint16_t>(config.vocab));
  w.put_u16(static_cast<std::uint16_t>(config.hidden));
  w.put_u16(static_cast<std::uint16_t>(config.ffn_mult));
  for (float g : config.decay) w.put_f32(g);
  for_each_array(checked.weights(), [&](const std::vector<float>& a) {
    for (float x : a) w.put_f32(x);
  });
  return std::move(w).take();
}

LoadedModel decode_weights(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (!r.starts_with(kMagic)) throw FormatError(FormatErrc::bad_magic, "expected MXW1 header");
  r.skip(kMagic.size());
  const auto version = r.u8();
  if (version != kVersion) {
    throw FormatError(FormatErrc::unsupported_version, "weights version " + std::to_string(version));
  }

  LoadedModel m;
  const auto layers = r.u8();
  m.config.vocab = r.u16();
  m.config.hidden = r.u16();
  m.config.ffn_mult = r.u16();
  m.config.decay.resize(layers);
  for (auto& g : m.config.decay) g = r.f32();
  try {
    m.config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(FormatErrc::shape_mismatch, e.what());
  }

  const auto expect = 4 * m.config.parameter_count();
  if (r.remaining() < expect) {
    throw FormatError(FormatErrc::truncated, "expected " + std::to_string(m.config.parameter_count()) +
                                                 " parameters for this header");
  }
  if (r.remaining() > expect) throw FormatError(FormatErrc::trailing_data, "bytes after weight arrays");

  m.weights = ModelWeights::zeros(m.config);
  for_each_array(m.weights, [&](std::vector<float>& a) {
    for (auto& x : a) {
      x = r.f32();
      if (!std::isfinite(x)) throw FormatError(FormatErrc::non_finite, "weight is NaN or Inf");
    }
  });
  return m;
}

LoadedModel load_weights(const std::filesystem::path& path) {
  return decode_weights(read_file_bytes(path));
}

void save_weights(const ModelConfig& config, const ModelWeights& weights, const std::filesystem::path& path) {
  write_file_atomic(path, encode_weights(config, weights));
}

}  // namespace memix
