#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "memix/types.hpp"

namespace memix {

// Shape of the tiny retention network. The number of layers is the number
// of decay values.
struct ModelConfig {
  std::uint32_t vocab = kDefaultVocab;
  std::uint32_t hidden = 8;
  std::uint32_t ffn_mult = 2;
  std::vector<float> decay{1.0f - 1.0f / 32.0f, 1.0f - 1.0f / 64.0f};

  std::size_t layers() const noexcept { return decay.size(); }
  std::size_t ffn_dim() const noexcept { return std::size_t{ffn_mult} * hidden; }
  std::size_t parameter_count() const noexcept;

  // Throws ConfigError. Decay 0 is accepted and disables the recurrence.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Matrices are row-major with shape (in, out) and applied as x * W.
struct LayerWeights {
  std::vector<float> w_q;      // hidden x hidden
  std::vector<float> w_k;      // hidden x hidden
  std::vector<float> w_v;      // hidden x hidden
  std::vector<float> w_o;      // hidden x hidden
  std::vector<float> ffn_in;   // hidden x ffn_dim
  std::vector<float> ffn_out;  // ffn_dim x hidden

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct ModelWeights {
  std::vector<float> addr_embed;  // vocab x hidden
  std::vector<float> pc_embed;    // vocab x hidden
  std::vector<LayerWeights> layers;
  std::vector<float> head;  // hidden x vocab

  std::size_t parameter_count() const noexcept;

  static ModelWeights zeros(const ModelConfig& cfg);
  // Uniform in [-scale, scale], deterministic per seed.
  static ModelWeights random(const ModelConfig& cfg, std::uint64_t seed, float scale = 0.5f);

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

struct TokenPair {
  Token addr = 0;
  Token pc = 0;

  friend bool operator==(const TokenPair&, const TokenPair&) = default;
};

// Per-layer hidden x hidden retention matrices plus the token counter. The
// recurrence is carried in double so long streams do not drift from the
// whole-sequence form. Single owner; copy it to fork a speculative branch.
class RecurrentState {
 public:
  RecurrentState() = default;

  std::uint64_t token_count() const noexcept { return tokens_; }
  std::size_t layers() const noexcept { return layers_; }
  std::span<const double> layer(std::size_t l) const;
  std::span<double> layer(std::size_t l);

  void clear() noexcept;

  friend bool operator==(const RecurrentState& a, const RecurrentState& b) {
    return a.tokens_ == b.tokens_ && a.layers_ == b.layers_ && a.retention_ == b.retention_;
  }

 private:
  friend class RetentionModel;

  std::vector<double> retention_;
  std::size_t layers_ = 0;
  std::size_t cell_ = 0;  // hidden * hidden
  std::uint64_t tokens_ = 0;
  // Per-step buffers; kept here so the shared model stays immutable.
  std::vector<double> scratch_;
};

// Immutable after construction; safe to share between threads. Each thread
// advances its own RecurrentState.
class RetentionModel {
 public:
  // Validates the config, weight shapes, and that every value is finite.
  RetentionModel(ModelConfig config, ModelWeights weights);

  const ModelConfig& config() const noexcept { return config_; }
  const ModelWeights& weights() const noexcept { return weights_; }
  std::uint32_t vocab() const noexcept { return config_.vocab; }

  RecurrentState initial_state() const;

  // E_addr[addr] + E_pc[pc]. Throws ContractViolation on out-of-range tokens.
  void embed(Token addr, Token pc, std::span<float> out) const;
  std::vector<float> embed(Token addr, Token pc) const;

  // Advances `state` by one token and writes vocab logits. O(layers * hidden^2)
  // independent of how many tokens the state has seen. Throws NumericError
  // if the logits are not finite.
  void step(RecurrentState& state, TokenPair tok, std::span<float> logits) const;
  std::vector<float> step(RecurrentState& state, TokenPair tok) const;

 private:
  void check_state(const RecurrentState& state) const;

  ModelConfig config_;
  ModelWeights weights_;
};

// Numeric building blocks of the forward step.
double gelu(double x) noexcept;
inline constexpr float kRmsEpsilon = 1e-6f;
void rms_normalize(std::span<const double> in, std::span<double> out) noexcept;

struct RankedOrdinal {
  std::uint32_t ordinal = 0;
  float probability = 0.0f;
};

// Softmax, then the n most probable ordinals; ties go to the lower ordinal.
std::vector<RankedOrdinal> predict_topn(std::span<const float> logits, std::size_t n);
std::vector<float> softmax(std::span<const float> logits);

// "MXW1" weights file.
struct LoadedModel {
  ModelConfig config;
  ModelWeights weights;
};

std::vector<std::uint8_t> encode_weights(const ModelConfig& config, const ModelWeights& weights);
LoadedModel decode_weights(std::span<const std::uint8_t> bytes);
LoadedModel load_weights(const std::filesystem::path& path);
void save_weights(const ModelConfig& config, const ModelWeights& weights, const std::filesystem::path& path);

struct LatencyStats {
  std::size_t samples = 0;
  double mean_ns = 0;
  double p50_ns = 0;
  double p99_ns = 0;
  double max_ns = 0;
};

// Times every forward step after `warmup` untimed steps on a fresh state.
LatencyStats bench_inference(const RetentionModel& model, std::span<const TokenPair> stream,
                             std::size_t warmup = 1000);

}  // namespace memix
