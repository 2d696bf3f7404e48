#include "memix/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "memix/error.hpp"
#include "rng.hpp"

namespace memix {

std::size_t ModelConfig::parameter_count() const noexcept {
  const std::size_t d = hidden;
  const std::size_t k = vocab;
  const std::size_t per_layer = 4 * d * d + 2 * d * ffn_dim();
  return 2 * k * d + layers() * per_layer + d * k;
}

void ModelConfig::validate() const {
  if (vocab < 2) throw ConfigError("vocab must be at least 2");
  if (hidden < 1) throw ConfigError("hidden dimension must be positive");
  if (ffn_mult < 1) throw ConfigError("ffn_mult must be positive");
  if (decay.empty()) throw ConfigError("model needs at least one layer");
  for (float g : decay) {
    if (!(g >= 0.0f && g < 1.0f)) throw ConfigError("layer decay must lie in [0, 1)");
  }
}

std::size_t ModelWeights::parameter_count() const noexcept {
  std::size_t n = addr_embed.size() + pc_embed.size() + head.size();
  for (const auto& l : layers) {
    n += l.w_q.size() + l.w_k.size() + l.w_v.size() + l.w_o.size() + l.ffn_in.size() + l.ffn_out.size();
  }
  return n;
}

ModelWeights ModelWeights::zeros(const ModelConfig& cfg) {
  const std::size_t d = cfg.hidden, k = cfg.vocab, f = cfg.ffn_dim();
  ModelWeights w;
  w.addr_embed.assign(k * d, 0.0f);
  w.pc_embed.assign(k * d, 0.0f);
  w.layers.resize(cfg.layers());
  for (auto& l : w.layers) {
    l.w_q.assign(d * d, 0.0f);
    l.w_k.assign(d * d, 0.0f);
    l.w_v.assign(d * d, 0.0f);
    l.w_o.assign(d * d, 0.0f);
    l.ffn_in.assign(d * f, 0.0f);
    l.ffn_out.assign(f * d, 0.0f);
  }
  w.head.assign(d * k, 0.0f);
  return w;
}

ModelWeights ModelWeights::random(const ModelConfig& cfg, std::uint64_t seed, float scale) {
  auto w = zeros(cfg);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<float>& v) {
    for (auto& x : v) x = (2.0f * detail::uniform_unit(rng) - 1.0f) * scale;
  };
  fill(w.addr_embed);
  fill(w.pc_embed);
  for (auto& l : w.layers) {
    fill(l.w_q);
    fill(l.w_k);
    fill(l.w_v);
    fill(l.w_o);
    fill(l.ffn_in);
    fill(l.ffn_out);
  }
  fill(w.head);
  return w;
}

std::span<const double> RecurrentState::layer(std::size_t l) const {
  return std::span<const double>(retention_).subspan(l * cell_, cell_);
}

std::span<double> RecurrentState::layer(std::size_t l) {
  return std::span<double>(retention_).subspan(l * cell_, cell_);
}

void RecurrentState::clear() noexcept {
  std::fill(retention_.begin(), retention_.end(), 0.0);
  tokens_ = 0;
}

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752)); }

void rms_normalize(std::span<const double> in, std::span<double> out) noexcept {
  double ss = 0.0;
  for (double v : in) ss += v * v;
  const double inv = 1.0 / std::sqrt(ss / static_cast<double>(in.size()) + static_cast<double>(kRmsEpsilon));
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * inv;
}

namespace {

// y = x * W, W row-major (x.size() x y.size()).
void matvec(std::span<const double> x, const std::vector<float>& w, std::span<double> y) noexcept {
  const std::size_t cols = y.size();
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const float* row = w.data() + i * cols;
    for (std::size_t j = 0; j < cols; ++j) y[j] += xi * row[j];
  }
}

bool all_finite(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

void check_shape(const std::vector<float>& v, std::size_t expect, const char* what) {
  if (v.size() != expect) {
    throw ConfigError(std::string(what) + ": expected " + std::to_string(expect) + " values, got " +
                      std::to_string(v.size()));
  }
  if (!all_finite(v)) throw ConfigError(std::string(what) + ": non-finite weight");
}

}  // namespace

RetentionModel::RetentionModel(ModelConfig config, ModelWeights weights)
    : config_(std::move(config)), weights_(std::move(weights)) {
  config_.validate();
  const std::size_t d = config_.hidden, k = config_.vocab, f = config_.ffn_dim();
  check_shape(weights_.addr_embed, k * d, "addr_embed");
  check_shape(weights_.pc_embed, k * d, "pc_embed");
  if (weights_.layers.size() != config_.layers()) throw ConfigError("layer count does not match config");
  for (const auto& l : weights_.layers) {
    check_shape(l.w_q, d * d, "w_q");
    check_shape(l.w_k, d * d, "w_k");
    check_shape(l.w_v, d * d, "w_v");
    check_shape(l.w_o, d * d, "w_o");
    check_shape(l.ffn_in, d * f, "ffn_in");
    check_shape(l.ffn_out, f * d, "ffn_out");
  }
  check_shape(weights_.head, d * k, "head");
}

RecurrentState RetentionModel::initial_state() const {
  const std::size_t d = config_.hidden;
  RecurrentState s;
  s.layers_ = config_.layers();
  s.cell_ = d * d;
  s.retention_.assign(s.layers_ * s.cell_, 0.0);
  // x, norm, q, k, v, o, ffn hidden, logits
  s.scratch_.assign(6 * d + config_.ffn_dim() + config_.vocab, 0.0);
  return s;
}

void RetentionModel::embed(Token addr, Token pc, std::span<float> out) const {
  if (addr >= config_.vocab || pc >= config_.vocab) {
    throw ContractViolation("token out of range [0, " + std::to_string(config_.vocab) + ")");
  }
  const std::size_t d = config_.hidden;
  const float* ea = weights_.addr_embed.data() + std::size_t{addr} * d;
  const float* ep = weights_.pc_embed.data() + std::size_t{pc} * d;
  for (std::size_t i = 0; i < d; ++i) out[i] = ea[i] + ep[i];
}

std::vector<float> RetentionModel::embed(Token addr, Token pc) const {
  std::vector<float> out(config_.hidden);
  embed(addr, pc, out);
  return out;
}

void RetentionModel::check_state(const RecurrentState& state) const {
  if (state.layers_ != config_.layers() || state.cell_ != std::size_t{config_.hidden} * config_.hidden ||
      state.scratch_.size() != 6 * std::size_t{config_.hidden} + config_.ffn_dim() + config_.vocab) {
    throw ContractViolation("recurrent state does not match model shape");
  }
}

void RetentionModel::step(RecurrentState& state, TokenPair tok, std::span<float> logits) const {
  check_state(state);
  if (logits.size() != config_.vocab) throw ContractViolation("logits buffer must hold vocab values");

  const std::size_t d = config_.hidden;
  std::span<double> buf(state.scratch_);
  auto x = buf.subspan(0, d);
  auto norm = buf.subspan(d, d);
  auto q = buf.subspan(2 * d, d);
  auto k = buf.subspan(3 * d, d);
  auto v = buf.subspan(4 * d, d);
  auto o = buf.subspan(5 * d, d);
  auto hid = buf.subspan(6 * d, config_.ffn_dim());
  auto out = buf.subspan(6 * d + config_.ffn_dim(), config_.vocab);

  if (tok.addr >= config_.vocab || tok.pc >= config_.vocab) {
    throw ContractViolation("token out of range [0, " + std::to_string(config_.vocab) + ")");
  }
  const float* ea = weights_.addr_embed.data() + std::size_t{tok.addr} * d;
  const float* ep = weights_.pc_embed.data() + std::size_t{tok.pc} * d;
  for (std::size_t i = 0; i < d; ++i) x[i] = static_cast<double>(ea[i]) + static_cast<double>(ep[i]);

  for (std::size_t l = 0; l < config_.layers(); ++l) {
    const auto& lw = weights_.layers[l];
    const double gamma = config_.decay[l];
    auto s = state.layer(l);

    rms_normalize(x, norm);
    matvec(norm, lw.w_q, q);
    matvec(norm, lw.w_k, k);
    matvec(norm, lw.w_v, v);

    // S <- gamma * S + k^T v, then o = q * S.
    for (std::size_t i = 0; i < d; ++i) {
      double* row = s.data() + i * d;
      const double ki = k[i];
      for (std::size_t j = 0; j < d; ++j) row[j] = gamma * row[j] + ki * v[j];
    }
    std::fill(o.begin(), o.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const double* row = s.data() + i * d;
      const double qi = q[i];
      for (std::size_t j = 0; j < d; ++j) o[j] += qi * row[j];
    }
    matvec(o, lw.w_o, norm);
    for (std::size_t j = 0; j < d; ++j) x[j] += norm[j];

    rms_normalize(x, norm);
    matvec(norm, lw.ffn_in, hid);
    for (auto& h : hid) h = gelu(h);
    matvec(hid, lw.ffn_out, norm);
    for (std::size_t j = 0; j < d; ++j) x[j] += norm[j];
  }

  matvec(x, weights_.head, out);
  ++state.tokens_;
  for (std::size_t j = 0; j < out.size(); ++j) {
    logits[j] = static_cast<float>(out[j]);
    if (!std::isfinite(logits[j])) {
      throw NumericError("non-finite logit at token " + std::to_string(state.tokens_));
    }
  }
}

std::vector<float> RetentionModel::step(RecurrentState& state, TokenPair tok) const {
  std::vector<float> logits(config_.vocab);
  step(state, tok, logits);
  return logits;
}

std::vector<float> softmax(std::span<const float> logits) {
  std::vector<float> p(logits.size());
  if (logits.empty()) return p;
  const float mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  std::vector<double> e(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    e[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += e[i];
  }
  for (std::size_t i = 0; i < logits.size(); ++i) p[i] = static_cast<float>(e[i] / sum);
  return p;
}

std::vector<RankedOrdinal> predict_topn(std::span<const float> logits, std::size_t n) {
  if (n < 1 || n > logits.size()) throw ContractViolation("top-n must lie in [1, vocab]");
  const auto probs = softmax(logits);
  std::vector<std::uint32_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0u);
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) {
                      return probs[a] != probs[b] ? probs[a] > probs[b] : a < b;
                    });
  std::vector<RankedOrdinal> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({idx[i], probs[idx[i]]});
  return out;
}

LatencyStats bench_inference(const RetentionModel& model, std::span<const TokenPair> stream, std::size_t warmup) {
  using clock = std::chrono::steady_clock;
  auto state = model.initial_state();
  std::vector<float> logits(model.vocab());
  std::vector<double> samples;
  samples.reserve(stream.size());
  float sink = 0.0f;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (i < warmup) {
      model.step(state, stream[i], logits);
      continue;
    }
    const auto t0 = clock::now();
    model.step(state, stream[i], logits);
    const auto t1 = clock::now();
    sink += logits[0];
    samples.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
  }
  LatencyStats st;
  st.samples = samples.size();
  if (samples.empty()) return st;
  st.mean_ns = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  auto pct = [&](double q) {
    const auto i = static_cast<std::size_t>(q * static_cast<double>(samples.size() - 1));
    return samples[i];
  };
  st.p50_ns = pct(0.50);
  st.p99_ns = pct(0.99);
  st.max_ns = samples.back();
  // Keep the logits live so the loop is not elided.
  if (sink == 12345.678f) st.max_ns += 0.0;
  return st;
}

}  // namespace memix
