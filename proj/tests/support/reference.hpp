#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "memix/model.hpp"
#include "memix/trace.hpp"

namespace memix::testing {

inline std::filesystem::path fixture_dir() { return MEMIX_FIXTURE_DIR; }

// Parallel (whole-sequence) retention forward pass in double precision:
// o_i = sum_{j<=i} gamma^(i-j) (q_i . k_j) v_j, with an explicit decay
// matrix. Returns one logit row per position.
inline std::vector<std::vector<double>> parallel_logits(const ModelConfig& cfg, const ModelWeights& w,
                                                        const std::vector<TokenPair>& tokens) {
  const std::size_t n = tokens.size(), d = cfg.hidden, f = cfg.ffn_dim(), k = cfg.vocab;
  using Mat = std::vector<std::vector<double>>;
  auto matmul = [](const Mat& x, const std::vector<float>& m, std::size_t in, std::size_t out) {
    Mat y(x.size(), std::vector<double>(out, 0.0));
    for (std::size_t r = 0; r < x.size(); ++r)
      for (std::size_t j = 0; j < out; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < in; ++i) acc += x[r][i] * static_cast<double>(m[i * out + j]);
        y[r][j] = acc;
      }
    return y;
  };
  auto rms = [&](const Mat& x) {
    Mat y = x;
    for (auto& row : y) {
      double ss = 0.0;
      for (double v : row) ss += v * v;
      const double inv = 1.0 / std::sqrt(ss / static_cast<double>(d) + static_cast<double>(kRmsEpsilon));
      for (double& v : row) v *= inv;
    }
    return y;
  };

  Mat x(n, std::vector<double>(d));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i)
      x[t][i] = static_cast<double>(w.addr_embed[tokens[t].addr * d + i]) +
                static_cast<double>(w.pc_embed[tokens[t].pc * d + i]);

  for (std::size_t l = 0; l < cfg.layers(); ++l) {
    const auto& lw = w.layers[l];
    const double gamma = cfg.decay[l];
    auto nx = rms(x);
    auto q = matmul(nx, lw.w_q, d, d);
    auto kk = matmul(nx, lw.w_k, d, d);
    auto v = matmul(nx, lw.w_v, d, d);
    Mat o(n, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        const double decay = std::pow(gamma, static_cast<double>(i - j));
        if (decay == 0.0) continue;
        double score = 0.0;
        for (std::size_t c = 0; c < d; ++c) score += q[i][c] * kk[j][c];
        for (std::size_t c = 0; c < d; ++c) o[i][c] += decay * score * v[j][c];
      }
    auto r = matmul(o, lw.w_o, d, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) x[i][c] += r[i][c];
    nx = rms(x);
    auto h = matmul(nx, lw.ffn_in, d, f);
    for (auto& row : h)
      for (double& z : row) z = 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0)));
    auto y = matmul(h, lw.ffn_out, f, d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) x[i][c] += y[i][c];
  }
  return matmul(x, w.head, d, k);
}

// Textbook LRU cache: a vector ordered most-recent-first, linear search.
// Returns the index of every access that misses.
inline std::vector<std::size_t> lru_reference_misses(const std::vector<AccessEvent>& events, std::size_t capacity) {
  std::vector<Vpn> stack;
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto it = std::find(stack.begin(), stack.end(), events[i].vpn);
    if (it == stack.end()) {
      misses.push_back(i);
      if (stack.size() == capacity) stack.pop_back();
      stack.insert(stack.begin(), events[i].vpn);
    } else {
      std::rotate(stack.begin(), it, it + 1);
    }
  }
  return misses;
}

// Weights whose logits depend only on the current address token and peak at
// successor[token]. All layer weights are zero so the residual stream
// carries the embedding straight to the head. Head columns are distinct
// unit vectors in R^hidden; the address embedding of token a is `gain`
// times the column of successor[a].
inline ModelWeights successor_weights(const ModelConfig& cfg, const std::vector<Token>& successor, float gain,
                                      std::uint64_t seed = 3) {
  auto w = ModelWeights::zeros(cfg);
  const std::size_t d = cfg.hidden, k = cfg.vocab;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> col(k, std::vector<double>(d));
  for (auto& c : col) {
    double norm = 0.0;
    for (auto& z : c) {
      z = nd(rng);
      norm += z * z;
    }
    for (auto& z : c) z /= std::sqrt(norm);
  }
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < d; ++i) w.head[i * k + j] = static_cast<float>(col[j][i]);
  for (std::size_t a = 0; a < successor.size() && a < k; ++a)
    for (std::size_t i = 0; i < d; ++i) w.addr_embed[a * d + i] = gain * static_cast<float>(col[successor[a]][i]);
  return w;
}

struct GoldenRow {
  TokenPair tokens;
  std::vector<float> logits;
};

inline std::vector<GoldenRow> load_golden_logits(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<GoldenRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    GoldenRow r;
    r.tokens = {static_cast<Token>(std::stoul(cells[1])), static_cast<Token>(std::stoul(cells[2]))};
    for (std::size_t i = 3; i < cells.size(); ++i) r.logits.push_back(std::stof(cells[i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TokenPair> random_tokens(std::mt19937_64& rng, std::size_t n, std::uint32_t vocab) {
  std::vector<TokenPair> t(n);
  for (auto& p : t) {
    p.addr = static_cast<Token>(rng() % vocab);
    p.pc = static_cast<Token>(rng() % vocab);
  }
  return t;
}

}  // namespace memix::testing
