#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "memix/futuremap.hpp"
#include "memix/model.hpp"
#include "memix/trace.hpp"

namespace memix {

struct PredictorConfig {
  // Recent (addr, pc) token pairs kept for inspection. The recurrent state
  // itself summarizes the whole decayed history.
  std::uint32_t history = 8;
  std::uint32_t top_n = 2;
  float min_prob = 0.1f;
  // Chained speculative lookahead; 1 means predict only the next miss.
  std::uint32_t depth = 1;

  void validate(std::uint32_t vocab) const;
};

struct Candidate {
  Vpn vpn = 0;
  float probability = 0.0f;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Online half of the prefetcher: tokenizes each hard miss, advances the
// model, and resolves the ranked ordinals through the future maps.
class Predictor {
 public:
  Predictor(std::shared_ptr<const RetentionModel> model, PredictorConfig config);

  std::vector<Candidate> on_miss(FutureMapStore& store, const MissEvent& miss);

  // Ranking from the most recent committed step (before probability
  // filtering), for diagnostics and the decoupling check.
  const std::vector<RankedOrdinal>& last_ranking() const noexcept { return ranking_; }
  const std::deque<TokenPair>& history() const noexcept { return history_; }
  const RecurrentState& state() const noexcept { return state_; }
  std::optional<Vpn> last_miss() const noexcept { return last_miss_; }
  const PredictorConfig& config() const noexcept { return config_; }
  const RetentionModel& model() const noexcept { return *model_; }

  void reset();

  TokenPair tokenize(const MissEvent& e) const noexcept;

 private:
  void resolve_into(FutureMapStore& store, Vpn from, const std::vector<RankedOrdinal>& ranked, float scale,
                    std::vector<Candidate>& out) const;

  std::shared_ptr<const RetentionModel> model_;
  PredictorConfig config_;
  RecurrentState state_;
  std::deque<TokenPair> history_;
  std::optional<Vpn> last_miss_;
  std::vector<float> logits_;
  std::vector<RankedOrdinal> ranking_;
};

}  // namespace memix
