#include "memix/predictor.hpp"

#include <algorithm>

#include "memix/error.hpp"

namespace memix {

void PredictorConfig::validate(std::uint32_t vocab) const {
  if (history < 1) throw ConfigError("history length must be at least 1");
  if (top_n < 1 || top_n > vocab) throw ConfigError("top_n must lie in [1, vocab]");
  if (!(min_prob >= 0.0f && min_prob <= 1.0f)) throw ConfigError("min_prob must lie in [0, 1]");
  if (depth < 1) throw ConfigError("prediction depth must be at least 1");
}

Predictor::Predictor(std::shared_ptr<const RetentionModel> model, PredictorConfig config)
    : model_(std::move(model)), config_(config) {
  if (!model_) throw ConfigError("predictor requires model weights");
  config_.validate(model_->vocab());
  state_ = model_->initial_state();
  logits_.resize(model_->vocab());
}

TokenPair Predictor::tokenize(const MissEvent& e) const noexcept {
  const auto k = model_->vocab();
  return {static_cast<Token>(e.vpn % k), static_cast<Token>(e.pc % k)};
}

void Predictor::resolve_into(FutureMapStore& store, Vpn from, const std::vector<RankedOrdinal>& ranked,
                             float scale, std::vector<Candidate>& out) const {
  for (const auto& r : ranked) {
    // A probability of exactly 1 cannot clear a floor of 1.
    if (r.probability < config_.min_prob || config_.min_prob >= 1.0f) continue;
    if (auto v = store.resolve(from, r.ordinal)) out.push_back({*v, r.probability * scale});
  }
}

std::vector<Candidate> Predictor::on_miss(FutureMapStore& store, const MissEvent& miss) {
  if (last_miss_) store.observe_transition(*last_miss_, miss.vpn);
  last_miss_ = miss.vpn;

  const auto tok = tokenize(miss);
  history_.push_back(tok);
  if (history_.size() > config_.history) history_.pop_front();

  model_->step(state_, tok, logits_);
  ranking_ = predict_topn(logits_, config_.top_n);

  std::vector<Candidate> out;
  resolve_into(store, miss.vpn, ranking_, 1.0f, out);

  if (config_.depth > 1 && !out.empty()) {
    // Speculate on a forked state so committed history stays untouched. The
    // hypothetical miss reuses the current pc since the real one is unknown.
    auto fork = state_;
    Candidate best = out.front();
    std::vector<float> logits(logits_.size());
    for (std::uint32_t level = 1; level < config_.depth; ++level) {
      model_->step(fork, tokenize({best.vpn, miss.pc}), logits);
      const auto ranked = predict_topn(logits, config_.top_n);
      std::vector<Candidate> next;
      resolve_into(store, best.vpn, ranked, best.probability, next);
      if (next.empty()) break;
      out.insert(out.end(), next.begin(), next.end());
      best = next.front();
    }
  }

  // Deduplicate, keeping the first (highest-confidence) occurrence.
  std::vector<Candidate> unique;
  unique.reserve(out.size());
  for (const auto& c : out) {
    if (c.vpn == miss.vpn) continue;
    if (std::none_of(unique.begin(), unique.end(), [&](const Candidate& u) { return u.vpn == c.vpn; })) {
      unique.push_back(c);
    }
  }
  return unique;
}

void Predictor::reset() {
  state_.clear();
  history_.clear();
  last_miss_.reset();
  ranking_.clear();
}

}  // namespace memix
