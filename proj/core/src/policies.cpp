#include "memix/policy.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <ostream>

#include "memix/error.hpp"

namespace memix {

std::string_view to_string(PolicyKind p) noexcept {
  switch (p) {
    case PolicyKind::none: return "none";
    case PolicyKind::readahead: return "readahead";
    case PolicyKind::stride: return "stride";
    case PolicyKind::leap_majority: return "leap";
    case PolicyKind::memix: return "memix";
    case PolicyKind::oracle: return "oracle";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) noexcept {
  constexpr std::array all = {PolicyKind::none, PolicyKind::readahead, PolicyKind::stride,
                              PolicyKind::leap_majority, PolicyKind::memix, PolicyKind::oracle};
  for (auto p : all) {
    if (name == to_string(p)) return p;
  }
  if (name == "leap_majority") return PolicyKind::leap_majority;
  return std::nullopt;
}

std::optional<Vpn> offset_page(Vpn vpn, std::int64_t delta) noexcept {
  if (delta >= 0) {
    const auto d = static_cast<Vpn>(delta);
    if (vpn > std::numeric_limits<Vpn>::max() - d) return std::nullopt;
    return vpn + d;
  }
  const auto d = static_cast<Vpn>(-(delta + 1)) + 1;
  if (vpn < d) return std::nullopt;
  return vpn - d;
}

ReadaheadPolicy::ReadaheadPolicy(std::uint32_t window) : window_(window) {
  if (window == 0) throw ConfigError("readahead window must be positive");
}

void ReadaheadPolicy::on_miss(const MissContext& miss, const ResidencyView&, std::vector<Vpn>& out) {
  const Vpn p = miss.event.vpn;
  const bool sequential = (prev_miss_ && p == *prev_miss_ + 1) || (window_end_ && p == *window_end_ + 1);
  prev_miss_ = p;
  if (!sequential) return;
  for (std::uint32_t i = 1; i <= window_; ++i) {
    if (auto v = offset_page(p, i)) out.push_back(*v);
  }
  window_end_ = p + window_;
}

void StridePolicy::on_miss(const MissContext& miss, const ResidencyView&, std::vector<Vpn>& out) {
  const Vpn p = miss.event.vpn;
  auto [it, fresh] = table_.try_emplace(miss.event.pc, Entry{p, 0, false});
  if (fresh) return;
  auto& e = it->second;
  const auto delta = static_cast<std::int64_t>(p - e.last);
  if (e.has_delta && delta == e.delta && delta != 0) {
    if (auto v = offset_page(p, delta)) out.push_back(*v);
  }
  e.last = p;
  e.delta = delta;
  e.has_delta = true;
}

LeapMajorityPolicy::LeapMajorityPolicy(std::size_t history, std::uint32_t max_window)
    : history_(history), max_window_(max_window) {
  if (history == 0 || max_window == 0) throw ConfigError("leap history and window must be positive");
}

std::optional<std::int64_t> LeapMajorityPolicy::majority_delta() const {
  // Boyer-Moore vote, then confirm a strict majority of the full window.
  std::int64_t cand = 0;
  std::size_t votes = 0;
  for (auto d : deltas_) {
    if (votes == 0) {
      cand = d;
      votes = 1;
    } else {
      votes += d == cand ? 1 : std::size_t(-1);
    }
  }
  if (votes == 0) return std::nullopt;
  const auto count = static_cast<std::size_t>(std::count(deltas_.begin(), deltas_.end(), cand));
  if (count * 2 > history_) return cand;
  return std::nullopt;
}

void LeapMajorityPolicy::on_miss(const MissContext& miss, const ResidencyView&, std::vector<Vpn>& out) {
  const Vpn p = miss.event.vpn;
  if (prev_miss_) {
    deltas_.push_back(static_cast<std::int64_t>(p - *prev_miss_));
    if (deltas_.size() > history_) deltas_.pop_front();
  }
  prev_miss_ = p;
  const auto trend = majority_delta();
  if (!trend || *trend == 0) return;
  for (std::uint32_t i = 1; i <= window_; ++i) {
    if (auto v = offset_page(p, *trend * static_cast<std::int64_t>(i))) out.push_back(*v);
  }
}

void LeapMajorityPolicy::on_prefetch_used(Vpn) { window_ = std::min(max_window_, window_ * 2); }

void LeapMajorityPolicy::on_prefetch_wasted(Vpn) { window_ = std::max(1u, window_ / 2); }

OraclePolicy::OraclePolicy(std::span<const AccessEvent> future, std::uint32_t max_pages)
    : trace_(future), max_pages_(max_pages) {}

void OraclePolicy::on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) {
  ++epoch_;
  seen_[miss.event.vpn] = epoch_;
  std::size_t distinct = 1;
  std::uint32_t picked = 0;
  for (std::size_t i = miss.trace_index + 1; i < trace_.size() && picked < max_pages_; ++i) {
    const Vpn v = trace_[i].vpn;
    auto& stamp = seen_[v];
    if (stamp == epoch_) continue;
    if (distinct >= mem.capacity_pages()) break;
    stamp = epoch_;
    ++distinct;
    if (mem.resident(v) || mem.inflight(v)) continue;
    out.push_back(v);
    ++picked;
  }
}

MemixPolicy::MemixPolicy(std::shared_ptr<const RetentionModel> model, PredictorConfig config,
                         std::size_t futuremap_capacity, std::ostream* candidate_log)
    : predictor_(model, config),
      store_(model ? model->vocab() : kDefaultVocab, futuremap_capacity),
      log_(candidate_log) {}

void MemixPolicy::on_miss(const MissContext& miss, const ResidencyView&, std::vector<Vpn>& out) {
  for (const auto& c : predictor_.on_miss(store_, miss.event)) {
    out.push_back(c.vpn);
    if (log_) *log_ << miss.event.vpn << ',' << c.vpn << ',' << c.probability << '\n';
  }
}

}  // namespace memix
