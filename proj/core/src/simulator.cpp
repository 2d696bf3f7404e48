#include "memix/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <optional>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "memix/error.hpp"

namespace memix {

void SimConfig::validate() const {
  if (!(capacity_fraction > 0.0 && capacity_fraction <= 1.0)) {
    throw ConfigError("capacity_fraction must lie in (0, 1]");
  }
  if (t_far_ns <= t_local_ns) throw ConfigError("far memory must be slower than local memory");
  if (readahead_window == 0) throw ConfigError("readahead window must be positive");
  if (leap_history == 0 || leap_max_window == 0) throw ConfigError("leap parameters must be positive");
  if (futuremap_capacity == 0) throw ConfigError("future map capacity must be positive");
}

std::size_t capacity_pages_for(std::size_t footprint, double fraction) noexcept {
  const auto pages = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(footprint) + 1e-9));
  return std::max<std::size_t>(1, pages);
}

namespace {

// Bounded LRU-ordered local memory plus the set of pages being prefetched.
class LocalMemory final : public ResidencyView {
 public:
  LocalMemory(std::size_t capacity, PrefetchPolicy& policy, SimReport& report)
      : capacity_(capacity), policy_(policy), report_(report) {
    resident_.reserve(capacity * 2);
  }

  bool resident(Vpn vpn) const override { return resident_.contains(vpn); }
  bool inflight(Vpn vpn) const override { return inflight_.contains(vpn); }
  std::size_t capacity_pages() const override { return capacity_; }
  std::size_t inflight_count() const noexcept { return inflight_.size(); }
  Nanos completion(Vpn vpn) const { return inflight_.at(vpn); }

  // Moves a resident page to the MRU position; returns true if it was an
  // untouched prefetch.
  bool touch(Vpn vpn) {
    auto it = resident_.at(vpn);
    lru_.splice(lru_.begin(), lru_, it);
    const bool first_use = it->prefetched_unused;
    it->prefetched_unused = false;
    return first_use;
  }

  void insert(Vpn vpn, bool prefetched) {
    if (resident_.size() >= capacity_) evict_lru(prefetched);
    lru_.push_front({vpn, prefetched});
    resident_.emplace(vpn, lru_.begin());
  }

  void issue(Vpn vpn, Nanos done) {
    inflight_.emplace(vpn, done);
    completions_.push({done, seq_++, vpn});
  }

  // Lands every prefetch completed at or before `now`, in completion order.
  // With `until`, stops right after that page lands so later arrivals at the
  // same instant cannot evict it before it is used.
  void drain(Nanos now, std::optional<Vpn> until = std::nullopt) {
    while (!completions_.empty() && completions_.top().done <= now) {
      const auto vpn = completions_.top().vpn;
      completions_.pop();
      inflight_.erase(vpn);
      insert(vpn, true);
      if (vpn == until) return;
    }
  }

  std::size_t unused_prefetched() const {
    return static_cast<std::size_t>(
        std::count_if(lru_.begin(), lru_.end(), [](const Frame& f) { return f.prefetched_unused; }));
  }

  void verify(const SimReport& r) const {
    if (resident_.size() > capacity_) throw std::logic_error("local memory capacity exceeded");
    for (const auto& [vpn, done] : inflight_) {
      if (resident_.contains(vpn)) throw std::logic_error("page both resident and in flight");
    }
    if (r.prefetch_useful + r.prefetch_wasted + inflight_.size() + unused_prefetched() != r.prefetch_issued) {
      throw std::logic_error("prefetch accounting does not reconcile");
    }
  }

 private:
  struct Frame {
    Vpn vpn;
    bool prefetched_unused;
  };
  struct Pending {
    Nanos done;
    std::uint64_t seq;
    Vpn vpn;
    bool operator>(const Pending& o) const { return done != o.done ? done > o.done : seq > o.seq; }
  };

  void evict_lru(bool for_prefetch) {
    const Frame victim = lru_.back();
    lru_.pop_back();
    resident_.erase(victim.vpn);
    ++report_.evictions;
    if (for_prefetch) ++report_.prefetch_evictions;
    if (victim.prefetched_unused) {
      ++report_.prefetch_wasted;
      policy_.on_prefetch_wasted(victim.vpn);
    }
  }

  std::size_t capacity_;
  PrefetchPolicy& policy_;
  SimReport& report_;
  std::list<Frame> lru_;  // front = most recent
  std::unordered_map<Vpn, std::list<Frame>::iterator> resident_;
  std::unordered_map<Vpn, Nanos> inflight_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> completions_;
  std::uint64_t seq_ = 0;
};

std::unique_ptr<PrefetchPolicy> make_policy(const Trace& trace, const SimConfig& cfg,
                                            std::shared_ptr<const RetentionModel> model, std::ostream* log) {
  switch (cfg.policy) {
    case PolicyKind::none: return std::make_unique<NoPrefetchPolicy>();
    case PolicyKind::readahead: return std::make_unique<ReadaheadPolicy>(cfg.readahead_window);
    case PolicyKind::stride: return std::make_unique<StridePolicy>();
    case PolicyKind::leap_majority:
      return std::make_unique<LeapMajorityPolicy>(cfg.leap_history, cfg.leap_max_window);
    case PolicyKind::oracle: return std::make_unique<OraclePolicy>(trace.events, cfg.max_inflight_prefetch);
    case PolicyKind::memix:
      if (!model) throw ConfigError("memix policy requires model weights");
      return std::make_unique<MemixPolicy>(std::move(model), cfg.predictor, cfg.futuremap_capacity, log);
  }
  throw ConfigError("unknown policy");
}

}  // namespace

SimReport run(const Trace& trace, const SimConfig& cfg, std::shared_ptr<const RetentionModel> model,
              const SimHooks& hooks) {
  cfg.validate();
  if (trace.kind != TraceKind::full_access) throw ConfigError("simulator replays full-access traces only");
  const auto limit = trace.vpn_limit();
  for (const auto& e : trace.events) {
    if (e.vpn >= limit) throw ConfigError("trace vpn exceeds the address space");
  }

  auto policy = make_policy(trace, cfg, model, hooks.candidate_log);

  SimReport r;
  r.policy = cfg.policy;
  r.capacity_fraction = cfg.capacity_fraction;
  r.footprint_pages = trace.footprint();
  r.capacity_pages = capacity_pages_for(r.footprint_pages, cfg.capacity_fraction);
  r.accesses = trace.events.size();

  LocalMemory mem(r.capacity_pages, *policy, r);
  const bool overlap = policy->overlaps_inference();
  const Nanos miss_penalty = overlap ? std::max(cfg.t_far_ns, cfg.t_inf_ns) : cfg.t_far_ns;
  const Nanos issue_delay = overlap ? cfg.t_inf_ns : 0;

  Nanos now = 0;
  std::vector<Vpn> candidates;
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const auto& e = trace.events[i];
    const Nanos before = now;
    mem.drain(now);

    if (mem.resident(e.vpn)) {
      ++r.hits;
      if (mem.touch(e.vpn)) {
        ++r.prefetch_useful;
        policy->on_prefetch_used(e.vpn);
      }
      now += cfg.t_local_ns;
    } else if (mem.inflight(e.vpn)) {
      // Prefetch still on the wire: wait out the remainder.
      ++r.partial_hits;
      const Nanos done = mem.completion(e.vpn);
      r.stall_ns += done - now;
      now = done;
      mem.drain(now, e.vpn);
      mem.touch(e.vpn);
      ++r.prefetch_useful;
      policy->on_prefetch_used(e.vpn);
      now += cfg.t_local_ns;
    } else {
      ++r.misses;
      if (hooks.miss_log) hooks.miss_log->push_back(e);

      candidates.clear();
      policy->on_miss({e, i}, mem, candidates);
      const Nanos issue_at = now + issue_delay;
      for (Vpn c : candidates) {
        if (c == e.vpn || c >= limit || mem.resident(c) || mem.inflight(c)) continue;
        if (mem.inflight_count() >= cfg.max_inflight_prefetch) break;
        mem.issue(c, issue_at + cfg.t_far_ns);
        ++r.prefetch_issued;
      }

      const Nanos demand_done = now + miss_penalty;
      r.stall_ns += miss_penalty;
      mem.drain(demand_done);
      mem.insert(e.vpn, false);
      now = demand_done + cfg.t_local_ns;
    }

    if (cfg.check_invariants) {
      if (now < before) throw std::logic_error("virtual clock moved backwards");
      mem.verify(r);
    }
  }

  r.total_time_ns = now;
  r.prefetch_wasted += mem.unused_prefetched();
  r.prefetch_inflight_at_end = mem.inflight_count();
  r.accuracy = r.prefetch_issued == 0 ? 0.0
                                      : static_cast<double>(r.prefetch_useful) / static_cast<double>(r.prefetch_issued);
  r.futuremap_bytes = policy->futuremap_bytes();

  if (cfg.policy == PolicyKind::none) {
    r.baseline_misses = r.misses;
  } else {
    auto base = cfg;
    base.policy = PolicyKind::none;
    base.check_invariants = false;
    r.baseline_misses = run(trace, base).misses;
  }
  r.coverage = r.baseline_misses == 0
                   ? 0.0
                   : 1.0 - static_cast<double>(r.misses) / static_cast<double>(r.baseline_misses);
  return r;
}

Trace collect_miss_log(const Trace& trace, double capacity_fraction) {
  SimConfig cfg;
  cfg.capacity_fraction = capacity_fraction;
  Trace log;
  log.kind = TraceKind::miss_log;
  log.page_size_bits = trace.page_size_bits;
  log.capacity_fraction = static_cast<float>(capacity_fraction);
  SimHooks hooks;
  hooks.miss_log = &log.events;
  run(trace, cfg, nullptr, hooks);
  return log;
}

nlohmann::json to_json(const SimReport& r) {
  return {
      {"policy", to_string(r.policy)},
      {"capacity_fraction", r.capacity_fraction},
      {"capacity_pages", r.capacity_pages},
      {"footprint_pages", r.footprint_pages},
      {"accesses", r.accesses},
      {"total_time_ns", r.total_time_ns},
      {"stall_ns", r.stall_ns},
      {"hits", r.hits},
      {"misses", r.misses},
      {"partial_hits", r.partial_hits},
      {"prefetch_issued", r.prefetch_issued},
      {"prefetch_useful", r.prefetch_useful},
      {"prefetch_wasted", r.prefetch_wasted},
      {"prefetch_inflight_at_end", r.prefetch_inflight_at_end},
      {"evictions", r.evictions},
      {"prefetch_evictions", r.prefetch_evictions},
      {"baseline_misses", r.baseline_misses},
      {"coverage", r.coverage},
      {"accuracy", r.accuracy},
      {"futuremap_bytes", r.futuremap_bytes},
  };
}

}  // namespace memix
