#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "memix/futuremap.hpp"
#include "memix/predictor.hpp"
#include "memix/trace.hpp"

namespace memix {

enum class PolicyKind {
  none,
  readahead,
  stride,
  leap_majority,
  memix,
  oracle,
};

std::string_view to_string(PolicyKind p) noexcept;
std::optional<PolicyKind> parse_policy(std::string_view name) noexcept;

struct MissContext {
  MissEvent event;
  // Position of the faulting access in the replayed trace.
  std::size_t trace_index = 0;
};

// Read-only view of local memory handed to policies.
class ResidencyView {
 public:
  virtual ~ResidencyView() = default;
  virtual bool resident(Vpn vpn) const = 0;
  virtual bool inflight(Vpn vpn) const = 0;
  virtual std::size_t capacity_pages() const = 0;
};

class PrefetchPolicy {
 public:
  virtual ~PrefetchPolicy() = default;

  virtual PolicyKind kind() const noexcept = 0;
  // Appends prefetch candidates for a hard miss, most valuable first.
  virtual void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) = 0;
  virtual void on_prefetch_used(Vpn) {}
  virtual void on_prefetch_wasted(Vpn) {}
  virtual std::size_t futuremap_bytes() const noexcept { return 0; }
  // Whether the miss handler runs model inference while the far fetch is in
  // flight.
  virtual bool overlaps_inference() const noexcept { return false; }
};

class NoPrefetchPolicy final : public PrefetchPolicy {
 public:
  PolicyKind kind() const noexcept override { return PolicyKind::none; }
  void on_miss(const MissContext&, const ResidencyView&, std::vector<Vpn>&) override {}
};

// Linux-style readahead: a window of the next `window` pages, issued only
// when the miss continues a sequential run (it follows the previous miss or
// the end of the previous readahead window).
class ReadaheadPolicy final : public PrefetchPolicy {
 public:
  explicit ReadaheadPolicy(std::uint32_t window = 8);

  PolicyKind kind() const noexcept override { return PolicyKind::readahead; }
  void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) override;

 private:
  std::uint32_t window_;
  std::optional<Vpn> prev_miss_;
  std::optional<Vpn> window_end_;
};

// Per-PC stride detection: emits p + delta once the same delta repeats.
class StridePolicy final : public PrefetchPolicy {
 public:
  PolicyKind kind() const noexcept override { return PolicyKind::stride; }
  void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) override;

 private:
  struct Entry {
    Vpn last = 0;
    std::int64_t delta = 0;
    bool has_delta = false;
  };
  std::unordered_map<Pc, Entry> table_;
};

// Majority trend over the last `history` global miss deltas; the prefetch
// window grows on useful prefetches and shrinks on wasted ones.
class LeapMajorityPolicy final : public PrefetchPolicy {
 public:
  explicit LeapMajorityPolicy(std::size_t history = 32, std::uint32_t max_window = 8);

  PolicyKind kind() const noexcept override { return PolicyKind::leap_majority; }
  void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) override;
  void on_prefetch_used(Vpn) override;
  void on_prefetch_wasted(Vpn) override;

  std::uint32_t window() const noexcept { return window_; }
  std::optional<std::int64_t> majority_delta() const;

 private:
  std::size_t history_;
  std::uint32_t max_window_;
  std::uint32_t window_ = 1;
  std::deque<std::int64_t> deltas_;
  std::optional<Vpn> prev_miss_;
};

// Clairvoyant reference: scans the upcoming accesses and prefetches the
// next pages that are neither resident nor in flight, in order of first use,
// up to `max_pages` per miss. The scan stops once it has looked past
// capacity-many distinct pages, beyond which an LRU-inserted prefetch would
// be evicted before its use.
class OraclePolicy final : public PrefetchPolicy {
 public:
  OraclePolicy(std::span<const AccessEvent> future, std::uint32_t max_pages);

  PolicyKind kind() const noexcept override { return PolicyKind::oracle; }
  void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) override;

 private:
  std::span<const AccessEvent> trace_;
  std::uint32_t max_pages_;
  std::uint64_t epoch_ = 0;
  std::unordered_map<Vpn, std::uint64_t> seen_;
};

// Model-guided prefetching through per-page future maps.
class MemixPolicy final : public PrefetchPolicy {
 public:
  // `candidate_log`, when set, receives "miss_vpn,candidate_vpn,prob" rows.
  MemixPolicy(std::shared_ptr<const RetentionModel> model, PredictorConfig config,
              std::size_t futuremap_capacity = FutureMapStore::kDefaultCapacity,
              std::ostream* candidate_log = nullptr);

  PolicyKind kind() const noexcept override { return PolicyKind::memix; }
  void on_miss(const MissContext& miss, const ResidencyView& mem, std::vector<Vpn>& out) override;
  std::size_t futuremap_bytes() const noexcept override { return store_.memory_bytes(); }
  bool overlaps_inference() const noexcept override { return true; }

  const Predictor& predictor() const noexcept { return predictor_; }
  const FutureMapStore& store() const noexcept { return store_; }

 private:
  Predictor predictor_;
  FutureMapStore store_;
  std::ostream* log_;
};

// Page `vpn + delta` if it stays inside the 64-bit address space.
std::optional<Vpn> offset_page(Vpn vpn, std::int64_t delta) noexcept;

}  // namespace memix
