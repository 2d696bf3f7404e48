#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "memix/model.hpp"
#include "memix/policy.hpp"
#include "memix/predictor.hpp"
#include "memix/trace.hpp"

namespace memix {

struct SimConfig {
  // Local memory as a fraction of the trace footprint.
  double capacity_fraction = 1.0;
  Nanos t_local_ns = 100;
  Nanos t_far_ns = 6000;
  // Inference cost per miss; only the Memix policy pays it, overlapped with
  // the far fetch.
  Nanos t_inf_ns = 1000;
  std::uint32_t max_inflight_prefetch = 8;
  PolicyKind policy = PolicyKind::none;

  PredictorConfig predictor;
  std::size_t futuremap_capacity = FutureMapStore::kDefaultCapacity;
  std::uint32_t readahead_window = 8;
  std::size_t leap_history = 32;
  std::uint32_t leap_max_window = 8;

  // Re-verify capacity, residency exclusivity, prefetch conservation and
  // clock monotonicity after every access; throws std::logic_error.
  bool check_invariants = false;

  void validate() const;
};

struct SimReport {
  PolicyKind policy = PolicyKind::none;
  double capacity_fraction = 0.0;
  std::size_t capacity_pages = 0;
  std::size_t footprint_pages = 0;
  std::uint64_t accesses = 0;

  Nanos total_time_ns = 0;
  // Time spent waiting on far memory: demand fetches plus partial-hit stalls.
  Nanos stall_ns = 0;

  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t partial_hits = 0;

  std::uint64_t prefetch_issued = 0;
  std::uint64_t prefetch_useful = 0;
  std::uint64_t prefetch_wasted = 0;
  std::uint64_t prefetch_inflight_at_end = 0;

  std::uint64_t evictions = 0;
  std::uint64_t prefetch_evictions = 0;

  std::uint64_t baseline_misses = 0;
  double coverage = 0.0;
  double accuracy = 0.0;
  std::size_t futuremap_bytes = 0;
};

nlohmann::json to_json(const SimReport& report);

struct SimHooks {
  // Receives every hard miss in order.
  std::vector<MissEvent>* miss_log = nullptr;
  // Memix only: "miss_vpn,candidate_vpn,prob" rows.
  std::ostream* candidate_log = nullptr;
};

std::size_t capacity_pages_for(std::size_t footprint, double fraction) noexcept;

// Replays a full-access trace on a single virtual clock. `model` is required
// for the Memix policy and ignored otherwise.
SimReport run(const Trace& trace, const SimConfig& config, std::shared_ptr<const RetentionModel> model = {},
              const SimHooks& hooks = {});

// Hard misses of a no-prefetch run, packaged as a miss log.
Trace collect_miss_log(const Trace& trace, double capacity_fraction);

struct SweepRow {
  PolicyKind policy = PolicyKind::none;
  double capacity_fraction = 0.0;
  SimReport report;
  // total_time relative to the same policy at full local capacity.
  double normalized = 1.0;
};

// Cross product of policies x capacities, ordered policy-major. Cells run on
// up to `threads` workers; results do not depend on the thread count.
std::vector<SweepRow> sweep(const Trace& trace, std::span<const double> capacities,
                            std::span<const PolicyKind> policies, const SimConfig& base,
                            std::shared_ptr<const RetentionModel> model = {}, unsigned threads = 1);

std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace memix
