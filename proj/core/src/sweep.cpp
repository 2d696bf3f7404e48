#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "memix/error.hpp"
#include "memix/simulator.hpp"

namespace memix {

std::vector<SweepRow> sweep(const Trace& trace, std::span<const double> capacities,
                            std::span<const PolicyKind> policies, const SimConfig& base,
                            std::shared_ptr<const RetentionModel> model, unsigned threads) {
  struct Cell {
    PolicyKind policy;
    double capacity;
    SimReport report;
  };
  // Requested cells first, then one full-capacity reference per policy.
  std::vector<Cell> cells;
  for (auto p : policies) {
    for (double c : capacities) cells.push_back({p, c, {}});
  }
  const std::size_t requested = cells.size();
  for (auto p : policies) cells.push_back({p, 1.0, {}});

  for (auto& c : cells) {
    auto cfg = base;
    cfg.capacity_fraction = c.capacity;
    cfg.policy = c.policy;
    cfg.validate();
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        auto cfg = base;
        cfg.capacity_fraction = cells[i].capacity;
        cfg.policy = cells[i].policy;
        cells[i].report = run(trace, cfg, model);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows;
  rows.reserve(requested);
  for (std::size_t i = 0; i < requested; ++i) {
    const auto& ref = cells[requested + i / capacities.size()].report;
    SweepRow row{cells[i].policy, cells[i].capacity, cells[i].report, 1.0};
    row.normalized = static_cast<double>(row.report.total_time_ns) / static_cast<double>(ref.total_time_ns);
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "policy,capacity_fraction,total_time_ns,normalized,misses,issued,useful,wasted,accuracy,coverage,"
         "evictions,futuremap_bytes\n";
  char buf[64];
  auto fixed = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << to_string(row.policy) << ',' << fixed(row.capacity_fraction) << ',' << r.total_time_ns << ','
        << fixed(row.normalized) << ',' << r.misses << ',' << r.prefetch_issued << ',' << r.prefetch_useful << ','
        << r.prefetch_wasted << ',' << fixed(r.accuracy) << ',' << fixed(r.coverage) << ',' << r.evictions << ','
        << r.futuremap_bytes << '\n';
  }
  return out.str();
}

}  // namespace memix
