// Runs every acceptance criterion once and prints one PASS/FAIL line each.
// Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "memix/model.hpp"
#include "memix/predictor.hpp"
#include "memix/simulator.hpp"
#include "memix/workload.hpp"
#include "reference.hpp"

namespace memix {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::shared_ptr<const RetentionModel> fixture_model() {
  auto l = load_weights(testing::fixture_dir() / "linked_k64.mxw");
  return std::make_shared<const RetentionModel>(l.config, l.weights);
}

Trace make(Workload w, std::uint64_t pages, std::uint64_t iters, std::uint64_t seed, std::uint64_t stride = 1) {
  WorkloadParams p;
  p.footprint_pages = pages;
  p.iterations = iters;
  p.stride = stride;
  return gen_synthetic(w, p, seed);
}

Trace random_trace(std::mt19937_64& rng, std::size_t n, Vpn pages) {
  Trace t;
  t.events.resize(n);
  Vpn v = rng() % pages;
  for (auto& e : t.events) {
    switch (rng() % 5) {
      case 0: v = rng() % pages; break;
      case 1: v = (v + 1) % pages; break;
      case 2: v = (v + 3) % pages; break;
      default: break;
    }
    e = {v, 0x400000 + (rng() % 4) * 16};
  }
  return t;
}

Outcome parameter_budget() {
  const auto n = ModelConfig{}.parameter_count();
  const auto stored = ModelWeights::zeros(ModelConfig{}).parameter_count();
  return {n == 2560 && stored == 2560, fmt("config %zu, allocated %zu, expected 2560", n, stored)};
}

Outcome recurrent_parallel_equivalence() {
  std::mt19937_64 rng(2025);
  double worst = 0.0;
  ModelConfig cfg;
  for (int set = 0; set < 50; ++set) {
    const auto w = ModelWeights::random(cfg, rng());
    RetentionModel m(cfg, w);
    const auto tokens = testing::random_tokens(rng, 1 + rng() % 512, cfg.vocab);
    const auto ref = testing::parallel_logits(cfg, w, tokens);
    auto s = m.initial_state();
    std::vector<float> logits(cfg.vocab);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      m.step(s, tokens[i], logits);
      for (std::size_t j = 0; j < cfg.vocab; ++j) worst = std::max(worst, std::abs(logits[j] - ref[i][j]));
    }
  }
  return {worst <= 1e-4, fmt("max |recurrent - parallel| = %.3g over 50 weight sets (tol 1e-4)", worst)};
}

// Recency-stamped LRU: evicts the page with the oldest last use.
std::vector<std::size_t> stamped_lru_misses(const std::vector<AccessEvent>& events, std::size_t capacity) {
  std::map<Vpn, std::size_t> last;
  std::set<std::pair<std::size_t, Vpn>> by_age;
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Vpn v = events[i].vpn;
    auto it = last.find(v);
    if (it != last.end()) {
      by_age.erase({it->second, v});
      it->second = i;
    } else {
      misses.push_back(i);
      if (last.size() == capacity) {
        const auto oldest = *by_age.begin();
        by_age.erase(by_age.begin());
        last.erase(oldest.second);
      }
      last.emplace(v, i);
    }
    by_age.insert({i, v});
  }
  return misses;
}

Outcome lru_equivalence() {
  std::mt19937_64 rng(77);
  std::size_t mismatched = 0, events = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = trial % 10 == 0 ? 100000 : 1 + rng() % 100000;
    const auto t = random_trace(rng, n, 8 + rng() % 4000);
    SimConfig cfg;
    cfg.capacity_fraction = static_cast<double>(1 + rng() % 100) / 100.0;
    std::vector<MissEvent> log;
    const auto r = run(t, cfg, nullptr, {.miss_log = &log});
    const auto expect = stamped_lru_misses(t.events, r.capacity_pages);
    bool same = log.size() == expect.size();
    for (std::size_t i = 0; same && i < expect.size(); ++i) same = log[i] == t.events[expect[i]];
    mismatched += !same;
    events += n;
  }
  return {mismatched == 0, fmt("%zu of 1000 traces differ (%zu events replayed)", mismatched, events)};
}

Outcome conservation_invariants() {
  std::mt19937_64 rng(4242);
  const auto model = fixture_model();
  const PolicyKind all[] = {PolicyKind::none,          PolicyKind::readahead, PolicyKind::stride,
                            PolicyKind::leap_majority, PolicyKind::memix,     PolicyKind::oracle};
  std::size_t failures = 0;
  std::string first;
  for (int c = 0; c < 10000; ++c) {
    const auto t = random_trace(rng, 1 + rng() % 400, 1 + rng() % 120);
    SimConfig cfg;
    cfg.policy = all[c % 6];
    cfg.capacity_fraction = static_cast<double>(1 + rng() % 100) / 100.0;
    cfg.max_inflight_prefetch = static_cast<std::uint32_t>(rng() % 17);
    cfg.t_inf_ns = rng() % 10000;
    cfg.predictor.min_prob = static_cast<float>(rng() % 30) / 100.0f;
    cfg.predictor.top_n = 1 + static_cast<std::uint32_t>(rng() % 4);
    cfg.predictor.depth = 1 + static_cast<std::uint32_t>(rng() % 3);
    cfg.check_invariants = true;
    try {
      const auto r = run(t, cfg, model);
      const bool ok = r.prefetch_issued == r.prefetch_useful + r.prefetch_wasted + r.prefetch_inflight_at_end &&
                      r.hits + r.partial_hits + r.misses == r.accesses &&
                      r.total_time_ns >= r.accesses * cfg.t_local_ns && r.capacity_pages <= r.footprint_pages &&
                      r.prefetch_evictions <= r.evictions;
      if (!ok) throw std::logic_error("report counters do not reconcile");
    } catch (const std::exception& e) {
      if (failures++ == 0) first = fmt("case %d (%s): %s", c, std::string(to_string(cfg.policy)).c_str(), e.what());
    }
  }
  return {failures == 0, failures == 0 ? "10000 randomized cases, all invariants held"
                                       : fmt("%zu failing cases; first %s", failures, first.c_str())};
}

Outcome oracle_dominance() {
  const auto model = fixture_model();
  const std::pair<const char*, Trace> workloads[] = {
      {"seq", make(Workload::sequential, 1000, 4, 1)},
      {"stride", make(Workload::strided, 1000, 4, 1, 3)},
      {"linked", make(Workload::linked_traversal, 1000, 4, 7)},
      {"tree", make(Workload::tree_descent, 1023, 4, 7)},
      {"graph", make(Workload::graph_walk, 1000, 4, 7)},
  };
  const PolicyKind others[] = {PolicyKind::none, PolicyKind::readahead, PolicyKind::stride, PolicyKind::leap_majority,
                               PolicyKind::memix};
  std::size_t cells = 0, violations = 0;
  std::string first;
  for (const auto& [name, trace] : workloads) {
    for (double cap : {0.3, 0.5, 0.7, 0.9}) {
      SimConfig cfg;
      cfg.capacity_fraction = cap;
      cfg.policy = PolicyKind::oracle;
      const auto oracle = run(trace, cfg).total_time_ns;
      for (auto p : others) {
        cfg.policy = p;
        const auto t = run(trace, cfg, model).total_time_ns;
        ++cells;
        if (oracle > t) {
          if (violations++ == 0) {
            first = fmt("; first: %s@%.1f oracle %llu > %s %llu", name, cap, static_cast<unsigned long long>(oracle),
                        std::string(to_string(p)).c_str(), static_cast<unsigned long long>(t));
          }
        }
      }
    }
  }
  return {violations == 0, fmt("%zu of %zu comparisons violated%s", violations, cells, first.c_str())};
}

Outcome rule_policy_sanity() {
  SimConfig cfg;
  cfg.capacity_fraction = 0.5;
  cfg.policy = PolicyKind::readahead;
  const auto seq = run(make(Workload::sequential, 2000, 4, 1), cfg);
  cfg.policy = PolicyKind::stride;
  const auto str = run(make(Workload::strided, 2000, 4, 1, 3), cfg);

  // "Approximately zero" is pinned to at most 1% of accesses.
  const auto linked = make(Workload::linked_traversal, 1000, 10, 7);
  cfg.capacity_fraction = 0.3;
  cfg.policy = PolicyKind::readahead;
  const auto ra_linked = run(linked, cfg);
  cfg.policy = PolicyKind::stride;
  const auto st_linked = run(linked, cfg);
  const double limit = 0.01 * static_cast<double>(linked.events.size());

  const bool pass = seq.accuracy >= 0.95 && str.accuracy >= 0.9 &&
                    static_cast<double>(ra_linked.prefetch_useful) <= limit &&
                    static_cast<double>(st_linked.prefetch_useful) <= limit;
  return {pass, fmt("readahead seq accuracy %.4f (>= 0.95), stride stride-3 accuracy %.4f (>= 0.9), "
                    "useful on linked: readahead %llu, stride %llu (<= %.0f)",
                    seq.accuracy, str.accuracy, static_cast<unsigned long long>(ra_linked.prefetch_useful),
                    static_cast<unsigned long long>(st_linked.prefetch_useful), limit)};
}

Outcome decoupling() {
  const auto trace = make(Workload::linked_traversal, 1000, 10, 7);
  const auto model = fixture_model();
  const std::uint32_t k = model->vocab();

  // v = r + K*q  ->  r + K*sigma(q), sigma a random permutation of the
  // quotients in use shifted far away.
  std::mt19937_64 rng(5);
  std::set<Vpn> quotients;
  for (const auto& e : trace.events) quotients.insert(e.vpn / k);
  std::vector<Vpn> from(quotients.begin(), quotients.end()), to = from;
  std::shuffle(to.begin(), to.end(), rng);
  std::map<Vpn, Vpn> sigma;
  for (std::size_t i = 0; i < from.size(); ++i) sigma[from[i]] = to[i] + 1000003;
  Trace moved = trace;
  for (auto& e : moved.events) e.vpn = e.vpn % k + k * sigma.at(e.vpn / k);

  const auto a = collect_miss_log(trace, 0.3);
  const auto b = collect_miss_log(moved, 0.3);
  if (a.events.size() != b.events.size()) return {false, "miss streams differ in length"};

  Predictor pa(model, {}), pb(model, {});
  FutureMapStore sa, sb;
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    pa.on_miss(sa, a.events[i]);
    pb.on_miss(sb, b.events[i]);
    const auto& ra = pa.last_ranking();
    const auto& rb = pb.last_ranking();
    bool same = ra.size() == rb.size();
    for (std::size_t j = 0; same && j < ra.size(); ++j) {
      same = ra[j].ordinal == rb[j].ordinal &&
             std::bit_cast<std::uint32_t>(ra[j].probability) == std::bit_cast<std::uint32_t>(rb[j].probability);
    }
    differing += !same;
  }
  return {differing == 0, fmt("%zu of %zu ranked predictions differ after relayout", differing, a.events.size())};
}

Outcome inference_latency() {
  const auto model = fixture_model();
  std::mt19937_64 rng(1);
  const auto stream = testing::random_tokens(rng, 101000, model->vocab());
  const auto st = bench_inference(*model, stream, 1000);
  return {st.mean_ns <= 5000.0,
          fmt("mean %.0f ns, p50 %.0f ns, p99 %.0f ns over %zu steps (bound 5000 ns)", st.mean_ns, st.p50_ns,
              st.p99_ns, st.samples)};
}

Outcome end_to_end() {
  const auto trace = make(Workload::linked_traversal, 1000, 10, 7);
  const std::vector<double> caps{0.3, 1.0};
  const std::vector<PolicyKind> pols{PolicyKind::readahead, PolicyKind::memix};
  const auto rows = sweep(trace, caps, pols, SimConfig{}, fixture_model(), 1);
  const auto& ra = rows[0];
  const auto& mx = rows[2];
  const bool pass = mx.report.prefetch_useful >= 3 * ra.report.prefetch_useful &&
                    mx.report.prefetch_useful > 0 && mx.normalized < ra.normalized;
  return {pass, fmt("useful memix %llu vs readahead %llu (need >= 3x); normalized slowdown memix %.4f vs "
                    "readahead %.4f",
                    static_cast<unsigned long long>(mx.report.prefetch_useful),
                    static_cast<unsigned long long>(ra.report.prefetch_useful), mx.normalized, ra.normalized)};
}

}  // namespace
}  // namespace memix

int main() {
  using namespace memix;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"parameter-budget", parameter_budget},
      {"recurrent-parallel-equivalence", recurrent_parallel_equivalence},
      {"lru-equivalence", lru_equivalence},
      {"conservation-and-capacity", conservation_invariants},
      {"oracle-dominance", oracle_dominance},
      {"rule-policy-sanity", rule_policy_sanity},
      {"decoupling", decoupling},
      {"inference-latency", inference_latency},
      {"end-to-end-linked", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
