#include "memix/workload.hpp"

#include <algorithm>
#include <array>
#include <random>

#include "memix/error.hpp"
#include "rng.hpp"

namespace memix {

namespace {

constexpr Pc site(unsigned branch) { return kPcBase + 0x10 * Pc{branch}; }

struct Visit {
  std::uint64_t node;
  unsigned branch;
};

// One iteration of node visits; the generated trace repeats it.
using VisitOrder = std::vector<Visit>;

VisitOrder linked_order(std::uint64_t nodes) {
  VisitOrder order;
  order.reserve(nodes);
  order.push_back({0, 0});  // list head load
  for (std::uint64_t i = 1; i < nodes; ++i) order.push_back({i, 1});  // next-pointer chase
  return order;
}

// Root-to-leaf descents of a complete binary tree in heap order. Branch 0 is
// the root load, 1 and 2 are the left/right child loads.
VisitOrder tree_order(std::uint64_t nodes, std::uint64_t min_visits, std::mt19937_64& rng) {
  VisitOrder order;
  while (order.size() < min_visits) {
    std::uint64_t n = 0;
    order.push_back({0, 0});
    while (2 * n + 1 < nodes) {
      const bool right = detail::uniform_below(rng, 2) == 1 && 2 * n + 2 < nodes;
      n = right ? 2 * n + 2 : 2 * n + 1;
      order.push_back({n, right ? 2u : 1u});
    }
  }
  return order;
}

// Random walk over a fixed sparse graph. Edge 0 of node i always points at
// i+1 (mod n) so the graph is strongly connected; the walk finishes by
// following edge 0 to the last node, whose edge 0 returns to node 0, so the
// wrap into the next iteration is itself an edge and per-node fanout never
// exceeds the out-degree.
VisitOrder graph_order(std::uint64_t nodes, std::uint32_t max_degree, std::uint64_t min_visits,
                       std::mt19937_64& rng) {
  std::vector<std::vector<std::uint64_t>> edges(nodes);
  for (std::uint64_t i = 0; i < nodes; ++i) {
    const auto degree = 1 + detail::uniform_below(rng, max_degree);
    edges[i].push_back((i + 1) % nodes);
    while (edges[i].size() < degree) edges[i].push_back(detail::uniform_below(rng, nodes));
  }
  VisitOrder order;
  std::uint64_t n = 0;
  order.push_back({0, 0});
  while (order.size() < min_visits) {
    const auto e = static_cast<unsigned>(detail::uniform_below(rng, edges[n].size()));
    n = edges[n][e];
    order.push_back({n, 1 + e});
  }
  while (n != nodes - 1) {
    n = edges[n][0];
    order.push_back({n, 1});
  }
  return order;
}

}  // namespace

std::string_view to_string(Workload w) noexcept {
  switch (w) {
    case Workload::sequential: return "seq";
    case Workload::strided: return "stride";
    case Workload::linked_traversal: return "linked";
    case Workload::tree_descent: return "tree";
    case Workload::graph_walk: return "graph";
  }
  return "?";
}

std::optional<Workload> parse_workload(std::string_view name) noexcept {
  constexpr std::array all = {Workload::sequential, Workload::strided, Workload::linked_traversal,
                              Workload::tree_descent, Workload::graph_walk};
  for (auto w : all) {
    if (name == to_string(w)) return w;
  }
  if (name == "sequential") return Workload::sequential;
  if (name == "strided") return Workload::strided;
  if (name == "linked_traversal") return Workload::linked_traversal;
  if (name == "tree_descent") return Workload::tree_descent;
  if (name == "graph_walk") return Workload::graph_walk;
  return std::nullopt;
}

Trace gen_synthetic(Workload workload, const WorkloadParams& p, std::uint64_t seed) {
  if (p.footprint_pages == 0) throw ConfigError("footprint must be at least one page");
  if (p.iterations == 0) throw ConfigError("iteration count must be positive");
  if (workload == Workload::strided && p.stride == 0) throw ConfigError("stride must be positive");
  if (workload == Workload::graph_walk && p.max_out_degree == 0) {
    throw ConfigError("graph out-degree must be positive");
  }

  Trace trace;
  const auto limit = trace.vpn_limit();
  const auto span = workload == Workload::strided ? (p.footprint_pages - 1) * p.stride + 1 : p.footprint_pages;
  if (p.base_vpn >= limit || span > limit - p.base_vpn) throw ConfigError("workload exceeds address space");

  if (workload == Workload::sequential || workload == Workload::strided) {
    const auto step = workload == Workload::strided ? p.stride : 1;
    trace.events.reserve(p.footprint_pages * p.iterations);
    for (std::uint64_t it = 0; it < p.iterations; ++it) {
      for (std::uint64_t i = 0; i < p.footprint_pages; ++i) {
        trace.events.push_back({p.base_vpn + i * step, site(0)});
      }
    }
    return trace;
  }

  std::mt19937_64 rng(seed);
  const auto layout = detail::random_permutation(rng, p.footprint_pages);
  const auto visits = p.walk_length == 0 ? p.footprint_pages : p.walk_length;

  VisitOrder order;
  switch (workload) {
    case Workload::linked_traversal: order = linked_order(p.footprint_pages); break;
    case Workload::tree_descent: order = tree_order(p.footprint_pages, visits, rng); break;
    case Workload::graph_walk: order = graph_order(p.footprint_pages, p.max_out_degree, visits, rng); break;
    default: break;
  }

  trace.events.reserve(order.size() * p.iterations);
  for (std::uint64_t it = 0; it < p.iterations; ++it) {
    for (const auto& v : order) trace.events.push_back({p.base_vpn + layout[v.node], site(v.branch)});
  }
  return trace;
}

}  // namespace memix
