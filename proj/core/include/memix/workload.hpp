#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "memix/trace.hpp"

namespace memix {

enum class Workload {
  sequential,
  strided,
  linked_traversal,
  tree_descent,
  graph_walk,
};

std::string_view to_string(Workload w) noexcept;
std::optional<Workload> parse_workload(std::string_view name) noexcept;

struct WorkloadParams {
  std::uint64_t footprint_pages = 1024;
  std::uint64_t iterations = 4;
  Vpn base_vpn = 0;
  // Page distance between consecutive accesses of the strided workload.
  std::uint64_t stride = 1;
  // GraphWalk: each node gets a random out-degree in [1, max_out_degree].
  std::uint32_t max_out_degree = 8;
  // Accesses per iteration for TreeDescent and GraphWalk; 0 means footprint.
  std::uint64_t walk_length = 0;
};

// Base of the synthetic code-site addresses; each generator branch gets
// kPcBase + 0x10 * branch.
inline constexpr Pc kPcBase = 0x401000;

// Deterministic for a fixed seed. The pointer-chasing workloads repeat one
// node-visit order every iteration over a seeded random page layout.
Trace gen_synthetic(Workload workload, const WorkloadParams& params, std::uint64_t seed);

}  // namespace memix
