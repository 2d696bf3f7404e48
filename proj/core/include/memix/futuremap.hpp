#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "memix/types.hpp"

namespace memix {

// Resolves model ordinals to concrete successor pages for one page. Slot i
// holds the most recently observed successor whose vpn mod K equals i.
class FutureMap {
 public:
  FutureMap(Vpn owner, std::uint32_t vocab);

  Vpn owner() const noexcept { return owner_; }
  std::uint32_t vocab() const noexcept { return static_cast<std::uint32_t>(slots_.size()); }
  std::optional<Vpn> slot(std::uint32_t ordinal) const;
  std::size_t occupied() const noexcept;

  std::uint64_t hits() const noexcept { return hits_; }
  std::uint64_t updates() const noexcept { return updates_; }

  void record(Vpn successor) noexcept;
  std::optional<Vpn> resolve(std::uint32_t ordinal) noexcept;

 private:
  static constexpr Vpn kEmpty = ~Vpn{0};

  Vpn owner_;
  std::vector<Vpn> slots_;
  std::uint64_t hits_ = 0;
  std::uint64_t updates_ = 0;
};

// Maps are created on the first transition out of a page and evicted least
// recently updated once `capacity` maps exist. Single writer.
class FutureMapStore {
 public:
  static constexpr std::size_t kDefaultCapacity = std::size_t{1} << 20;
  // Per-map bookkeeping beyond the slot array, for memory accounting.
  static constexpr std::size_t kMapHeaderBytes = 32;

  explicit FutureMapStore(std::uint32_t vocab = kDefaultVocab, std::size_t capacity = kDefaultCapacity);

  std::uint32_t vocab() const noexcept { return vocab_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return index_.size(); }
  std::uint64_t evictions() const noexcept { return evictions_; }

  void observe_transition(Vpn from, Vpn to);
  // Empty for an unknown page or an empty slot. Throws ContractViolation when
  // ordinal >= vocab.
  std::optional<Vpn> resolve(Vpn from, std::uint32_t ordinal);
  const FutureMap* find(Vpn vpn) const;

  // Number of maps with each non-empty slot count.
  std::map<std::size_t, std::size_t> fanout_histogram() const;
  std::size_t memory_bytes() const noexcept;

  // [{"vpn": v, "slots": [vpn or null, ...]}, ...] ordered by vpn.
  nlohmann::json to_json() const;

  void clear();

 private:
  std::uint32_t vocab_;
  std::size_t capacity_;
  std::uint64_t evictions_ = 0;
  // Front is the most recently updated map.
  std::list<FutureMap> order_;
  std::unordered_map<Vpn, std::list<FutureMap>::iterator> index_;
};

}  // namespace memix
