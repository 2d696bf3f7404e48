#include "memix/futuremap.hpp"

#include <algorithm>
#include <string>

#include <nlohmann/json.hpp>

#include "memix/error.hpp"

namespace memix {

FutureMap::FutureMap(Vpn owner, std::uint32_t vocab) : owner_(owner), slots_(vocab, kEmpty) {}

std::optional<Vpn> FutureMap::slot(std::uint32_t ordinal) const {
  if (ordinal >= slots_.size() || slots_[ordinal] == kEmpty) return std::nullopt;
  return slots_[ordinal];
}

std::size_t FutureMap::occupied() const noexcept {
  return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(), [](Vpn v) { return v != kEmpty; }));
}

void FutureMap::record(Vpn successor) noexcept {
  slots_[successor % slots_.size()] = successor;
  ++updates_;
}

std::optional<Vpn> FutureMap::resolve(std::uint32_t ordinal) noexcept {
  auto v = slot(ordinal);
  if (v) ++hits_;
  return v;
}

FutureMapStore::FutureMapStore(std::uint32_t vocab, std::size_t capacity) : vocab_(vocab), capacity_(capacity) {
  if (vocab < 2) throw ConfigError("future map vocab must be at least 2");
  if (capacity == 0) throw ConfigError("future map store capacity must be positive");
}

void FutureMapStore::observe_transition(Vpn from, Vpn to) {
  auto it = index_.find(from);
  if (it == index_.end()) {
    if (index_.size() == capacity_) {
      index_.erase(order_.back().owner());
      order_.pop_back();
      ++evictions_;
    }
    order_.emplace_front(from, vocab_);
    it = index_.emplace(from, order_.begin()).first;
  } else if (it->second != order_.begin()) {
    order_.splice(order_.begin(), order_, it->second);
  }
  it->second->record(to);
}

std::optional<Vpn> FutureMapStore::resolve(Vpn from, std::uint32_t ordinal) {
  if (ordinal >= vocab_) throw ContractViolation("ordinal " + std::to_string(ordinal) + " out of range");
  auto it = index_.find(from);
  if (it == index_.end()) return std::nullopt;
  return it->second->resolve(ordinal);
}

const FutureMap* FutureMapStore::find(Vpn vpn) const {
  auto it = index_.find(vpn);
  return it == index_.end() ? nullptr : &*it->second;
}

std::map<std::size_t, std::size_t> FutureMapStore::fanout_histogram() const {
  std::map<std::size_t, std::size_t> h;
  for (const auto& m : order_) ++h[m.occupied()];
  return h;
}

std::size_t FutureMapStore::memory_bytes() const noexcept {
  return size() * (std::size_t{vocab_} * sizeof(Vpn) + kMapHeaderBytes);
}

nlohmann::json FutureMapStore::to_json() const {
  std::vector<const FutureMap*> maps;
  maps.reserve(order_.size());
  for (const auto& m : order_) maps.push_back(&m);
  std::sort(maps.begin(), maps.end(), [](auto* a, auto* b) { return a->owner() < b->owner(); });

  auto out = nlohmann::json::array();
  for (const auto* m : maps) {
    auto slots = nlohmann::json::array();
    for (std::uint32_t i = 0; i < vocab_; ++i) {
      if (auto v = m->slot(i)) {
        slots.push_back(*v);
      } else {
        slots.push_back(nullptr);
      }
    }
    out.push_back({{"vpn", m->owner()}, {"slots", std::move(slots)}});
  }
  return out;
}

void FutureMapStore::clear() {
  order_.clear();
  index_.clear();
}

}  // namespace memix
