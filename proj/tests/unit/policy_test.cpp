#include <gtest/gtest.h>

#include <limits>
#include <set>

#include "memix/error.hpp"
#include "memix/policy.hpp"

namespace memix {
namespace {

class FakeMemory : public ResidencyView {
 public:
  explicit FakeMemory(std::size_t capacity = 1000) : capacity_(capacity) {}
  bool resident(Vpn v) const override { return resident_.count(v) != 0; }
  bool inflight(Vpn v) const override { return inflight_.count(v) != 0; }
  std::size_t capacity_pages() const override { return capacity_; }
  std::set<Vpn> resident_, inflight_;

 private:
  std::size_t capacity_;
};

std::vector<Vpn> miss(PrefetchPolicy& p, Vpn vpn, Pc pc = 0, std::size_t index = 0) {
  static const FakeMemory mem;
  std::vector<Vpn> out;
  p.on_miss({{vpn, pc}, index}, mem, out);
  return out;
}

TEST(Readahead, SequentialRunTriggersWindow) {
  ReadaheadPolicy p;
  EXPECT_TRUE(miss(p, 10).empty());
  miss(p, 11);
  EXPECT_EQ(miss(p, 12), (std::vector<Vpn>{13, 14, 15, 16, 17, 18, 19, 20}));
}

TEST(Readahead, NonSequentialMissIsIgnored) {
  ReadaheadPolicy p;
  miss(p, 10);
  miss(p, 17);
  EXPECT_TRUE(miss(p, 3).empty());
}

TEST(Readahead, MissPastWindowEndContinuesRun) {
  ReadaheadPolicy p(4);
  miss(p, 10);
  EXPECT_EQ(miss(p, 11), (std::vector<Vpn>{12, 13, 14, 15}));
  // 12..15 hit locally; the next fault is just past the window.
  EXPECT_EQ(miss(p, 16), (std::vector<Vpn>{17, 18, 19, 20}));
}

TEST(Readahead, RejectsZeroWindow) { EXPECT_THROW(ReadaheadPolicy(0), ConfigError); }

TEST(Stride, EmitsAfterRepeatedDelta) {
  StridePolicy p;
  EXPECT_TRUE(miss(p, 0, 7).empty());
  EXPECT_TRUE(miss(p, 3, 7).empty());
  EXPECT_EQ(miss(p, 6, 7), (std::vector<Vpn>{9}));
}

TEST(Stride, TracksEachPcSeparately) {
  StridePolicy p;
  miss(p, 100, 1);
  miss(p, 0, 2);
  miss(p, 90, 1);
  miss(p, 5, 2);
  EXPECT_EQ(miss(p, 80, 1), (std::vector<Vpn>{70}));
  EXPECT_EQ(miss(p, 10, 2), (std::vector<Vpn>{15}));
  EXPECT_TRUE(miss(p, 11, 2).empty());
}

TEST(Stride, NeverWrapsBelowZero) {
  StridePolicy p;
  miss(p, 20, 1);
  miss(p, 10, 1);
  EXPECT_TRUE(miss(p, 0, 1).empty());
}

TEST(LeapMajority, AlternatingDeltasHaveNoMajority) {
  LeapMajorityPolicy p;
  Vpn v = 100;
  for (int i = 0; i < 64; ++i) {
    v = i % 2 ? v - 1 : v + 1;
    EXPECT_TRUE(miss(p, v).empty());
  }
  EXPECT_FALSE(p.majority_delta());
}

TEST(LeapMajority, FindsTrendAmidNoise) {
  LeapMajorityPolicy p(8, 8);
  std::vector<Vpn> trace{0, 4, 8, 100, 104, 108, 112, 116, 120, 124};
  for (auto v : trace) miss(p, v);
  EXPECT_EQ(p.majority_delta(), 4);
  EXPECT_EQ(miss(p, 128), (std::vector<Vpn>{132}));
}

TEST(LeapMajority, WindowDoublesAndHalves) {
  LeapMajorityPolicy p(32, 8);
  EXPECT_EQ(p.window(), 1u);
  p.on_prefetch_used(0);
  EXPECT_EQ(p.window(), 2u);
  p.on_prefetch_used(0);
  p.on_prefetch_used(0);
  p.on_prefetch_used(0);
  EXPECT_EQ(p.window(), 8u);
  p.on_prefetch_wasted(0);
  EXPECT_EQ(p.window(), 4u);
  for (int i = 0; i < 5; ++i) p.on_prefetch_wasted(0);
  EXPECT_EQ(p.window(), 1u);

  for (Vpn v = 0; v < 40 * 3; v += 3) miss(p, v);
  p.on_prefetch_used(0);
  EXPECT_EQ(miss(p, 120), (std::vector<Vpn>{123, 126}));
}

TEST(Oracle, PrefetchesUpcomingAbsentPagesInOrder) {
  const std::vector<AccessEvent> trace{{1, 0}, {2, 0}, {3, 0}, {2, 0}, {4, 0}, {5, 0}};
  OraclePolicy p(trace, 2);
  FakeMemory mem(10);
  mem.resident_ = {3};
  std::vector<Vpn> out;
  p.on_miss({trace[0], 0}, mem, out);
  EXPECT_EQ(out, (std::vector<Vpn>{2, 4}));
}

TEST(Oracle, SkipsInflightAndStopsAtCapacityHorizon) {
  const std::vector<AccessEvent> trace{{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}};
  OraclePolicy p(trace, 8);
  FakeMemory mem(3);
  mem.inflight_ = {2};
  std::vector<Vpn> out;
  p.on_miss({trace[0], 0}, mem, out);
  // Pages 1, 2, 3 fill the horizon of three distinct pages.
  EXPECT_EQ(out, (std::vector<Vpn>{3}));
}

TEST(Oracle, IgnoresRepeatsOfFaultingPage) {
  const std::vector<AccessEvent> trace{{1, 0}, {1, 0}, {1, 0}, {9, 0}};
  OraclePolicy p(trace, 1);
  FakeMemory mem(2);
  std::vector<Vpn> out;
  p.on_miss({trace[0], 0}, mem, out);
  EXPECT_EQ(out, (std::vector<Vpn>{9}));
}

TEST(OffsetPage, GuardsAddressSpaceEdges) {
  constexpr auto max = std::numeric_limits<Vpn>::max();
  EXPECT_EQ(offset_page(5, 3), Vpn{8});
  EXPECT_EQ(offset_page(5, -5), Vpn{0});
  EXPECT_FALSE(offset_page(5, -6));
  EXPECT_FALSE(offset_page(max, 1));
  EXPECT_EQ(offset_page(max, std::numeric_limits<std::int64_t>::min()), max - (Vpn{1} << 63));
  EXPECT_FALSE(offset_page(0, std::numeric_limits<std::int64_t>::min()));
}

TEST(PolicyNames, RoundTrip) {
  for (auto k : {PolicyKind::none, PolicyKind::readahead, PolicyKind::stride, PolicyKind::leap_majority,
                 PolicyKind::memix, PolicyKind::oracle}) {
    EXPECT_EQ(parse_policy(to_string(k)), k);
  }
  EXPECT_FALSE(parse_policy("lru"));
}

}  // namespace
}  // namespace memix
