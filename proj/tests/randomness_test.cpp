#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "zerotemp/random.hpp"
#include "zerotemp/statistics.hpp"

using namespace zerotemp;

TEST(CounterRng, OpenUnitIntervalAndBelow) {
  CounterRng r(99);
  for (int k = 0; k < 100000; ++k) {
    const double u = r.next_open01();
    ASSERT_GT(u, 0.0);
    ASSERT_LE(u, 1.0);
    ASSERT_LT(r.next_below(7), 7u);
  }
}

TEST(EventStream, SingleSiteGapsHaveUnitMean) {
  EventStream s(12345, 1);
  double prev = 0, sum = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Event e = s.next();
    ASSERT_EQ(e.site, 0);
    ASSERT_GT(e.time, prev);
    sum += e.time - prev;
    prev = e.time;
  }
  EXPECT_NEAR(sum / n, 1.0, 0.01);
}

TEST(EventStream, SameSeedSameEvents) {
  EventStream a(77, 1000), b(77, 1000), c(78, 1000);
  bool differs = false;
  for (int k = 0; k < 10000; ++k) {
    const Event ea = a.next();
    ASSERT_EQ(ea, b.next());
    differs = differs || !(ea == c.next());
  }
  EXPECT_TRUE(differs);
}

TEST(EventStream, SiteHistogramUniform) {
  EventStream s(2024, 100);
  std::vector<std::uint64_t> counts(100, 0);
  for (int k = 0; k < 1000000; ++k) ++counts[static_cast<std::size_t>(s.next().site)];
  EXPECT_GT(stats::chi_square_uniform(counts).p, 0.001);
}

TEST(EventStream, CoinIsFair) {
  EventStream s(5, 10);
  std::vector<std::uint64_t> counts(2, 0);
  for (int k = 0; k < 200000; ++k) ++counts[s.next().coin == kPlus];
  EXPECT_GT(stats::chi_square_uniform(counts).p, 0.001);
}

class GapDistribution : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GapDistribution, KolmogorovSmirnovAgainstExponential) {
  const std::uint64_t n = GetParam();
  EventStream s(31 + n, n);
  std::vector<double> gaps;
  double prev = 0;
  for (int k = 0; k < 20000; ++k) {
    const double t = s.next().time;
    gaps.push_back(t - prev);
    prev = t;
  }
  const auto ks = stats::ks_exponential(gaps, static_cast<double>(n));
  EXPECT_GT(ks.p, 0.001) << "D=" << ks.statistic;
  // The same test must reject a wrong rate.
  EXPECT_LT(stats::ks_exponential(gaps, 1.1 * static_cast<double>(n)).p, 0.001);
}

INSTANTIATE_TEST_SUITE_P(Sizes, GapDistribution, ::testing::Values(1u, 10u, 1000u));

TEST(EventStream, CursorResumesExactly) {
  EventStream a(9, 50);
  for (int k = 0; k < 1234; ++k) a.next();
  const auto text = a.cursor().serialize();
  EventStream b(StreamCursor::parse(text));
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.next(), b.next());
}

TEST(EventStream, CursorWithPendingEvent) {
  EventStream a(9, 50);
  while (a.next(3.0)) {
  }
  // One event beyond t=3 is buffered; the cursor must point before it.
  EventStream b(a.cursor());
  const Event ea = a.next();
  EXPECT_GT(ea.time, 3.0);
  EXPECT_EQ(ea, b.next());
}

TEST(EventStream, BoundedNextKeepsPending) {
  EventStream a(4, 10), ref(4, 10);
  std::vector<Event> got;
  for (double t = 0.5; t <= 20.0; t += 0.5)
    while (auto e = a.next(t)) got.push_back(*e);
  for (const auto& e : got) ASSERT_EQ(e, ref.next());
  EXPECT_GT(got.size(), 100u);
}

TEST(StreamCursor, RejectsGarbage) { EXPECT_THROW(StreamCursor::parse("nope"), InvalidParameter); }

TEST(DeriveSeed, DistinctLabelsDistinctSeeds) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 200; ++r) {
    seen.insert(derive_seed(1, {"camp", r, "events"}));
    seen.insert(derive_seed(1, {"camp", r, "init"}));
    seen.insert(derive_seed(2, {"camp", r, "events"}));
    seen.insert(derive_seed(1, {"camq", r, "events"}));
  }
  EXPECT_EQ(seen.size(), 800u);
  EXPECT_EQ(derive_seed(1, {"camp", 3, "events"}), derive_seed(1, {"camp", 3, "events"}));
}

TEST(DeriveSeed, ReplicaStreamsLookIndependent) {
  // Correlation of first gaps across neighbouring replicas is near zero.
  const int n = 5000;
  std::vector<double> a, b;
  for (int r = 0; r < n; ++r) {
    a.push_back(EventStream(derive_seed(3, {"x", static_cast<std::uint64_t>(r)}), 1).next().time);
    b.push_back(EventStream(derive_seed(3, {"x", static_cast<std::uint64_t>(r + 1)}), 1).next().time);
  }
  const double ma = stats::mean(a), mb = stats::mean(b);
  double cov = 0;
  for (int k = 0; k < n; ++k) cov += (a[k] - ma) * (b[k] - mb);
  cov /= n - 1;
  EXPECT_LT(std::abs(cov / std::sqrt(stats::variance(a) * stats::variance(b))), 4.0 / std::sqrt(double(n)));
}

TEST(RestrictedView, FullMaskIsIdentity) {
  EventStream a(8, 20), b(8, 20);
  std::vector<std::uint8_t> mask(20, 1);
  const auto remap = mask_remap(mask);
  RestrictedView view(a, remap);
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(*view.next(1e9), b.next());
}

TEST(RestrictedView, SingletonKeepsTimestamps) {
  EventStream a(8, 20), b(8, 20);
  std::vector<std::uint8_t> mask(20, 0);
  mask[7] = 1;
  const auto remap = mask_remap(mask);
  RestrictedView view(a, remap);
  std::vector<Event> expect;
  while (auto e = b.next(100.0))
    if (e->site == 7) expect.push_back(*e);
  std::vector<Event> got;
  while (auto e = view.next(100.0)) got.push_back(*e);
  EXPECT_EQ(got, expect);
  EXPECT_GT(got.size(), 50u);
}

TEST(RestrictedView, ComplementaryMasksPartitionParent) {
  std::vector<std::uint8_t> m1(30), m2(30);
  for (int k = 0; k < 30; ++k) {
    m1[k] = (k % 3 == 0);
    m2[k] = !m1[k];
  }
  const auto r1 = mask_remap(m1), r2 = mask_remap(m2);
  EventStream p1(21, 30), p2(21, 30), full(21, 30);
  RestrictedView v1(p1, r1), v2(p2, r2);
  std::vector<Event> merged;
  while (auto e = v1.next(50.0)) merged.push_back(*e);
  while (auto e = v2.next(50.0)) merged.push_back(*e);
  std::sort(merged.begin(), merged.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
  std::vector<Event> all;
  while (auto e = full.next(50.0)) all.push_back(*e);
  EXPECT_EQ(merged, all);
}

TEST(RestrictedView, EmptyMaskIsEmpty) {
  EventStream a(1, 5);
  std::vector<std::uint8_t> mask(5, 0);
  const auto remap = mask_remap(mask);
  RestrictedView view(a, remap);
  EXPECT_FALSE(view.next(100.0).has_value());
}

TEST(RestrictedView, RemapsIndices) {
  EventStream a(2, 4), b(2, 4);
  const std::vector<std::int32_t> remap{-1, 0, -1, 1};
  RestrictedView view(a, remap);
  while (auto e = b.next(30.0)) {
    if (remap[static_cast<std::size_t>(e->site)] < 0) continue;
    const auto v = view.next(30.0);
    ASSERT_TRUE(v);
    EXPECT_EQ(v->site, remap[static_cast<std::size_t>(e->site)]);
    EXPECT_EQ(v->time, e->time);
  }
}
