#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <vector>

#include "zerotemp/dynamics.hpp"
#include "zerotemp/geometry.hpp"
#include "zerotemp/rejection_free.hpp"
#include "zerotemp/statistics.hpp"

using namespace zerotemp;

namespace {

DynamicsState plus_box(int L, int d, Spin fill, Engine engine = Engine::graphical) {
  Region box = hypercube(L, d);
  const auto bc = BoundaryCondition::uniform(box, kPlus);
  const auto n = box.size();
  return DynamicsState(Topology::build(std::move(box)), bc, SpinField(n, fill), engine);
}

std::vector<Spin> random_spins(std::size_t n, std::uint64_t seed, double p_minus = 0.5) {
  CounterRng r(seed);
  std::vector<Spin> v(n);
  for (auto& s : v) s = r.next_open01() < p_minus ? kMinus : kPlus;
  return v;
}

// Expected absorption time of the 2x2 box with + boundary, from the generator of the 16-state chain.
double exact_mean_absorption_2x2() {
  // Sites (1,1),(1,2),(2,1),(2,2) as bits 0..3; each has two inner neighbours and two + boundary sites.
  const std::array<std::array<int, 2>, 4> nb{{{1, 2}, {0, 3}, {0, 3}, {1, 2}}};
  auto spin = [](int state, int k) { return (state >> k & 1) ? -1 : 1; };  // bit set = minus
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(15, 15);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(15, -1.0);
  for (int s = 1; s < 16; ++s) {
    const int row = s - 1;
    for (int k = 0; k < 4; ++k) {
      const int h = 2 + spin(s, nb[k][0]) + spin(s, nb[k][1]);
      const int sk = spin(s, k);
      double rate = 0;
      if (h == 0) rate = 0.5;
      else if ((h > 0) != (sk > 0)) rate = 1.0;
      if (rate == 0) continue;
      const int t = s ^ (1 << k);
      A(row, row) -= rate;
      if (t != 0) A(row, t - 1) += rate;
    }
  }
  const Eigen::VectorXd m = A.fullPivLu().solve(b);
  return m(15 - 1);
}

}  // namespace

TEST(LocalRule, Examples) {
  const std::vector<Spin> a{kPlus, kPlus, kPlus, kMinus};
  EXPECT_EQ(local_rule(a, 2, kMinus), kPlus);
  const std::vector<Spin> tie{kPlus, kPlus, kMinus, kMinus};
  EXPECT_EQ(local_rule(tie, 2, kMinus), kMinus);
  EXPECT_EQ(local_rule(tie, 2, kPlus), kPlus);
  const std::vector<Spin> d4{kPlus, kPlus, kPlus, kPlus, kPlus, kMinus, kMinus, kMinus};
  EXPECT_EQ(local_rule(d4, 4, kMinus), kPlus);
  EXPECT_THROW(local_rule(a, 3, kPlus), InvalidInput);
}

TEST(Topology, LinksCoverAllNeighbours) {
  const auto topo = Topology::build(hypercube(3, 2));
  EXPECT_EQ(topo->degree(), 4);
  EXPECT_EQ(topo->boundary_region().size(), 12u);
  int inner = 0, outer = 0;
  for (std::size_t i = 0; i < topo->size(); ++i)
    for (auto l : topo->links(i)) (l >= 0 ? inner : outer)++;
  EXPECT_EQ(inner, 24);
  EXPECT_EQ(outer, 12);
}

TEST(Apply, AllPlusIsAbsorbing) {
  auto st = plus_box(6, 3, kPlus);
  EventStream s(1, st.topology().size());
  for (int k = 0; k < 1000000; ++k) {
    const auto r = st.apply(s.next());
    ASSERT_FALSE(r.flipped());
  }
  EXPECT_TRUE(st.field().all_plus());
}

TEST(Apply, StaysPlusAfterAbsorption) {
  auto st = plus_box(6, 2, kMinus);
  EventStream s(3, st.topology().size());
  const auto res = run_to_absorption(st, s, 1e6);
  ASSERT_TRUE(res.t_plus);
  for (int k = 0; k < 1000000; ++k) ASSERT_FALSE(st.apply(s.next()).flipped());
}

TEST(Apply, RejectsBadEvents) {
  auto st = plus_box(2, 2, kMinus);
  EXPECT_THROW(st.apply(Event{1.0, 4, kPlus}), InvalidInput);
  st.apply(Event{1.0, 0, kPlus});
  EXPECT_THROW(st.apply(Event{0.5, 0, kPlus}), InvalidInput);
}

TEST(Apply, SingleSiteBoxAbsorbsAtFirstEvent) {
  auto st = plus_box(1, 2, kMinus);
  EventStream s(99, 1), ref(99, 1);
  const auto res = run_to_absorption(st, s, 100.0);
  ASSERT_TRUE(res.t_plus);
  EXPECT_EQ(*res.t_plus, ref.next().time);
  EXPECT_EQ(res.events, 1u);
}

TEST(Apply, FrozenSiteIgnoresEvents) {
  auto st = plus_box(1, 2, kMinus);
  st.add_filter(FreezeRegion{{1}, 5.0});
  EXPECT_EQ(st.apply(Event{1.0, 0, kPlus}).outcome, Outcome::frozen);
  EXPECT_EQ(st.field()[0], kMinus);
  EXPECT_EQ(st.apply(Event{5.0, 0, kPlus}).outcome, Outcome::flipped);
}

TEST(Apply, BlockMinusOutsideCancels) {
  Region box = hypercube(3, 2);
  auto bc = BoundaryCondition::uniform(box, kMinus);
  const auto n = box.size();
  DynamicsState st(Topology::build(std::move(box)), bc, SpinField(n, kPlus));
  std::vector<std::uint8_t> prot(n, 0);
  prot[4] = 1;  // centre
  st.add_filter(BlockMinusOutside{prot});
  // Corner (index 0) has two minus boundary neighbours and two plus inner ones: tie.
  EXPECT_EQ(st.apply(Event{1.0, 0, kMinus}).outcome, Outcome::canceled);
  EXPECT_EQ(st.field()[0], kPlus);
  EXPECT_EQ(st.apply(Event{1.5, 0, kPlus}).outcome, Outcome::unchanged);
}

TEST(Apply, FilterOrderDoesNotChangeTrajectory) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Region box = hypercube(6, 2);
    const auto topo = Topology::build(box);
    const auto init = random_spins(box.size(), seed);
    CounterRng r(seed * 7);
    std::vector<std::uint8_t> frozen(box.size()), prot(box.size());
    for (std::size_t k = 0; k < box.size(); ++k) {
      frozen[k] = r.next_open01() < 0.3;
      prot[k] = r.next_open01() < 0.5;
    }
    const auto bc = BoundaryCondition::from_rule(box, [&](const Site& s) { return (s[0] + s[1]) % 3 ? kPlus : kMinus; });
    DynamicsState a(topo, bc, SpinField(init)), b(topo, bc, SpinField(init));
    a.add_filter(FreezeRegion{frozen, 3.0});
    a.add_filter(BlockMinusOutside{prot});
    b.add_filter(BlockMinusOutside{prot});
    b.add_filter(FreezeRegion{frozen, 3.0});
    EventStream s(seed, box.size());
    while (auto e = s.next(10.0)) {
      a.apply(*e);
      b.apply(*e);
      ASSERT_EQ(a.field(), b.field());
    }
  }
}

TEST(SpinField, MinusCountMatchesRecount) {
  auto st = plus_box(20, 2, kMinus);
  EventStream s(17, st.topology().size());
  for (int block = 0; block < 30; ++block) {
    run_events(st, s, 10000);
    ASSERT_EQ(st.field().minus_count(), st.field().recount());
  }
}

TEST(ExactChain, MeanAbsorptionTwoByTwo) {
  const double exact = exact_mean_absorption_2x2();
  ASSERT_GT(exact, 0.5);
  const int n = 40000;
  std::vector<double> g, rf;
  for (int k = 0; k < n; ++k) {
    {
      auto st = plus_box(2, 2, kMinus);
      EventStream s(derive_seed(11, {"exact", static_cast<std::uint64_t>(k)}), 4);
      g.push_back(*run_to_absorption(st, s, 1e6).t_plus);
    }
    {
      auto st = plus_box(2, 2, kMinus, Engine::rejection_free);
      RejectionFreeEngine eng(st, derive_seed(12, {"exact", static_cast<std::uint64_t>(k)}));
      rf.push_back(*eng.run_to_absorption(1e6).t_plus);
    }
  }
  EXPECT_NEAR(stats::mean(g), exact, 4 * stats::standard_error(g)) << "exact " << exact;
  EXPECT_NEAR(stats::mean(rf), exact, 4 * stats::standard_error(rf)) << "exact " << exact;
}

TEST(RejectionFree, SingleMinusRates) {
  Region box = hypercube(5, 2);
  std::vector<Spin> init(box.size(), kPlus);
  const auto centre = *box.index_of(Site{3, 3});
  init[centre] = kMinus;
  const auto bc = BoundaryCondition::uniform(box, kPlus);
  DynamicsState st(Topology::build(std::move(box)), bc, SpinField(init), Engine::rejection_free);
  RejectionFreeEngine eng(st, 5);
  EXPECT_EQ(eng.rate(centre), 1.0);
  EXPECT_EQ(eng.total_rate(), 1.0);
  for (std::size_t k = 0; k < st.field().size(); ++k)
    if (k != centre) EXPECT_EQ(eng.rate(k), 0.0);
}

TEST(RejectionFree, AbsorbingStateJumpsToCap) {
  auto st = plus_box(4, 2, kPlus, Engine::rejection_free);
  RejectionFreeEngine eng(st, 5);
  EXPECT_EQ(eng.total_rate(), 0.0);
  const auto sum = eng.run_until(1e9);
  EXPECT_EQ(sum.events, 0u);
  EXPECT_EQ(st.clock(), 1e9);
}

TEST(RejectionFree, AuditHoldsUnderFilters) {
  Region box = hypercube(8, 3);
  const auto n = box.size();
  CounterRng r(3);
  std::vector<std::uint8_t> frozen(n), prot(n);
  for (std::size_t k = 0; k < n; ++k) {
    frozen[k] = r.next_open01() < 0.2;
    prot[k] = r.next_open01() < 0.7;
  }
  const auto bc = BoundaryCondition::from_rule(box, [](const Site& s) { return s[2] > 4 ? kPlus : kMinus; });
  DynamicsState st(Topology::build(std::move(box)), bc, SpinField(random_spins(n, 8)), Engine::rejection_free);
  st.add_filter(FreezeRegion{frozen, 2.0});
  st.add_filter(BlockMinusOutside{prot});
  RejectionFreeEngine eng(st, 77, true);
  eng.run_until(5.0);
  eng.audit();
  EXPECT_EQ(st.clock(), 5.0);
}

TEST(RejectionFree, RefusesCoupledState) {
  auto st = plus_box(3, 2, kMinus);
  st.set_coupled(true);
  EXPECT_THROW(RejectionFreeEngine(st, 1), InvalidMode);
  auto rf = plus_box(3, 2, kMinus, Engine::rejection_free);
  EXPECT_THROW(rf.set_coupled(true), InvalidMode);
}

TEST(RejectionFree, FreezeBreakpointsRespected) {
  // Layered box: the top row stays minus while frozen.
  Region box = hypercube(6, 2);
  const auto n = box.size();
  std::vector<std::uint8_t> top(n);
  for (std::size_t k = 0; k < n; ++k) top[k] = box.coord(k, 1) == 6;
  const auto bc = BoundaryCondition::uniform(box, kPlus);
  DynamicsState st(Topology::build(std::move(box)), bc, SpinField(n, kMinus), Engine::rejection_free);
  st.add_filter(FreezeRegion{top, 50.0});
  RejectionFreeEngine eng(st, 9, true);
  WatchedSet watch(top, st.field(), 0.0);
  eng.run_until(49.0, watch);
  for (std::size_t k = 0; k < n; ++k)
    if (top[k]) EXPECT_EQ(st.field()[k], kMinus);
  const auto res = eng.run_to_absorption(1e6);
  ASSERT_TRUE(res.t_plus);
  EXPECT_GT(*res.t_plus, 50.0);
}

class EngineLaw : public ::testing::TestWithParam<int> {};

TEST_P(EngineLaw, HittingTimesAgree) {
  const int L = GetParam();
  const int n = 500;
  std::vector<double> g, rf;
  for (int k = 0; k < n; ++k) {
    auto a = plus_box(L, 2, kMinus);
    EventStream s(derive_seed(21, {"law", static_cast<std::uint64_t>(k)}), a.topology().size());
    g.push_back(*run_to_absorption(a, s, 1e7).t_plus);
    auto b = plus_box(L, 2, kMinus, Engine::rejection_free);
    RejectionFreeEngine eng(b, derive_seed(22, {"law", static_cast<std::uint64_t>(k)}));
    rf.push_back(*eng.run_to_absorption(1e7).t_plus);
  }
  const double se = std::sqrt(stats::variance(g) / n + stats::variance(rf) / n);
  EXPECT_LT(std::abs(stats::mean(g) - stats::mean(rf)), 3.0 * se);
  EXPECT_GT(stats::mann_whitney(g, rf).p, 0.001);
}

INSTANTIATE_TEST_SUITE_P(Square, EngineLaw, ::testing::Values(4, 8, 16));

TEST(Observers, RecorderAndWatchedSet) {
  auto st = plus_box(5, 2, kMinus);
  std::vector<std::uint8_t> mask(st.topology().size(), 0);
  mask[0] = 1;
  FlipRecorder rec;
  WatchedSet watch(mask, st.field(), 0.0);
  EventStream s(4, st.topology().size());
  ObserverSet both(rec, watch);
  const auto sum = run_until(st, s, 1e5, both);
  ASSERT_TRUE(sum.absorbed);
  EXPECT_EQ(rec.flips.size(), sum.flips);
  ASSERT_TRUE(watch.first_clear());
  EXPECT_LE(*watch.first_clear(), *sum.absorbed);
  EXPECT_EQ(st.clock(), 1e5);
}

TEST(Absorption, SquareEightFinishesWellBeforeCap) {
  std::vector<double> t;
  for (std::uint64_t r = 0; r < 200; ++r) {
    auto st = plus_box(8, 2, kMinus);
    EventStream s(derive_seed(31, {"l8", r}), st.topology().size());
    const auto res = run_to_absorption(st, s, 1e4);
    ASSERT_TRUE(res.t_plus) << r;
    t.push_back(*res.t_plus);
  }
  EXPECT_LT(stats::mean(t), 1e4);
  EXPECT_GT(stats::mean(t), 8.0);
}

TEST(Absorption, AllPlusStartIsImmediate) {
  auto st = plus_box(5, 3, kPlus);
  EventStream s(1, st.topology().size());
  const auto res = run_to_absorption(st, s, 10.0);
  ASSERT_TRUE(res.t_plus);
  EXPECT_EQ(*res.t_plus, 0.0);
  EXPECT_EQ(res.events, 0u);
}

TEST(RunUntil, NoEventsWhenHorizonIsNow) {
  auto st = plus_box(4, 2, kMinus);
  EventStream s(1, st.topology().size());
  EXPECT_EQ(run_until(st, s, 0.0).events, 0u);
}
