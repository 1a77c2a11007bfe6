#ifndef ZEROTEMP_COUPLING_HPP
#define ZEROTEMP_COUPLING_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zerotemp/dynamics.hpp"
#include "zerotemp/geometry.hpp"
#include "zerotemp/random.hpp"

namespace zerotemp {

struct OrderedPair {
  std::size_t lower = 0;
  std::size_t upper = 0;
};

/// Boundary condition change applied to one copy at a given time.
struct BoundarySwitch {
  double time = 0;
  std::size_t state = 0;
  BoundaryCondition bc;
};

/// Several copies driven by one event stream.
struct CoupledRun {
  std::vector<DynamicsState> states;
  std::vector<OrderedPair> comparisons;
  std::vector<BoundarySwitch> switches;  // applied in time order, before events at later times
};

struct Violation {
  std::uint64_t event_index = 0;
  Event event;
  OrderedPair pair;
  std::int32_t site = 0;  // where lower > upper
};

struct DominationReport {
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {
inline std::optional<std::int32_t> first_order_break(const SpinField& lo, const SpinField& hi) {
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) return static_cast<std::int32_t>(i);
  return std::nullopt;
}
}  // namespace detail

/// Applies every event to every copy and checks pointwise order of each pair after each event.
/// Only the event site can change, so a per-event check at that site plus the initial full
/// check covers all times; a full sweep is repeated at the end.
inline DominationReport coupled_run(CoupledRun& run, EventStream& stream, double t_max) {
  DominationReport rep;
  rep.seed = stream.seed();
  if (run.states.empty()) return rep;
  const std::size_t n = run.states.front().topology().size();
  for (auto& s : run.states) {
    if (s.topology().size() != n || !(s.region() == run.states.front().region()))
      throw InvalidParameter("coupled copies must share one region");
    s.set_coupled(true);
  }
  for (const auto& p : run.comparisons) {
    if (p.lower >= run.states.size() || p.upper >= run.states.size())
      throw InvalidParameter("comparison pair references a missing copy");
    if (!pointwise_le(run.states[p.lower].field(), run.states[p.upper].field()) ||
        !pointwise_le(run.states[p.lower].boundary_condition(), run.states[p.upper].boundary_condition()))
      throw InvalidParameter("comparison pair is not ordered initially");
  }
  auto switches = run.switches;
  std::stable_sort(switches.begin(), switches.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  std::size_t next_switch = 0;

  auto check_pairs = [&](const Event& e, std::optional<std::size_t> site) {
    for (const auto& p : run.comparisons) {
      const auto& lo = run.states[p.lower].field();
      const auto& hi = run.states[p.upper].field();
      std::optional<std::int32_t> bad;
      if (site) {
        if (lo[*site] > hi[*site]) bad = static_cast<std::int32_t>(*site);
      } else {
        bad = detail::first_order_break(lo, hi);
      }
      if (bad) rep.violations.push_back({rep.events, e, p, *bad});
    }
  };

  while (true) {
    const double horizon = next_switch < switches.size() ? std::min(switches[next_switch].time, t_max) : t_max;
    while (auto e = stream.next(horizon)) {
      for (auto& s : run.states) s.apply(*e);
      ++rep.events;
      for (const auto& s : run.states)
        if (!s.last_event() || !(*s.last_event() == *e)) throw std::logic_error("coupled copies saw different events");
      check_pairs(*e, static_cast<std::size_t>(e->site));
    }
    if (next_switch < switches.size() && switches[next_switch].time <= t_max) {
      auto& sw = switches[next_switch++];
      run.states.at(sw.state).advance_clock(sw.time);
      run.states.at(sw.state).set_boundary(sw.bc);
      for (const auto& p : run.comparisons)
        if (!pointwise_le(run.states[p.lower].boundary_condition(), run.states[p.upper].boundary_condition()))
          throw InvalidParameter("boundary switch breaks the order of a comparison pair");
      continue;
    }
    break;
  }
  for (auto& s : run.states) s.advance_clock(t_max);
  check_pairs(Event{t_max, -1, kPlus}, std::nullopt);
  for (auto& s : run.states) s.set_coupled(false);
  return rep;
}

struct CensoringReport {
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  std::uint64_t cancellations = 0;
  std::optional<std::uint64_t> first_cancel_event;
  std::optional<double> first_cancel_time;
  bool equal_before_first_cancel = true;
  std::vector<Violation> violations;  // a site where the censored copy is - and the original +
  bool ok() const { return violations.empty() && equal_before_first_cancel; }
};

/// Runs `state` and a copy with BlockMinusOutside(protected) on one stream. Canceling moves that
/// create a - can only keep extra + spins, so the censored minus set must stay inside the original's,
/// and the two copies must be equal until the first canceled move.
inline CensoringReport censoring_domination(const DynamicsState& state, const std::vector<std::uint8_t>& protected_mask,
                                            EventStream& stream, double t_max) {
  CensoringReport rep;
  rep.seed = stream.seed();
  DynamicsState free_copy = state;
  DynamicsState censored = state;
  censored.add_filter(BlockMinusOutside{protected_mask});
  free_copy.set_coupled(true);
  censored.set_coupled(true);
  const OrderedPair pair{0, 1};  // original below censored
  while (auto e = stream.next(t_max)) {
    free_copy.apply(*e);
    const auto r = censored.apply(*e);
    ++rep.events;
    if (r.outcome == Outcome::canceled) {
      ++rep.cancellations;
      if (!rep.first_cancel_event) {
        rep.first_cancel_event = rep.events - 1;
        rep.first_cancel_time = e->time;
      }
    }
    const auto site = static_cast<std::size_t>(e->site);
    if (censored.field()[site] < free_copy.field()[site])
      rep.violations.push_back({rep.events - 1, *e, pair, static_cast<std::int32_t>(site)});
    if (!rep.first_cancel_event && censored.field()[site] != free_copy.field()[site])
      rep.equal_before_first_cancel = false;
  }
  if (auto bad = detail::first_order_break(free_copy.field(), censored.field()))
    rep.violations.push_back({rep.events, Event{t_max, -1, kPlus}, pair, *bad});
  if (!rep.first_cancel_event && !(censored.field() == free_copy.field())) rep.equal_before_first_cancel = false;
  return rep;
}

/// Bijection between the sites of one height slice of a slab and a 3-d region.
struct SliceMap {
  std::vector<int> heights;                 // coordinates 4..d of the slice
  std::vector<std::int32_t> slab_to_shell;  // over all slab sites; -1 outside this slice
  std::vector<std::int32_t> shell_to_slab;

  static SliceMap build(const Region& slab, const std::vector<int>& heights, const Region& shell) {
    SliceMap m;
    m.heights = heights;
    m.slab_to_shell.assign(slab.size(), -1);
    m.shell_to_slab.assign(shell.size(), -1);
    for (std::size_t i = 0; i < slab.size(); ++i) {
      bool same = true;
      for (std::size_t k = 0; k < heights.size() && same; ++k) same = slab.coord(i, 3 + static_cast<int>(k)) == heights[k];
      if (!same) continue;
      auto j = shell.index_of(Site{slab.coord(i, 0), slab.coord(i, 1), slab.coord(i, 2)});
      if (!j) throw GeometryError("slab slice site has no image in the 3-d shell");
      if (m.shell_to_slab[*j] >= 0) throw GeometryError("slice map is not injective");
      m.slab_to_shell[i] = static_cast<std::int32_t>(*j);
      m.shell_to_slab[*j] = static_cast<std::int32_t>(i);
    }
    for (auto v : m.shell_to_slab)
      if (v < 0) throw GeometryError("slice map is not onto the 3-d shell");
    return m;
  }
};

struct SliceResult {
  std::vector<int> heights;
  std::size_t sites = 0;
  std::size_t flips = 0;
  bool boundary_agrees = false;
  bool trajectory_matches = false;
  std::optional<std::int32_t> witness_site;  // slab index of the first mismatch
  std::optional<double> witness_time;
};

struct SliceReport {
  int d = 0;
  int L = 0;
  int i = 0;  // -1: first layer under eta0
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  std::size_t slab_size = 0;
  bool cancellation_ok = false;
  std::vector<SliceResult> slices;
  bool ok() const {
    if (!cancellation_ok || slices.empty()) return false;
    for (const auto& s : slices)
      if (!s.boundary_agrees || !s.trajectory_matches) return false;
    return true;
  }
};

namespace detail {

inline bool heights_cancel(const Slab& slab, int d) {
  const auto& codec = slab.region.codec();
  const auto& bd = slab.bc.domain();
  for (auto key : slab.region.keys()) {
    for (int a = 3; a < d; ++a) {
      const auto up = bd.find_key(key + codec.step(a));
      const auto down = bd.find_key(key - codec.step(a));
      if (!up || !down) return false;
      if (slab.bc.spin(*up) != kMinus || slab.bc.spin(*down) != kPlus) return false;
    }
  }
  return true;
}

// Every boundary site of the 3-d target, lifted to the slice heights, carries the same spin.
inline bool boundary_spins_agree(const Slab& slab, const Shell& shell, const std::vector<int>& heights) {
  const int d = slab.region.dim();
  for (std::size_t b = 0; b < shell.bc.domain().size(); ++b) {
    Site s(d);
    for (int k = 0; k < 3; ++k) s[k] = shell.bc.domain().coord(b, k);
    for (std::size_t k = 0; k < heights.size(); ++k) s[3 + static_cast<int>(k)] = heights[k];
    auto idx = slab.bc.domain().index_of(s);
    if (!idx || slab.bc.spin(*idx) != shell.bc.spin(b)) return false;
  }
  return true;
}

inline SliceReport check_slices(const GeometryParams& gp, const Slab& slab, int i, std::uint64_t events,
                                std::uint64_t seed) {
  SliceReport rep;
  rep.d = gp.d;
  rep.L = gp.L;
  rep.i = i;
  rep.seed = seed;
  rep.slab_size = slab.region.size();
  rep.cancellation_ok = heights_cancel(slab, gp.d);

  std::map<std::vector<int>, std::size_t> slice_sizes;
  for (std::size_t k = 0; k < slab.region.size(); ++k) {
    std::vector<int> h;
    for (int a = 3; a < gp.d; ++a) h.push_back(slab.region.coord(k, a));
    ++slice_sizes[h];
  }

  // Random initial configuration, then slab dynamics on the full stream.
  CounterRng init_rng(derive_seed(seed, {"slice-check", 0, "init"}));
  std::vector<Spin> init(slab.region.size());
  for (auto& s : init) s = init_rng.next_coin();
  const auto topo = Topology::build(slab.region);
  DynamicsState slab_state(topo, slab.bc, SpinField(init));
  EventStream stream(seed, slab.region.size());
  FlipRecorder slab_flips;
  const auto sum = run_events(slab_state, stream, events, slab_flips);
  rep.events = sum.events;
  const double t_end = slab_state.clock();

  for (const auto& [heights, count] : slice_sizes) {
    SliceResult res;
    res.heights = heights;
    res.sites = count;
    const int hl = l1(heights);
    Shell shell;
    if (i < 0) {
      shell = shell3_between(gp.cylinder_radius(), -1.0);
    } else {
      const int outer = gp.slice_index(i, hl);
      const int inner = gp.slice_index(i + 2, hl);
      shell = shell3_between(gp.shrink_radius(outer), gp.shrink_radius(inner));
    }
    const auto map = SliceMap::build(slab.region, heights, shell.region);
    res.boundary_agrees = boundary_spins_agree(slab, shell, heights);

    std::vector<Spin> shell_init(shell.region.size());
    for (std::size_t j = 0; j < shell_init.size(); ++j) shell_init[j] = init[static_cast<std::size_t>(map.shell_to_slab[j])];
    DynamicsState shell_state(Topology::build(shell.region), shell.bc, SpinField(std::move(shell_init)));
    EventStream replay(seed, slab.region.size());
    RestrictedView view(replay, map.slab_to_shell);
    FlipRecorder shell_flips;
    run_until(shell_state, view, t_end, shell_flips);

    // Compare the flip sequence of this slice in the slab with the shell's.
    std::vector<FlipRecord> expected;
    for (const auto& f : slab_flips.flips) {
      const auto j = map.slab_to_shell[static_cast<std::size_t>(f.site)];
      if (j >= 0) expected.push_back({f.time, j, f.before, f.after});
    }
    res.flips = expected.size();
    res.trajectory_matches = expected == shell_flips.flips;
    if (!res.trajectory_matches) {
      std::size_t k = 0;
      while (k < expected.size() && k < shell_flips.flips.size() && expected[k] == shell_flips.flips[k]) ++k;
      const auto& w = k < expected.size() ? expected[k] : shell_flips.flips[k];
      res.witness_site = map.shell_to_slab[static_cast<std::size_t>(w.site)];
      res.witness_time = w.time;
    }
    for (std::size_t j = 0; j < shell.region.size() && res.trajectory_matches; ++j) {
      if (shell_state.field()[j] != slab_state.field()[static_cast<std::size_t>(map.shell_to_slab[j])]) {
        res.trajectory_matches = false;
        res.witness_site = map.shell_to_slab[j];
        res.witness_time = t_end;
      }
    }
    rep.slices.push_back(std::move(res));
  }
  return rep;
}

}  // namespace detail

/// Slab C^(i) \ C^(i+2) under eta^(i) against independent 3-d shell dynamics per height slice,
/// all fed from one seed. Bit-exact comparison of flip sequences and final spins.
inline SliceReport slice_decoupling_check(const GeometryParams& gp, int i, std::uint64_t events, std::uint64_t seed) {
  const Slab slab = eta_slab(gp, i);
  return detail::check_slices(gp, slab, i, events, seed);
}

/// First cylinder layer with - above and + below and around, against the 3-d ball with + boundary.
inline SliceReport first_layer_check(const GeometryParams& gp, std::uint64_t events, std::uint64_t seed) {
  const Slab slab = first_layer(gp);
  return detail::check_slices(gp, slab, -1, events, seed);
}

/// Randomised ordered pair on hypercube(L, d): xi_lo <= xi_hi and eta_lo <= eta_hi, drawn from `seed`.
/// With `fault` the upper copy negates its tie coins, which must be caught as a violation.
inline DominationReport random_domination_run(int d, int L, std::uint64_t seed, double t_max, bool fault = false) {
  CounterRng rng(derive_seed(seed, {"couple-check", 0, "init"}));
  Region cube = hypercube(L, d);
  const auto topo = Topology::build(cube);
  const Region& bd = topo->boundary_region();
  const double p_lo = rng.next_open01(), p_up = rng.next_open01();
  std::vector<Spin> lo(cube.size()), hi(cube.size()), blo(bd.size()), bhi(bd.size());
  for (std::size_t k = 0; k < cube.size(); ++k) {
    lo[k] = rng.next_open01() < p_lo ? kPlus : kMinus;
    hi[k] = (lo[k] == kPlus || rng.next_open01() < p_up) ? kPlus : kMinus;
  }
  for (std::size_t k = 0; k < bd.size(); ++k) {
    blo[k] = rng.next_open01() < p_lo ? kPlus : kMinus;
    bhi[k] = (blo[k] == kPlus || rng.next_open01() < p_up) ? kPlus : kMinus;
  }
  CoupledRun run;
  run.states.emplace_back(topo, BoundaryCondition(bd, blo), SpinField(lo));
  run.states.emplace_back(topo, BoundaryCondition(bd, bhi), SpinField(hi));
  if (fault) run.states[1].inject_coin_fault(true);
  run.comparisons.push_back({0, 1});
  EventStream stream(seed, cube.size());
  return coupled_run(run, stream, t_max);
}

/// Censored copy against the original on hypercube(L, d) from a random start, + boundary,
/// random protected set.
inline CensoringReport random_censoring_run(int d, int L, std::uint64_t seed, double t_max) {
  CounterRng rng(derive_seed(seed, {"censor-check", 0, "init"}));
  Region cube = hypercube(L, d);
  const auto topo = Topology::build(cube);
  const double p_minus = rng.next_open01(), p_prot = rng.next_open01();
  std::vector<Spin> init(cube.size());
  std::vector<std::uint8_t> prot(cube.size());
  for (std::size_t k = 0; k < cube.size(); ++k) {
    init[k] = rng.next_open01() < p_minus ? kMinus : kPlus;
    prot[k] = rng.next_open01() < p_prot;
  }
  DynamicsState st(topo, BoundaryCondition::uniform(cube, kPlus), SpinField(init));
  EventStream stream(seed, cube.size());
  return censoring_domination(st, prot, stream, t_max);
}

/// Cylinder under eta0 from all minus, censored outside C^(i).
inline CensoringReport cylinder_censoring_run(const GeometryParams& gp, int i, std::uint64_t seed, double t_max) {
  Region cyl = cylinder(gp);
  const auto prot = subset_mask(cyl, shrunk_set(gp, i));
  const auto bc = eta0(gp, cyl);
  DynamicsState st(Topology::build(std::move(cyl)), bc, SpinField(prot.size(), kMinus));
  EventStream stream(seed, prot.size());
  return censoring_domination(st, prot, stream, t_max);
}

}  // namespace zerotemp

#endif  // ZEROTEMP_COUPLING_HPP
