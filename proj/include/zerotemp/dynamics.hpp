#ifndef ZEROTEMP_DYNAMICS_HPP
#define ZEROTEMP_DYNAMICS_HPP

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "zerotemp/error.hpp"
#include "zerotemp/random.hpp"
#include "zerotemp/region.hpp"

namespace zerotemp {

enum class Engine { graphical, rejection_free };

inline const char* to_string(Engine e) { return e == Engine::graphical ? "graphical" : "rejection-free"; }

inline Engine parse_engine(const std::string& s) {
  if (s == "graphical") return Engine::graphical;
  if (s == "rejection-free" || s == "rejection_free" || s == "rf") return Engine::rejection_free;
  throw InvalidParameter("unknown engine '" + s + "'");
}

/// Sign of the local field; the coin decides ties.
inline Spin majority(int field, Spin coin) { return field > 0 ? kPlus : (field < 0 ? kMinus : coin); }

/// Zero-temperature update from the 2d neighbour spins.
inline Spin local_rule(std::span<const Spin> neighbours, int d, Spin coin) {
  if (d < 1 || neighbours.size() != static_cast<std::size_t>(2 * d))
    throw InvalidInput("local rule needs exactly 2d neighbour spins");
  int sum = 0;
  for (Spin s : neighbours) {
    if (s != kPlus && s != kMinus) throw InvalidInput("neighbour spins must be +1 or -1");
    sum += s;
  }
  if (coin != kPlus && coin != kMinus) throw InvalidInput("coin must be +1 or -1");
  return majority(sum, coin);
}

/// Neighbour table of a region. Link >= 0: region index; link < 0: boundary index -(link + 1).
class Topology {
 public:
  static std::shared_ptr<const Topology> build(Region region) {
    auto t = std::shared_ptr<Topology>(new Topology);
    t->region_ = std::move(region);
    t->boundary_ = boundary(t->region_);
    t->degree_ = 2 * t->region_.dim();
    const auto& codec = t->region_.codec();
    t->links_.resize(t->region_.size() * static_cast<std::size_t>(t->degree_));
    for (std::size_t i = 0; i < t->region_.size(); ++i) {
      const auto key = t->region_.key(i);
      for (int a = 0; a < t->region_.dim(); ++a) {
        const auto step = codec.step(a);
        const std::uint64_t nk[2] = {key + step, key - step};
        for (int s = 0; s < 2; ++s) {
          std::int32_t link;
          if (auto j = t->region_.find_key(nk[s])) {
            link = static_cast<std::int32_t>(*j);
          } else {
            auto b = t->boundary_.find_key(nk[s]);
            if (!b) throw GeometryError("neighbour missing from computed boundary");
            link = -static_cast<std::int32_t>(*b) - 1;
          }
          t->links_[i * static_cast<std::size_t>(t->degree_) + static_cast<std::size_t>(2 * a + s)] = link;
        }
      }
    }
    return t;
  }

  const Region& region() const { return region_; }
  const Region& boundary_region() const { return boundary_; }
  std::size_t size() const { return region_.size(); }
  int degree() const { return degree_; }
  int dim() const { return region_.dim(); }
  std::span<const std::int32_t> links(std::size_t site) const {
    return {links_.data() + site * static_cast<std::size_t>(degree_), static_cast<std::size_t>(degree_)};
  }

 private:
  Topology() = default;
  Region region_;
  Region boundary_;
  int degree_ = 0;
  std::vector<std::int32_t> links_;
};

/// Dense +/-1 configuration with a cached count of minus spins.
class SpinField {
 public:
  SpinField() = default;
  SpinField(std::size_t n, Spin fill) : spins_(n, fill), minus_(fill == kMinus ? n : 0) {
    if (fill != kPlus && fill != kMinus) throw InvalidParameter("spin must be +1 or -1");
  }
  explicit SpinField(std::vector<Spin> spins) : spins_(std::move(spins)) {
    for (Spin s : spins_)
      if (s != kPlus && s != kMinus) throw InvalidParameter("spin must be +1 or -1");
    minus_ = recount();
  }

  std::size_t size() const { return spins_.size(); }
  Spin operator[](std::size_t i) const { return spins_[i]; }
  std::span<const Spin> spins() const { return spins_; }
  std::size_t minus_count() const { return minus_; }
  bool all_plus() const { return minus_ == 0; }

  void set(std::size_t i, Spin s) {
    if (spins_[i] == s) return;
    if (s == kMinus) ++minus_;
    else --minus_;
    spins_[i] = s;
  }

  std::size_t recount() const {
    std::size_t m = 0;
    for (Spin s : spins_) m += (s == kMinus);
    return m;
  }

  friend bool operator==(const SpinField& a, const SpinField& b) { return a.spins_ == b.spins_; }

  /// Pointwise a <= b.
  friend bool pointwise_le(const SpinField& a, const SpinField& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a.spins_[i] > b.spins_[i]) return false;
    return true;
  }

 private:
  std::vector<Spin> spins_;
  std::size_t minus_ = 0;
};

/// Discards every event at the masked sites before `until`.
struct FreezeRegion {
  std::vector<std::uint8_t> mask;
  double until = 0;
};

/// Cancels + -> - flips at sites outside the protected set.
struct BlockMinusOutside {
  std::vector<std::uint8_t> protected_mask;
};

using UpdateFilter = std::variant<std::monostate, FreezeRegion, BlockMinusOutside>;

inline std::vector<std::uint8_t> subset_mask(const Region& region, const Region& subset) {
  if (!subset.is_subset_of(region)) throw InvalidParameter("filter set is not a subset of the region");
  std::vector<std::uint8_t> mask(region.size(), 0);
  for (auto k : subset.keys()) mask[*region.find_key(k)] = 1;
  return mask;
}

inline FreezeRegion freeze_region(const Region& region, const Region& frozen, double until) {
  if (!(until >= 0)) throw InvalidParameter("freeze time must be >= 0");
  return {subset_mask(region, frozen), until};
}

inline BlockMinusOutside block_minus_outside(const Region& region, const Region& protected_set) {
  return {subset_mask(region, protected_set)};
}

enum class Outcome : std::uint8_t { unchanged, flipped, frozen, canceled };

struct ApplyResult {
  Outcome outcome = Outcome::unchanged;
  std::int32_t site = 0;
  Spin before = kPlus;
  Spin after = kPlus;
  bool flipped() const { return outcome == Outcome::flipped; }
};

class RejectionFreeEngine;

/// Spin field, boundary condition, clock and filters of one copy of the dynamics.
class DynamicsState {
 public:
  DynamicsState(std::shared_ptr<const Topology> topo, BoundaryCondition bc, SpinField init,
                Engine engine = Engine::graphical)
      : topo_(std::move(topo)), field_(std::move(init)), engine_(engine) {
    if (!topo_) throw InvalidParameter("null topology");
    if (field_.size() != topo_->size()) throw InvalidParameter("spin field size does not match region");
    set_boundary(std::move(bc));
  }

  const Topology& topology() const { return *topo_; }
  std::shared_ptr<const Topology> shared_topology() const { return topo_; }
  const Region& region() const { return topo_->region(); }
  const BoundaryCondition& boundary_condition() const { return bc_; }
  const SpinField& field() const { return field_; }
  double clock() const { return clock_; }
  Engine engine() const { return engine_; }
  std::span<const UpdateFilter> filters() const { return filters_; }
  bool coupled() const { return coupled_; }
  const std::optional<Event>& last_event() const { return last_event_; }

  void set_coupled(bool c) {
    if (c && engine_ != Engine::graphical) throw InvalidMode("coupled runs require the graphical engine");
    coupled_ = c;
  }

  void add_filter(UpdateFilter f) {
    if (auto* fr = std::get_if<FreezeRegion>(&f); fr && fr->mask.size() != topo_->size())
      throw InvalidParameter("freeze mask size mismatch");
    if (auto* bl = std::get_if<BlockMinusOutside>(&f); bl && bl->protected_mask.size() != topo_->size())
      throw InvalidParameter("protected mask size mismatch");
    filters_.push_back(std::move(f));
  }
  void clear_filters() { filters_.clear(); }

  /// Replaces the boundary condition; the domain must stay the region's boundary.
  void set_boundary(BoundaryCondition bc) {
    if (!(bc.domain() == topo_->boundary_region()))
      throw InvalidParameter("boundary condition domain is not the region boundary");
    bc_ = std::move(bc);
    bsum_.assign(topo_->size(), 0);
    for (std::size_t i = 0; i < topo_->size(); ++i)
      for (auto link : topo_->links(i))
        if (link < 0) bsum_[i] = static_cast<std::int8_t>(bsum_[i] + bc_.spin(static_cast<std::size_t>(-link - 1)));
  }

  /// Sum of the 2d neighbour spins (boundary spins included).
  int local_field(std::size_t site) const {
    int h = bsum_[site];
    for (auto link : topo_->links(site))
      if (link >= 0) h += field_[static_cast<std::size_t>(link)];
    return h;
  }

  std::span<const std::int8_t> boundary_sums() const { return bsum_; }

  /// Test hook: negate the coin on ties. Breaks monotone coupling on purpose.
  void inject_coin_fault(bool on) { coin_fault_ = on; }

  /// One ring of the graphical construction at e.site.
  ApplyResult apply(const Event& e) {
    if (e.site < 0 || static_cast<std::size_t>(e.site) >= topo_->size())
      throw InvalidInput("event site outside region");
    if (e.time < clock_) throw InvalidInput("event time precedes state clock");
    clock_ = e.time;
    last_event_ = e;
    const auto site = static_cast<std::size_t>(e.site);
    ApplyResult r{Outcome::unchanged, static_cast<std::int32_t>(site), field_[site], field_[site]};
    const Spin coin = coin_fault_ ? static_cast<Spin>(-e.coin) : e.coin;
    const Spin proposed = majority(local_field(site), coin);
    for (const auto& f : filters_) {
      if (auto* fr = std::get_if<FreezeRegion>(&f)) {
        if (fr->mask[site] && e.time < fr->until) {
          r.outcome = Outcome::frozen;
          return r;
        }
      } else if (auto* bl = std::get_if<BlockMinusOutside>(&f)) {
        if (!bl->protected_mask[site] && proposed == kMinus && r.before == kPlus) {
          r.outcome = Outcome::canceled;
          return r;
        }
      }
    }
    if (proposed == r.before) return r;
    field_.set(site, proposed);
    r.after = proposed;
    r.outcome = Outcome::flipped;
    return r;
  }

  void advance_clock(double t) {
    if (t < clock_) throw InvalidInput("clock cannot move backwards");
    clock_ = t;
  }

 private:
  friend class RejectionFreeEngine;

  std::shared_ptr<const Topology> topo_;
  BoundaryCondition bc_;
  std::vector<std::int8_t> bsum_;
  SpinField field_;
  double clock_ = 0;
  Engine engine_;
  std::vector<UpdateFilter> filters_;
  bool coupled_ = false;
  bool coin_fault_ = false;
  std::optional<Event> last_event_;
};

template <class O>
concept DynamicsObserver = requires(O o, double t, std::int32_t s, Spin a) {
  o.on_flip(t, s, a, a);
  o.on_absorption(t);
};

struct NullObserver {
  void on_flip(double, std::int32_t, Spin, Spin) {}
  void on_absorption(double) {}
};

struct FlipRecord {
  double time;
  std::int32_t site;
  Spin before;
  Spin after;
  friend bool operator==(const FlipRecord&, const FlipRecord&) = default;
};

/// Keeps the whole flip sequence.
struct FlipRecorder {
  std::vector<FlipRecord> flips;
  std::optional<double> absorbed;
  void on_flip(double t, std::int32_t s, Spin a, Spin b) { flips.push_back({t, s, a, b}); }
  void on_absorption(double t) {
    if (!absorbed) absorbed = t;
  }
};

/// Counts minus spins inside a watched set; records when it first empties and
/// the first time at or after `from` that it holds a minus.
class WatchedSet {
 public:
  WatchedSet(std::vector<std::uint8_t> mask, const SpinField& initial, double from = 0)
      : mask_(std::move(mask)), from_(from) {
    for (std::size_t i = 0; i < mask_.size(); ++i) minus_ += (mask_[i] && initial[i] == kMinus);
    if (minus_ == 0) first_clear_ = 0.0;
  }

  void on_flip(double t, std::int32_t s, Spin, Spin after) {
    if (!mask_[static_cast<std::size_t>(s)]) return;
    if (after == kMinus) {
      ++minus_;
      if (t >= from_ && !first_minus_after_) first_minus_after_ = t;
    } else {
      --minus_;
      if (minus_ == 0 && !first_clear_) first_clear_ = t;
    }
  }
  void on_absorption(double) {}

  std::size_t minus() const { return minus_; }
  std::optional<double> first_clear() const { return first_clear_; }
  std::optional<double> first_minus_after() const { return first_minus_after_; }

 private:
  std::vector<std::uint8_t> mask_;
  double from_;
  std::size_t minus_ = 0;
  std::optional<double> first_clear_;
  std::optional<double> first_minus_after_;
};

/// Fans hooks out to several observers.
template <class... O>
struct ObserverSet {
  std::tuple<O&...> parts;
  explicit ObserverSet(O&... o) : parts(o...) {}
  void on_flip(double t, std::int32_t s, Spin a, Spin b) {
    std::apply([&](auto&... p) { (p.on_flip(t, s, a, b), ...); }, parts);
  }
  void on_absorption(double t) {
    std::apply([&](auto&... p) { (p.on_absorption(t), ...); }, parts);
  }
};

struct RunSummary {
  std::uint64_t events = 0;
  std::uint64_t flips = 0;
  std::optional<double> absorbed;
};

/// Graphical engine: consume every event with time <= t_max, then set the clock to t_max.
template <class Source, DynamicsObserver Observer = NullObserver>
RunSummary run_until(DynamicsState& state, Source& source, double t_max, Observer&& obs = {}) {
  if (t_max < state.clock()) throw InvalidInput("t_max precedes state clock");
  RunSummary sum;
  while (auto e = source.next(t_max)) {
    const auto r = state.apply(*e);
    ++sum.events;
    if (!r.flipped()) continue;
    ++sum.flips;
    obs.on_flip(e->time, r.site, r.before, r.after);
    if (state.field().all_plus()) {
      obs.on_absorption(e->time);
      if (!sum.absorbed) sum.absorbed = e->time;
    }
  }
  state.advance_clock(t_max);
  return sum;
}

/// Graphical engine: consume exactly `count` events.
template <class Source, DynamicsObserver Observer = NullObserver>
RunSummary run_events(DynamicsState& state, Source& source, std::uint64_t count, Observer&& obs = {}) {
  RunSummary sum;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (; sum.events < count; ++sum.events) {
    auto e = source.next(kInf);
    if (!e) break;
    const auto r = state.apply(*e);
    if (!r.flipped()) continue;
    ++sum.flips;
    obs.on_flip(e->time, r.site, r.before, r.after);
    if (state.field().all_plus()) {
      obs.on_absorption(e->time);
      if (!sum.absorbed) sum.absorbed = e->time;
    }
  }
  return sum;
}

struct AbsorptionResult {
  std::optional<double> t_plus;  // empty on timeout
  std::uint64_t events = 0;
  bool timeout() const { return !t_plus; }
};

/// Graphical engine: run until no minus spin remains or the clock reaches t_cap.
template <class Source>
AbsorptionResult run_to_absorption(DynamicsState& state, Source& source, double t_cap) {
  if (!(t_cap > 0)) throw InvalidParameter("t_cap must be positive");
  AbsorptionResult res;
  if (state.field().all_plus()) {
    res.t_plus = state.clock();
    return res;
  }
  while (auto e = source.next(t_cap)) {
    const auto r = state.apply(*e);
    ++res.events;
    if (r.flipped() && state.field().all_plus()) {
      res.t_plus = e->time;
      return res;
    }
  }
  state.advance_clock(t_cap);
  return res;
}

}  // namespace zerotemp

#endif  // ZEROTEMP_DYNAMICS_HPP
