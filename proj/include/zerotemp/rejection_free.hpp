#ifndef ZEROTEMP_REJECTION_FREE_HPP
#define ZEROTEMP_REJECTION_FREE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "zerotemp/dynamics.hpp"
#include "zerotemp/random.hpp"

namespace zerotemp {

/// Continuous-time n-fold way for the same chain: only effective flips are sampled.
///
/// Every site sits in one of three rate classes: 0, 1/2 (tie: the coin disagrees with
/// the current spin half the time) or 1 (spin disagrees with a strict majority). Filters
/// move sites into class 0; freeze expiry times split the run into segments on which
/// the table is rebuilt. The trajectory law is that of the graphical engine with the
/// null rings removed.
class RejectionFreeEngine {
 public:
  RejectionFreeEngine(DynamicsState& state, std::uint64_t seed, bool audit = false)
      : st_(&state), rng_(seed), audit_(audit) {
    if (state.coupled()) throw InvalidMode("rejection-free engine cannot drive a coupled run");
    const std::size_t n = state.topology().size();
    h_.resize(n);
    cls_.assign(n, 0);
    pos_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) h_[i] = static_cast<std::int8_t>(state.local_field(i));
    rebuild();
  }

  double total_rate() const { return static_cast<double>(ones_.size()) + 0.5 * static_cast<double>(halves_.size()); }

  double rate(std::size_t site) const {
    switch (cls_[site]) {
      case 1: return 1.0;
      case 2: return 0.5;
      default: return 0.0;
    }
  }

  /// Advances to t_max (or until absorption if stop_on_absorption is set).
  template <DynamicsObserver Observer = NullObserver>
  RunSummary run_until(double t_max, Observer&& obs = {}, bool stop_on_absorption = false) {
    if (t_max < st_->clock()) throw InvalidInput("t_max precedes state clock");
    RunSummary sum;
    while (true) {
      const double b = next_breakpoint();
      const double total = total_rate();
      const double t = total > 0 ? st_->clock_ + rng_.next_exponential(total) : std::numeric_limits<double>::infinity();
      if (t > std::min(b, t_max)) {
        if (b <= t_max) {
          st_->clock_ = b;
          rebuild();
          continue;
        }
        break;
      }
      st_->clock_ = t;
      const std::size_t site = pick(total);
      const Spin before = st_->field_[site];
      flip(site);
      ++sum.events;
      ++sum.flips;
      obs.on_flip(t, static_cast<std::int32_t>(site), before, static_cast<Spin>(-before));
      if (st_->field_.all_plus()) {
        obs.on_absorption(t);
        if (!sum.absorbed) sum.absorbed = t;
        if (stop_on_absorption) return sum;
      }
    }
    st_->clock_ = t_max;
    return sum;
  }

  AbsorptionResult run_to_absorption(double t_cap) {
    if (!(t_cap > 0)) throw InvalidParameter("t_cap must be positive");
    AbsorptionResult res;
    if (st_->field().all_plus()) {
      res.t_plus = st_->clock();
      return res;
    }
    const auto sum = run_until(t_cap, NullObserver{}, true);
    res.events = sum.events;
    res.t_plus = sum.absorbed;
    return res;
  }

  /// Full recomputation of fields and rate classes; throws on any mismatch.
  void audit() const {
    for (std::size_t i = 0; i < h_.size(); ++i) {
      if (h_[i] != st_->local_field(i)) throw std::logic_error("rate table audit: stale local field at site " + std::to_string(i));
      if (cls_[i] != classify(i)) throw std::logic_error("rate table audit: wrong rate class at site " + std::to_string(i));
      const auto& v = cls_[i] == 1 ? ones_ : halves_;
      if (cls_[i] != 0 && (pos_[i] < 0 || v[static_cast<std::size_t>(pos_[i])] != static_cast<std::int32_t>(i)))
        throw std::logic_error("rate table audit: broken class index at site " + std::to_string(i));
    }
    std::size_t n1 = 0, n2 = 0;
    for (auto c : cls_) {
      n1 += (c == 1);
      n2 += (c == 2);
    }
    if (n1 != ones_.size() || n2 != halves_.size()) throw std::logic_error("rate table audit: class sizes disagree");
    if (st_->field().minus_count() != st_->field().recount()) throw std::logic_error("rate table audit: minus count drift");
  }

 private:
  std::uint8_t classify(std::size_t site) const {
    const double now = st_->clock_;
    const Spin s = st_->field_[site];
    const int h = h_[site];
    std::uint8_t c;
    Spin target;
    if (h == 0) {
      c = 2;
      target = static_cast<Spin>(-s);
    } else {
      target = h > 0 ? kPlus : kMinus;
      if (target == s) return 0;
      c = 1;
    }
    for (const auto& f : st_->filters_) {
      if (auto* fr = std::get_if<FreezeRegion>(&f)) {
        if (fr->mask[site] && now < fr->until) return 0;
      } else if (auto* bl = std::get_if<BlockMinusOutside>(&f)) {
        if (!bl->protected_mask[site] && target == kMinus) return 0;
      }
    }
    return c;
  }

  double next_breakpoint() const {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& f : st_->filters_)
      if (auto* fr = std::get_if<FreezeRegion>(&f); fr && fr->until > st_->clock_) b = std::min(b, fr->until);
    return b;
  }

  void place(std::size_t site) {
    const std::uint8_t c = classify(site);
    if (c == cls_[site]) return;
    if (cls_[site] != 0) {
      auto& v = cls_[site] == 1 ? ones_ : halves_;
      const auto p = static_cast<std::size_t>(pos_[site]);
      v[p] = v.back();
      pos_[static_cast<std::size_t>(v[p])] = static_cast<std::int32_t>(p);
      v.pop_back();
      pos_[site] = -1;
    }
    cls_[site] = c;
    if (c != 0) {
      auto& v = c == 1 ? ones_ : halves_;
      pos_[site] = static_cast<std::int32_t>(v.size());
      v.push_back(static_cast<std::int32_t>(site));
    }
  }

  void rebuild() {
    ones_.clear();
    halves_.clear();
    std::fill(cls_.begin(), cls_.end(), 0);
    std::fill(pos_.begin(), pos_.end(), -1);
    for (std::size_t i = 0; i < h_.size(); ++i) place(i);
  }

  std::size_t pick(double total) {
    const double u = rng_.next_open01() * total;
    const bool one = u <= static_cast<double>(ones_.size()) && !ones_.empty();
    const auto& v = (one || halves_.empty()) ? ones_ : halves_;
    return static_cast<std::size_t>(v[rng_.next_below(v.size())]);
  }

  void flip(std::size_t site) {
    const Spin after = static_cast<Spin>(-st_->field_[site]);
    st_->field_.set(site, after);
    for (auto link : st_->topo_->links(site)) {
      if (link < 0) continue;
      const auto n = static_cast<std::size_t>(link);
      h_[n] = static_cast<std::int8_t>(h_[n] + 2 * after);
      place(n);
    }
    place(site);
    if (audit_) audit();
  }

  DynamicsState* st_;
  CounterRng rng_;
  bool audit_;
  std::vector<std::int8_t> h_;
  std::vector<std::uint8_t> cls_;
  std::vector<std::int32_t> pos_;
  std::vector<std::int32_t> ones_;
  std::vector<std::int32_t> halves_;
};

}  // namespace zerotemp

#endif  // ZEROTEMP_REJECTION_FREE_HPP
