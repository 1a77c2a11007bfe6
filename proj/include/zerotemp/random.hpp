#ifndef ZEROTEMP_RANDOM_HPP
#define ZEROTEMP_RANDOM_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zerotemp/error.hpp"
#include "zerotemp/region.hpp"

namespace zerotemp {

/// SplitMix64 finaliser. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: word k is mix64(key + (k + 1) * golden). Random access by counter.
class CounterRng {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t next_u64() { return at(counter_++); }
  std::uint64_t at(std::uint64_t k) const { return mix64(key_ + (k + 1) * kGolden); }

  // Uniform on (0, 1].
  double next_open01() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }
  double next_exponential(double rate) { return -std::log(next_open01()) / rate; }
  // Multiply-shift reduction; bias below n / 2^64.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }
  Spin next_coin() { return (next_u64() >> 63) ? kPlus : kMinus; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

inline std::uint64_t hash_bytes(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

/// Names one independent stream inside a campaign.
struct StreamLabel {
  std::string campaign;
  std::uint64_t replica = 0;
  std::string purpose = "events";
};

inline std::uint64_t derive_seed(std::uint64_t base_seed, const StreamLabel& label) {
  std::uint64_t h = mix64(base_seed ^ 0x5851F42D4C957F2DULL);
  h = hash_bytes(label.campaign, h);
  h = mix64(h ^ mix64(label.replica + CounterRng::kGolden));
  return hash_bytes(label.purpose, h);
}

/// One clock ring of the graphical construction.
struct Event {
  double time = 0;
  std::int64_t site = 0;
  Spin coin = kPlus;
  friend bool operator==(const Event&, const Event&) = default;
};

/// Resumable position of an EventStream.
struct StreamCursor {
  std::uint64_t seed = 0;
  std::uint64_t size = 0;
  std::uint64_t index = 0;  // events already emitted
  double time = 0;

  std::string serialize() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%llu:%llu:%llu:%016llx", static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(size), static_cast<unsigned long long>(index),
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(time)));
    return buf;
  }
  static StreamCursor parse(const std::string& s) {
    unsigned long long a = 0, b = 0, c = 0, t = 0;
    if (std::sscanf(s.c_str(), "%llu:%llu:%llu:%llx", &a, &b, &c, &t) != 4)
      throw InvalidParameter("malformed stream cursor '" + s + "'");
    return {a, b, c, std::bit_cast<double>(static_cast<std::uint64_t>(t))};
  }
};

/// Superposition of N rate-1 site clocks: rate-N exponential gaps, uniform site, one coin per ring.
class EventStream {
 public:
  EventStream(std::uint64_t seed, std::uint64_t size) : seed_(seed), size_(size) {}
  explicit EventStream(const StreamCursor& c) : seed_(c.seed), size_(c.size), index_(c.index), time_(c.time) {}

  /// Next event; always succeeds for a nonempty region.
  Event next() {
    if (pending_) {
      Event e = *pending_;
      pending_.reset();
      return e;
    }
    return generate();
  }

  /// Next event if its time is <= t_max; otherwise it stays pending and nullopt is returned.
  std::optional<Event> next(double t_max) {
    if (size_ == 0) return std::nullopt;
    if (!pending_) pending_ = generate();
    if (pending_->time > t_max) return std::nullopt;
    Event e = *pending_;
    pending_.reset();
    return e;
  }

  /// Cursor after the last consumed event.
  StreamCursor cursor() const {
    if (pending_) return {seed_, size_, index_ - 1, previous_time_};
    return {seed_, size_, index_, time_};
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t size() const { return size_; }

 private:
  Event generate() {
    if (size_ == 0) throw InvalidInput("event stream over an empty region");
    CounterRng rng(seed_, 3 * index_);
    previous_time_ = time_;
    time_ += rng.next_exponential(static_cast<double>(size_));
    Event e{time_, static_cast<std::int64_t>(rng.next_below(size_)), rng.next_coin()};
    ++index_;
    return e;
  }

  std::uint64_t seed_;
  std::uint64_t size_;
  std::uint64_t index_ = 0;
  double time_ = 0;
  double previous_time_ = 0;
  std::optional<Event> pending_;
};

/// Events of a parent source whose site is selected by `remap` (-1 = dropped), re-indexed through it.
template <class Source>
class RestrictedView {
 public:
  RestrictedView(Source& parent, std::span<const std::int32_t> remap) : parent_(&parent), remap_(remap) {}

  std::optional<Event> next(double t_max) {
    while (auto e = parent_->next(t_max)) {
      const auto mapped = remap_[static_cast<std::size_t>(e->site)];
      if (mapped >= 0) return Event{e->time, mapped, e->coin};
    }
    return std::nullopt;
  }

 private:
  Source* parent_;
  std::span<const std::int32_t> remap_;
};

/// Identity remap over the selected indices.
inline std::vector<std::int32_t> mask_remap(std::span<const std::uint8_t> mask) {
  std::vector<std::int32_t> r(mask.size(), -1);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) r[i] = static_cast<std::int32_t>(i);
  return r;
}

}  // namespace zerotemp

#endif  // ZEROTEMP_RANDOM_HPP
