#ifndef ZEROTEMP_REGION_HPP
#define ZEROTEMP_REGION_HPP

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zerotemp/error.hpp"

namespace zerotemp {

using Spin = std::int8_t;
inline constexpr Spin kPlus = 1;
inline constexpr Spin kMinus = -1;

inline constexpr int kMaxDim = 6;

/// A point of Z^d, d <= kMaxDim.
class Site {
 public:
  Site() = default;
  explicit Site(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidParameter("site dimension out of range");
  }
  Site(std::initializer_list<int> coords) : Site(static_cast<int>(coords.size())) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  int dim() const { return dim_; }
  int operator[](int k) const { return c_[static_cast<std::size_t>(k)]; }
  int& operator[](int k) { return c_[static_cast<std::size_t>(k)]; }

  Site shifted(int axis, int delta) const {
    Site s = *this;
    s.c_[static_cast<std::size_t>(axis)] += delta;
    return s;
  }

  std::int64_t norm2_first(int k) const {
    std::int64_t n = 0;
    for (int a = 0; a < k; ++a) n += std::int64_t{c_[a]} * c_[a];
    return n;
  }

  friend bool operator==(const Site& a, const Site& b) {
    if (a.dim_ != b.dim_) return false;
    return std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }
  friend std::strong_ordering operator<=>(const Site& a, const Site& b) {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int k = 0; k < a.dim_; ++k)
      if (auto c = a.c_[k] <=> b.c_[k]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::string to_string() const {
    std::string s = "(";
    for (int k = 0; k < dim_; ++k) {
      if (k) s += ',';
      s += std::to_string(c_[k]);
    }
    return s + ")";
  }

 private:
  std::array<int, kMaxDim> c_{};
  int dim_ = 0;
};

/// Packs a site into 64 bits so that unsigned key order equals lexicographic coordinate order.
class KeyCodec {
 public:
  KeyCodec() = default;
  explicit KeyCodec(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw InvalidParameter("dimension must be in [1, 6]");
    bits_ = std::min(32, 64 / dim);
    bias_ = std::int64_t{1} << (bits_ - 1);
  }

  int dim() const { return dim_; }
  // Largest |coordinate| a region site may have; leaves room for one step outward.
  std::int64_t max_abs() const { return bias_ - 2; }

  std::uint64_t encode(const Site& s) const {
    std::uint64_t key = 0;
    for (int k = 0; k < dim_; ++k) {
      const std::int64_t c = s[k];
      if (c > bias_ - 1 || c < -bias_ + 1)
        throw InvalidParameter("coordinate " + std::to_string(c) + " exceeds packed range");
      key = (key << bits_) | static_cast<std::uint64_t>(c + bias_);
    }
    return key;
  }

  Site decode(std::uint64_t key) const {
    Site s(dim_);
    const std::uint64_t mask = bits_ == 64 ? ~0ULL : ((1ULL << bits_) - 1);
    for (int k = dim_ - 1; k >= 0; --k) {
      s[k] = static_cast<int>(static_cast<std::int64_t>(key & mask) - bias_);
      key >>= bits_;
    }
    return s;
  }

  int coord(std::uint64_t key, int axis) const {
    const std::uint64_t mask = (1ULL << bits_) - 1;
    return static_cast<int>(static_cast<std::int64_t>((key >> shift(axis)) & mask) - bias_);
  }

  // Key offset of a unit step along `axis`; valid while the coordinate stays in range.
  std::uint64_t step(int axis) const { return 1ULL << shift(axis); }

 private:
  int shift(int axis) const { return bits_ * (dim_ - 1 - axis); }

  int dim_ = 0;
  int bits_ = 0;
  std::int64_t bias_ = 0;
};

/// Finite set of sites with a dense lexicographic index.
class Region {
 public:
  Region() = default;
  explicit Region(int dim) : codec_(dim) {}

  static Region from_sites(int dim, std::span<const Site> sites) {
    Region r(dim);
    r.keys_.reserve(sites.size());
    for (const auto& s : sites) {
      if (s.dim() != dim) throw InvalidParameter("site dimension mismatch");
      r.check_range(s);
      r.keys_.push_back(r.codec_.encode(s));
    }
    std::sort(r.keys_.begin(), r.keys_.end());
    if (std::adjacent_find(r.keys_.begin(), r.keys_.end()) != r.keys_.end())
      throw InvalidParameter("duplicate site in region");
    return r;
  }

  // Keys must be strictly increasing.
  static Region from_sorted_keys(int dim, std::vector<std::uint64_t> keys) {
    Region r(dim);
    for (std::size_t i = 1; i < keys.size(); ++i)
      if (keys[i - 1] >= keys[i]) throw InvalidParameter("region keys not strictly increasing");
    r.keys_ = std::move(keys);
    return r;
  }

  int dim() const { return codec_.dim(); }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const KeyCodec& codec() const { return codec_; }
  std::span<const std::uint64_t> keys() const { return keys_; }
  std::uint64_t key(std::size_t i) const { return keys_[i]; }
  Site site(std::size_t i) const { return codec_.decode(keys_[i]); }
  int coord(std::size_t i, int axis) const { return codec_.coord(keys_[i], axis); }

  std::optional<std::size_t> find_key(std::uint64_t key) const {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) return std::nullopt;
    return static_cast<std::size_t>(it - keys_.begin());
  }
  std::optional<std::size_t> index_of(const Site& s) const {
    if (s.dim() != dim() || !in_range(s)) return std::nullopt;
    return find_key(codec_.encode(s));
  }
  bool contains_key(std::uint64_t key) const { return std::binary_search(keys_.begin(), keys_.end(), key); }
  bool contains(const Site& s) const { return index_of(s).has_value(); }

  bool is_subset_of(const Region& other) const {
    return dim() == other.dim() &&
           std::includes(other.keys_.begin(), other.keys_.end(), keys_.begin(), keys_.end());
  }

  Region translated(int axis, int delta) const {
    Region r(dim());
    r.keys_.reserve(keys_.size());
    for (auto k : keys_) {
      Site s = codec_.decode(k).shifted(axis, delta);
      r.check_range(s);
      r.keys_.push_back(codec_.encode(s));
    }
    return r;
  }

  friend bool operator==(const Region& a, const Region& b) {
    return a.dim() == b.dim() && a.keys_ == b.keys_;
  }

 private:
  bool in_range(const Site& s) const {
    for (int k = 0; k < s.dim(); ++k)
      if (s[k] > codec_.max_abs() + 1 || s[k] < -codec_.max_abs() - 1) return false;
    return true;
  }
  void check_range(const Site& s) const {
    for (int k = 0; k < s.dim(); ++k)
      if (s[k] > codec_.max_abs() || s[k] < -codec_.max_abs())
        throw InvalidParameter("site " + s.to_string() + " outside representable range");
  }

  KeyCodec codec_;
  std::vector<std::uint64_t> keys_;
};

namespace detail {
template <class Op>
Region combine(const Region& a, const Region& b, Op op) {
  if (a.dim() != b.dim()) throw InvalidParameter("region dimension mismatch");
  std::vector<std::uint64_t> out;
  op(a.keys().begin(), a.keys().end(), b.keys().begin(), b.keys().end(), std::back_inserter(out));
  return Region::from_sorted_keys(a.dim(), std::move(out));
}
}  // namespace detail

inline Region region_union(const Region& a, const Region& b) {
  return detail::combine(a, b, [](auto... args) { return std::set_union(args...); });
}
inline Region region_difference(const Region& a, const Region& b) {
  return detail::combine(a, b, [](auto... args) { return std::set_difference(args...); });
}
inline Region region_intersection(const Region& a, const Region& b) {
  return detail::combine(a, b, [](auto... args) { return std::set_intersection(args...); });
}
inline bool regions_disjoint(const Region& a, const Region& b) {
  return region_intersection(a, b).empty();
}

/// Outer boundary: sites outside `reg` with a nearest neighbour in `reg`.
inline Region boundary(const Region& reg) {
  const auto& codec = reg.codec();
  std::vector<std::uint64_t> out;
  out.reserve(reg.size());
  for (auto key : reg.keys()) {
    for (int a = 0; a < reg.dim(); ++a) {
      const auto step = codec.step(a);
      for (auto nk : {key + step, key - step})
        if (!reg.contains_key(nk)) out.push_back(nk);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return Region::from_sorted_keys(reg.dim(), std::move(out));
}

/// Inner boundary: sites of `reg` with a nearest neighbour outside it.
inline Region inner_boundary(const Region& reg) {
  const auto& codec = reg.codec();
  std::vector<std::uint64_t> out;
  for (auto key : reg.keys()) {
    bool touches = false;
    for (int a = 0; a < reg.dim() && !touches; ++a) {
      const auto step = codec.step(a);
      touches = !reg.contains_key(key + step) || !reg.contains_key(key - step);
    }
    if (touches) out.push_back(key);
  }
  return Region::from_sorted_keys(reg.dim(), std::move(out));
}

/// Spin assignment on exactly the outer boundary of a region.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  BoundaryCondition(Region domain, std::vector<Spin> spins)
      : domain_(std::move(domain)), spins_(std::move(spins)) {
    if (spins_.size() != domain_.size()) throw InvalidParameter("boundary spin count mismatch");
    for (auto s : spins_)
      if (s != kPlus && s != kMinus) throw InvalidParameter("boundary spins must be +1 or -1");
  }

  static BoundaryCondition uniform(const Region& reg, Spin s) {
    Region dom = boundary(reg);
    std::vector<Spin> spins(dom.size(), s);
    return {std::move(dom), std::move(spins)};
  }

  // rule(const Site&) -> Spin, evaluated on every boundary site.
  template <class Rule>
  static BoundaryCondition from_rule(const Region& reg, Rule&& rule) {
    Region dom = boundary(reg);
    std::vector<Spin> spins(dom.size());
    for (std::size_t i = 0; i < dom.size(); ++i) spins[i] = rule(dom.site(i));
    return {std::move(dom), std::move(spins)};
  }

  const Region& domain() const { return domain_; }
  std::span<const Spin> spins() const { return spins_; }
  Spin spin(std::size_t i) const { return spins_[i]; }

  Spin at(const Site& s) const {
    auto i = domain_.index_of(s);
    if (!i) throw InvalidInput("site " + s.to_string() + " not on boundary");
    return spins_[*i];
  }

  bool covers(const Region& reg) const { return domain_ == boundary(reg); }

  std::size_t count(Spin s) const { return static_cast<std::size_t>(std::count(spins_.begin(), spins_.end(), s)); }

  /// Pointwise a <= b on a common domain.
  friend bool pointwise_le(const BoundaryCondition& a, const BoundaryCondition& b) {
    if (!(a.domain_ == b.domain_)) return false;
    for (std::size_t i = 0; i < a.spins_.size(); ++i)
      if (a.spins_[i] > b.spins_[i]) return false;
    return true;
  }

 private:
  Region domain_;
  std::vector<Spin> spins_;
};

}  // namespace zerotemp

#endif  // ZEROTEMP_REGION_HPP
