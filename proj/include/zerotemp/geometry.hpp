#ifndef ZEROTEMP_GEOMETRY_HPP
#define ZEROTEMP_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "zerotemp/error.hpp"
#include "zerotemp/region.hpp"

namespace zerotemp {

enum class LogBase { natural, base2, base10 };

inline const char* to_string(LogBase b) {
  switch (b) {
    case LogBase::natural: return "natural";
    case LogBase::base2: return "base2";
    case LogBase::base10: return "base10";
  }
  return "?";
}

inline LogBase parse_log_base(const std::string& s) {
  if (s == "natural" || s == "e" || s == "ln") return LogBase::natural;
  if (s == "base2" || s == "2") return LogBase::base2;
  if (s == "base10" || s == "10") return LogBase::base10;
  throw InvalidParameter("unknown log base '" + s + "'");
}

inline double log_in_base(double x, LogBase b) {
  switch (b) {
    case LogBase::natural: return std::log(x);
    case LogBase::base2: return std::log2(x);
    case LogBase::base10: return std::log10(x);
  }
  return std::log(x);
}

/// Parameters of the cylinder family: side L, dimension d, polylog power c2.
struct GeometryParams {
  int L = 3;
  int d = 4;
  double c2 = 1.5;
  LogBase log_base = LogBase::natural;

  /// (log L)^c2, the radial unit of every shrunk ball.
  double unit() const { return std::pow(log_in_base(L, log_base), c2); }

  /// Radius of the full cylinder base: 2 d L (log L)^c2 (8 L (log L)^c2 for d = 4).
  double cylinder_radius() const { return 2.0 * d * L * unit(); }

  /// Radius of the ball shrunk by `index` units.
  double shrink_radius(int index) const { return (2.0 * d * L - index) * unit(); }

  /// Shrink index of the height slice with l1-norm `height_l1` inside C^(i).
  int slice_index(int i, int height_l1) const { return std::max(i - 2 * height_l1 + 2 * (d - 3), 0); }

  /// Largest admissible i for shrunk_set: 2(d-2)L (4L when d = 4).
  int max_shrink() const { return 2 * (d - 2) * L; }

  int heights() const { return d - 3; }

  void validate() const {
    if (d < 4 || d > kMaxDim) throw InvalidParameter("cylinder geometry needs 4 <= d <= 6");
    if (L < 3) throw InvalidParameter("polylog geometry needs L >= 3");
    if (!(c2 > 0)) throw InvalidParameter("c2 must be positive");
  }
};

inline Region hypercube(int L, int d) {
  if (L < 1) throw InvalidParameter("hypercube side must be >= 1");
  if (d < 1 || d > kMaxDim) throw InvalidParameter("hypercube dimension must be in [1, 6]");
  KeyCodec codec(d);
  std::size_t n = 1;
  for (int k = 0; k < d; ++k) n *= static_cast<std::size_t>(L);
  std::vector<std::uint64_t> keys;
  keys.reserve(n);
  Site s(d);
  for (int k = 0; k < d; ++k) s[k] = 1;
  for (std::size_t c = 0; c < n; ++c) {
    keys.push_back(codec.encode(s));
    for (int k = d - 1; k >= 0; --k) {
      if (++s[k] <= L) break;
      s[k] = 1;
    }
  }
  return Region::from_sorted_keys(d, std::move(keys));
}

namespace detail {

// Membership compares sqrt(n) with r: sqrt is correctly rounded, so a radius computed as
// sqrt(k) includes the norm-k sphere, which r * r would lose to rounding.
inline bool in_ball(std::int64_t n2, double r) { return std::sqrt(static_cast<double>(n2)) <= r; }

// Calls f(x, y, z, x*x+y*y+z*z) for every point of the closed 3-ball, in lexicographic order.
template <class F>
void for_each_ball_point(double r, F&& f) {
  const int R = static_cast<int>(std::floor(r)) + 1;
  for (int x = -R; x <= R; ++x)
    for (int y = -R; y <= R; ++y)
      for (int z = -R; z <= R; ++z) {
        const std::int64_t n = std::int64_t{x} * x + std::int64_t{y} * y + std::int64_t{z} * z;
        if (in_ball(n, r)) f(x, y, z, n);
      }
}

// All height vectors in {lo..hi}^count in lexicographic order.
inline std::vector<std::vector<int>> height_vectors(int count, int lo, int hi) {
  std::vector<std::vector<int>> out;
  std::vector<int> h(static_cast<std::size_t>(count), lo);
  while (true) {
    out.push_back(h);
    int k = count - 1;
    for (; k >= 0; --k) {
      if (++h[static_cast<std::size_t>(k)] <= hi) break;
      h[static_cast<std::size_t>(k)] = lo;
    }
    if (k < 0) break;
  }
  return out;
}

inline int l1(const std::vector<int>& h) {
  int s = 0;
  for (int v : h) s += std::abs(v);
  return s;
}

// Ball-times-heights product, filtered by keep(norm2, height vector).
template <class Keep>
Region ball_product(const GeometryParams& gp, Keep&& keep) {
  const int d = gp.d;
  KeyCodec codec(d);
  const auto hs = height_vectors(gp.heights(), 1, gp.L);
  std::vector<std::uint64_t> keys;
  Site s(d);
  for_each_ball_point(gp.cylinder_radius(), [&](int x, int y, int z, std::int64_t n) {
    s[0] = x;
    s[1] = y;
    s[2] = z;
    for (const auto& h : hs) {
      if (!keep(n, h)) continue;
      for (int k = 0; k < gp.heights(); ++k) s[3 + k] = h[static_cast<std::size_t>(k)];
      keys.push_back(codec.encode(s));
    }
  });
  return Region::from_sorted_keys(d, std::move(keys));
}


// Lifts a 3-d region to d dims with fixed trailing coordinates.
inline Region lift(const Region& r3, const std::vector<int>& heights) {
  const int d = 3 + static_cast<int>(heights.size());
  KeyCodec codec(d);
  std::vector<std::uint64_t> keys;
  keys.reserve(r3.size());
  Site s(d);
  for (std::size_t i = 0; i < r3.size(); ++i) {
    for (int k = 0; k < 3; ++k) s[k] = r3.coord(i, k);
    for (std::size_t k = 0; k < heights.size(); ++k) s[3 + static_cast<int>(k)] = heights[k];
    keys.push_back(codec.encode(s));
  }
  return Region::from_sorted_keys(d, std::move(keys));
}

}  // namespace detail

/// All z in Z^3 with |z|^2 <= r^2.
inline Region discrete_ball3(double r) {
  if (!(r >= 0)) throw InvalidParameter("ball radius must be nonnegative");
  KeyCodec codec(3);
  std::vector<std::uint64_t> keys;
  detail::for_each_ball_point(r, [&](int x, int y, int z, std::int64_t) { keys.push_back(codec.encode(Site{x, y, z})); });
  return Region::from_sorted_keys(3, std::move(keys));
}

/// Base ball of radius 2dL(log L)^c2 times {1..L}^(d-3).
inline Region cylinder(const GeometryParams& gp) {
  gp.validate();
  return detail::ball_product(gp, [](std::int64_t, const std::vector<int>&) { return true; });
}

/// C^(i): the height slice z is the ball shrunk by slice_index(i, |z|_1) units.
inline Region shrunk_set(const GeometryParams& gp, int i) {
  gp.validate();
  if (i < 0 || i > gp.max_shrink())
    throw InvalidParameter("shrink index " + std::to_string(i) + " outside [0, " + std::to_string(gp.max_shrink()) + "]");
  return detail::ball_product(gp, [&](std::int64_t n, const std::vector<int>& h) {
    return detail::in_ball(n, gp.shrink_radius(gp.slice_index(i, detail::l1(h))));
  });
}

/// Largest i with site in C^(i), for sites of the cylinder.
inline int shrink_level(const GeometryParams& gp, const Site& s) {
  const std::int64_t n = s.norm2_first(3);
  int h = 0;
  for (int k = 3; k < gp.d; ++k) h += std::abs(s[k]);
  for (int i = gp.max_shrink(); i > 0; --i)
    if (detail::in_ball(n, gp.shrink_radius(gp.slice_index(i, h)))) return i;
  return 0;
}

/// eta0: - on the top faces (a trailing coordinate equal to L+1), + everywhere else.
inline BoundaryCondition eta0(const GeometryParams& gp, const Region& cyl) {
  return BoundaryCondition::from_rule(cyl, [&](const Site& s) {
    for (int k = 3; k < gp.d; ++k)
      if (s[k] == gp.L + 1) return kMinus;
    return kPlus;
  });
}
inline BoundaryCondition eta0(const GeometryParams& gp) { return eta0(gp, cylinder(gp)); }

/// Region plus boundary condition for a slab or slice construction, with its boundary split.
struct Slab {
  Region region;
  BoundaryCondition bc;
  Region above;        // union of region + e_j, j > 3      (spin -)
  Region below;        // union of region - e_j, j > 3      (spin +)
  Region inner_first;  // inner boundary of the first slice's hole, heights all 1 (spin -)
  Region rest;         // everything else on the boundary   (spin +)
};

struct PartitionReport {
  int i = 0;
  std::size_t slab_size = 0;
  std::size_t boundary_size = 0;
  std::size_t above = 0, below = 0, inner_first = 0, rest = 0;
  bool disjoint = false;
  bool covers = false;
  bool rest_matches_explicit = true;  // d = 4 only: rest equals the closed-form fourth part
  bool ok() const { return disjoint && covers && rest_matches_explicit; }
};

namespace detail {

inline Region translate_heights_union(const Region& r, const GeometryParams& gp, int delta) {
  Region out(r.dim());
  for (int k = 3; k < gp.d; ++k) out = region_union(out, r.translated(k, delta));
  return out;
}

// Closed-form fourth part for d = 4.
inline Region explicit_top_part(const GeometryParams& gp, int i) {
  const int half = (i + 1) / 2;
  Region r3 = (half + 1 <= gp.L) ? boundary(discrete_ball3(gp.shrink_radius(0)))
                                 : boundary(discrete_ball3(gp.shrink_radius(i - 2 * (gp.L - 1))));
  const int height = (half + 1 <= gp.L) ? half + 1 : gp.L;
  return lift(r3, {height});
}

inline Slab build_slab(const GeometryParams& gp, int i, PartitionReport& rep) {
  Slab slab;
  slab.region = ball_product(gp, [&](std::int64_t n, const std::vector<int>& h) {
    const int hl = l1(h);
    return in_ball(n, gp.shrink_radius(gp.slice_index(i, hl))) &&
           !in_ball(n, gp.shrink_radius(gp.slice_index(i + 2, hl)));
  });
  const Region bd = boundary(slab.region);
  slab.above = translate_heights_union(slab.region, gp, +1);
  slab.below = translate_heights_union(slab.region, gp, -1);
  slab.inner_first = lift(inner_boundary(discrete_ball3(gp.shrink_radius(i + 2))),
                          std::vector<int>(static_cast<std::size_t>(gp.heights()), 1));
  const Region listed = region_union(region_union(slab.above, slab.below), slab.inner_first);
  slab.rest = region_difference(bd, listed);

  rep.i = i;
  rep.slab_size = slab.region.size();
  rep.boundary_size = bd.size();
  rep.above = slab.above.size();
  rep.below = slab.below.size();
  rep.inner_first = slab.inner_first.size();
  rep.rest = slab.rest.size();
  rep.disjoint = regions_disjoint(slab.above, slab.below) &&
                 regions_disjoint(slab.inner_first, region_union(slab.above, slab.below)) &&
                 regions_disjoint(bd, slab.region);
  rep.covers = listed.is_subset_of(bd);
  if (gp.d == 4) rep.rest_matches_explicit = slab.rest == explicit_top_part(gp, i);

  const Region minus = region_union(slab.above, slab.inner_first);
  std::vector<Spin> spins(bd.size());
  for (std::size_t k = 0; k < bd.size(); ++k) spins[k] = minus.contains_key(bd.key(k)) ? kMinus : kPlus;
  slab.bc = BoundaryCondition(bd, std::move(spins));
  return slab;
}

inline void check_slab_index(const GeometryParams& gp, int i) {
  gp.validate();
  if (i < 0 || i > gp.max_shrink() - 2)
    throw InvalidParameter("slab index " + std::to_string(i) + " outside [0, " + std::to_string(gp.max_shrink() - 2) + "]");
  // Slice shells must be more than one lattice step thick for the boundary split to hold.
  if (!(gp.unit() > 1.0)) throw InvalidParameter("slab construction needs (log L)^c2 > 1");
}

}  // namespace detail

/// Enumerates the boundary split of C^(i) \ C^(i+2) and checks it is a partition.
inline PartitionReport check_slab_partition(const GeometryParams& gp, int i) {
  detail::check_slab_index(gp, i);
  PartitionReport rep;
  detail::build_slab(gp, i, rep);
  return rep;
}

/// The slab C^(i) \ C^(i+2) with eta^(i): - above and on the first hole, + below and elsewhere.
inline Slab eta_slab(const GeometryParams& gp, int i) {
  detail::check_slab_index(gp, i);
  PartitionReport rep;
  Slab slab = detail::build_slab(gp, i, rep);
  if (!rep.ok())
    throw GeometryError("boundary split of slab " + std::to_string(i) + " is not a partition");
  return slab;
}

/// First layer of the cylinder under eta0 restricted by monotonicity: - above, + below and around.
inline Slab first_layer(const GeometryParams& gp) {
  gp.validate();
  Slab slab;
  slab.region = detail::lift(discrete_ball3(gp.cylinder_radius()), std::vector<int>(static_cast<std::size_t>(gp.heights()), 1));
  slab.above = detail::translate_heights_union(slab.region, gp, +1);
  slab.below = detail::translate_heights_union(slab.region, gp, -1);
  slab.inner_first = Region(gp.d);
  const Region bd = boundary(slab.region);
  slab.rest = region_difference(bd, region_union(slab.above, slab.below));
  std::vector<Spin> spins(bd.size());
  for (std::size_t k = 0; k < bd.size(); ++k) spins[k] = slab.above.contains_key(bd.key(k)) ? kMinus : kPlus;
  slab.bc = BoundaryCondition(bd, std::move(spins));
  return slab;
}

/// Three-dimensional shell with + outside and - on the hole.
struct Shell {
  Region region;
  BoundaryCondition bc;
  double outer = 0;
  double inner = -1;  // negative: no hole
};

/// ball(outer) minus ball(inner); + on boundary sites outside ball(outer), - on those inside ball(inner).
inline Shell shell3_between(double outer, double inner) {
  if (!(outer >= 0) || !(inner < outer)) throw InvalidParameter("shell needs inner < outer, outer >= 0");
  Shell sh{Region(3), {}, outer, inner};
  KeyCodec codec(3);
  std::vector<std::uint64_t> keys;
  detail::for_each_ball_point(outer, [&](int x, int y, int z, std::int64_t n) {
    if (inner < 0 || !detail::in_ball(n, inner)) keys.push_back(codec.encode(Site{x, y, z}));
  });
  sh.region = Region::from_sorted_keys(3, std::move(keys));
  sh.bc = BoundaryCondition::from_rule(sh.region, [&](const Site& s) {
    return detail::in_ball(s.norm2_first(3), outer) ? kMinus : kPlus;
  });
  return sh;
}

/// S_r \ S_{r-l}: + boundary on the outside, - on the inner ball.
inline Shell shell3(double r, double l) {
  if (!(l > 0) || !(l < r)) throw InvalidParameter("shell needs 0 < l < r");
  return shell3_between(r, r - l);
}

}  // namespace zerotemp

#endif  // ZEROTEMP_GEOMETRY_HPP
