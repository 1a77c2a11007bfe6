#ifndef ZEROTEMP_STATISTICS_HPP
#define ZEROTEMP_STATISTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "zerotemp/error.hpp"

namespace zerotemp::stats {

/// Quantile by linear interpolation between order statistics: h = (n-1)p.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InsufficientData("quantile of an empty sample");
  if (p < 0 || p > 1) throw InvalidParameter("quantile level outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, p);
}

/// 1-based ranks (r, s) with P(X_(r) <= q_p <= X_(s)) >= level, from the Binomial(n, p) law.
inline std::pair<std::size_t, std::size_t> order_statistic_ci_ranks(std::size_t n, double p, double level = 0.95) {
  if (n == 0) throw InsufficientData("confidence interval of an empty sample");
  const boost::math::binomial_distribution<double> B(static_cast<double>(n), p);
  const double alpha = (1.0 - level) / 2.0;
  std::size_t r = 1;
  for (std::size_t k = 1; k <= n; ++k) {
    // P(B <= k-1) is the probability that X_(k) exceeds the quantile.
    if (boost::math::cdf(B, static_cast<double>(k - 1)) <= alpha) r = k;
    else break;
  }
  std::size_t s = n;
  for (std::size_t k = n; k >= 1; --k) {
    if (boost::math::cdf(B, static_cast<double>(k - 1)) >= 1.0 - alpha) s = k;
    else break;
  }
  return {r, s};
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw InsufficientData("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  if (v.size() < 2) throw InsufficientData("variance needs two samples");
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double standard_error(std::span<const double> v) { return std::sqrt(variance(v) / static_cast<double>(v.size())); }

struct RankTest {
  double u = 0;
  double z = 0;
  double p = 1;  // two-sided
};

/// Mann-Whitney U with midranks, tie-corrected normal approximation.
inline RankTest mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("rank test needs two nonempty samples");
  std::vector<std::pair<double, int>> all;
  for (double x : a) all.push_back({x, 0});
  for (double x : b) all.push_back({x, 1});
  std::sort(all.begin(), all.end());
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size()), n = n1 + n2;
  double rank_a = 0, tie_term = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      if (all[k].second == 0) rank_a += mid;
    i = j;
  }
  RankTest r;
  r.u = rank_a - n1 * (n1 + 1) / 2.0;
  const double mu = n1 * n2 / 2.0;
  const double sigma = std::sqrt(n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))));
  if (sigma == 0) return r;
  r.z = (r.u - mu) / sigma;
  r.p = 2.0 * boost::math::cdf(boost::math::complement(boost::math::normal_distribution<double>(), std::abs(r.z)));
  return r;
}

struct GoodnessOfFit {
  double statistic = 0;
  double p = 1;
};

/// Asymptotic Kolmogorov survival function with the Stephens small-sample correction.
inline double kolmogorov_q(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0, sign = 1;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// One-sample KS test against Exponential(rate).
inline GoodnessOfFit ks_exponential(std::vector<double> x, double rate) {
  if (x.empty()) throw InsufficientData("KS test on an empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 1.0 - std::exp(-rate * x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_q(d, x.size())};
}

/// Pearson chi-square test of equal cell probabilities.
inline GoodnessOfFit chi_square_uniform(std::span<const std::uint64_t> counts) {
  if (counts.size() < 2) throw InsufficientData("chi-square needs two cells");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  const double expect = total / static_cast<double>(counts.size());
  double chi2 = 0;
  for (auto c : counts) chi2 += (static_cast<double>(c) - expect) * (static_cast<double>(c) - expect) / expect;
  const boost::math::chi_squared_distribution<double> dist(static_cast<double>(counts.size() - 1));
  return {chi2, boost::math::cdf(boost::math::complement(dist, chi2))};
}

}  // namespace zerotemp::stats

#endif  // ZEROTEMP_STATISTICS_HPP
