#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace sbc::numeric {

// Above this size binomial terms are evaluated in log space.
inline constexpr int kLogSpaceThreshold = 60;

// C(n, k) with the convention C(n, k) = 0 for k < 0, k > n or n < 0.
inline double choose(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (n > kLogSpaceThreshold) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  }
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

// P[X = k] for X ~ Binomial(n, q); q is the per-trial *failure* probability
// throughout this library. Out-of-range k contributes 0.
inline double binom_pmf(int n, int k, double q) {
  if (n < 0 || k < 0 || k > n) return 0.0;
  if (q <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (q >= 1.0) return k == n ? 1.0 : 0.0;
  if (n > kLogSpaceThreshold) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                            k * std::log(q) + (n - k) * std::log1p(-q);
    return std::exp(log_term);
  }
  return choose(n, k) * std::pow(q, k) * std::pow(1.0 - q, n - k);
}

// P[X <= t]; an upper limit below zero is an empty sum.
inline double binom_cdf(int n, int t, double q) {
  if (t < 0) return 0.0;
  if (t >= n) return 1.0;
  double s = 0.0;
  for (int k = 0; k <= t; ++k) s += binom_pmf(n, k, q);
  return std::min(s, 1.0);
}

// Distribution of a sum of independent non-negative integer counts, stored as
// a probability vector indexed by count.
using CountDistribution = std::vector<double>;

inline CountDistribution convolve(const CountDistribution& a, const CountDistribution& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  CountDistribution out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

inline double cdf(const CountDistribution& d, int t) {
  double s = 0.0;
  for (int k = 0; k <= t && k < static_cast<int>(d.size()); ++k) s += d[k];
  return std::min(s, 1.0);
}

// P[at least `need` of the independent events succeed].
inline double at_least(const std::vector<double>& success, int need) {
  CountDistribution d{1.0};
  for (double p : success) d = convolve(d, {1.0 - p, p});
  double s = 0.0;
  for (int k = std::max(need, 0); k < static_cast<int>(d.size()); ++k) s += d[k];
  return std::min(s, 1.0);
}

}  // namespace sbc::numeric
