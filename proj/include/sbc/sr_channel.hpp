#pragma once

// Symbiotic-radio link physics: Gaussian tail, spreading-factor feasibility,
// primary/secondary SNR laws and the finite-blocklength relation between
// single-message airtime and link success probability.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sbc/errors.hpp"

namespace sbc {

/// Standard normal tail probability Q(x) = P[Z > x].
inline double q_function(double x) {
  if (!std::isfinite(x)) throw DomainError("q_function: non-finite argument");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// Inverse of q_function on (0, 1).
///
/// Rational initial guess (Acklam) refined with Halley steps against erfc, so
/// the result is consistent with q_function to machine precision.
inline double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inverse: probability outside (0,1)");
  // Acklam's approximation of the standard normal quantile at 1 - p.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  const double u = 1.0 - p;  // quantile level
  constexpr double low = 0.02425;
  double x;
  if (u < low) {
    const double r = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  } else if (u <= 1.0 - low) {
    const double r = u - 0.5;
    const double s = r * r;
    x = (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
        (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
  } else {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
        ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
  }
  for (int it = 0; it < 3; ++it) {
    const double err = q_function(x) - p;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf == 0.0) break;
    // Q'(x) = -pdf; Halley step for f(x) = Q(x) - p.
    const double step = -err / pdf;
    x = x - step / (1.0 + 0.5 * x * step);
  }
  return x;
}

/// Physical-layer symbols of one primary/secondary pair.
class ChannelParams {
 public:
  ChannelParams(double gamma_d, double gamma_b, int antennas = 1, int spreading_factor = 1)
      : gamma_d_(gamma_d), gamma_b_(gamma_b), antennas_(antennas), spreading_factor_(spreading_factor) {
    if (!(std::isfinite(gamma_d) && gamma_d > 0.0)) throw DomainError("ChannelParams: gamma_d must be > 0");
    if (!(std::isfinite(gamma_b) && gamma_b >= 0.0)) throw DomainError("ChannelParams: gamma_b must be >= 0");
    if (antennas < 1) throw DomainError("ChannelParams: antenna count must be >= 1");
    if (spreading_factor < 1) throw DomainError("ChannelParams: spreading factor must be >= 1");
  }

  static ChannelParams from_relative(double gamma_d, double delta_gamma, int antennas = 1, int spreading_factor = 1) {
    return ChannelParams(gamma_d, delta_gamma * gamma_d, antennas, spreading_factor);
  }

  double gamma_d() const { return gamma_d_; }
  double gamma_b() const { return gamma_b_; }
  double delta_gamma() const { return gamma_b_ / gamma_d_; }
  int antennas() const { return antennas_; }
  int spreading_factor() const { return spreading_factor_; }

  ChannelParams with_spreading_factor(int k) const { return {gamma_d_, gamma_b_, antennas_, k}; }

  /// Auxiliary term of the spreading-factor bound; exactly 0 when gamma_b == 0.
  double omega() const {
    const double dg = delta_gamma();
    if (dg == 0.0) return 0.0;
    const double m = antennas_;
    const double qa = q_function(std::sqrt(m * gamma_d_));
    return std::sqrt(2.0 * m * dg) * (1.0 - 2.0 * qa) / std::sqrt(1.0 / gamma_d_ + 4.0 * m * dg * qa * (1.0 - qa));
  }

 private:
  double gamma_d_;
  double gamma_b_;
  int antennas_;
  int spreading_factor_;
};

struct SpreadingBound {
  double bound;  // real-valued right-hand side before the ceiling
  int k_min;     // smallest admissible integer K (at least 1)
};

/// Smallest spreading factor for which the primary and secondary links are
/// mutually beneficial.
inline SpreadingBound min_spreading_factor(const ChannelParams& params) {
  const double dg = params.delta_gamma();
  if (dg == 0.0) throw DegenerateInput("min_spreading_factor: delta_gamma == 0 makes the bound singular");
  const double m = params.antennas();
  const double gd = params.gamma_d();
  const double q_direct = q_function(std::sqrt(m * gd));
  const double q_boosted = q_function(std::sqrt(m * gd * (1.0 + dg)));
  const double q_shrunk = q_function(std::sqrt(m * gd / (1.0 + dg)) * (1.0 - dg));
  const double ratio = (q_direct - q_boosted) / (q_shrunk - q_boosted);
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw DegenerateInput("min_spreading_factor: tail ratio left (0,1); SNR too high for double precision");
  }
  const double w = params.omega();
  const double qi = q_inverse(ratio);
  const double bound = qi * qi / (w * w);
  return {bound, std::max(1, static_cast<int>(std::ceil(bound)))};
}

struct CompositeSnr {
  double primary;    // direct plus backscatter multipath
  double secondary;  // spreading gain on the backscatter link
};

inline CompositeSnr composite_snr(const ChannelParams& params) {
  return {params.gamma_d() + params.gamma_b(), params.spreading_factor() * params.gamma_b()};
}

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Bandwidth, rate and capacity of one frequency band.
struct LinkBudget {
  double bandwidth_hz = 1e6;
  double rate_bps = 100e3;
  double capacity_bps = 150e3;
  double enhanced_capacity_bps = 150e3;
  int subcarriers = 1;
  double tx_power_w = 1.0;

  double capacity(bool enhanced) const { return enhanced ? enhanced_capacity_bps : capacity_bps; }
};

/// Capacity after multipath gain, scaled by the Shannon ratio of primary SNR
/// with and without the backscattered copy.
inline double shannon_scaled_capacity(double capacity_bps, const ChannelParams& params) {
  const double gp = composite_snr(params).primary;
  return capacity_bps * std::log2(1.0 + gp) / std::log2(1.0 + params.gamma_d());
}

inline LinkBudget paper_link_budget(const ChannelParams& params) {
  LinkBudget lb;
  lb.tx_power_w = dbm_to_watts(30.0);
  lb.enhanced_capacity_bps = shannon_scaled_capacity(lb.capacity_bps, params);
  return lb;
}

namespace detail {

// Normal-approximation argument with blocklength L = N T B and per-use
// capacity/rate; log2 throughout, log2(e) in the denominator.
inline double blocklength_argument(double airtime_s, const LinkBudget& budget, bool enhanced) {
  const double bw = budget.bandwidth_hz;
  const double len = budget.subcarriers * airtime_s * bw;
  const double c = budget.capacity(enhanced) / bw;
  const double r = budget.rate_bps / bw;
  return (len * c - len * r + std::log2(len) / 2.0) / (std::numbers::log2e * std::sqrt(len));
}

inline void check_budget(const LinkBudget& budget) {
  if (!(budget.bandwidth_hz > 0.0 && budget.rate_bps > 0.0 && budget.capacity_bps > 0.0 &&
        budget.enhanced_capacity_bps > 0.0 && budget.subcarriers >= 1)) {
    throw DomainError("LinkBudget: bandwidth, rate, capacities must be > 0 and subcarriers >= 1");
  }
}

}  // namespace detail

/// Success probability of one message occupying `airtime_s` seconds.
inline double link_success_prob(double airtime_s, const LinkBudget& budget, bool enhanced) {
  detail::check_budget(budget);
  if (!(std::isfinite(airtime_s) && airtime_s > 0.0)) throw DomainError("link_success_prob: airtime must be > 0");
  if (airtime_s * budget.bandwidth_hz < 1.0) throw BlocklengthTooSmall("link_success_prob: T*B < 1");
  return 1.0 - q_function(detail::blocklength_argument(airtime_s, budget, enhanced));
}

/// Airtime at which link_success_prob reaches `p_target`.
///
/// Bisection on [1/B, hi], where hi doubles until the target is bracketed.
/// Deterministic; converges to |P(T) - p_target| < 1e-12 or adjacent doubles.
inline double invert_latency(double p_target, const LinkBudget& budget, bool enhanced) {
  detail::check_budget(budget);
  if (!(p_target > 0.0 && p_target < 1.0)) throw DomainError("invert_latency: target outside (0,1)");
  if (budget.capacity(enhanced) <= budget.rate_bps) {
    throw InfeasibleRate("invert_latency: capacity must exceed rate for a finite airtime");
  }
  double lo = 1.0 / budget.bandwidth_hz;
  if (link_success_prob(lo, budget, enhanced) >= p_target) {
    std::ostringstream os;
    os << "invert_latency: target " << p_target << " is already exceeded at unit blocklength";
    throw DomainError(os.str());
  }
  double hi = 2.0 * lo;
  int grow = 0;
  while (link_success_prob(hi, budget, enhanced) < p_target) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 200) throw InfeasibleRate("invert_latency: bracket did not close");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double pm = link_success_prob(mid, budget, enhanced);
    if (std::abs(pm - p_target) < 1e-12) return mid;
    (pm < p_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Single-message airtimes on plain and enhanced links.
struct Airtimes {
  double plain = 1.0;     // T_s
  double enhanced = 1.0;  // T_e
};

/// Airtimes at which plain and enhanced links both reach `target`; the
/// multipath gain is spent on speed, so enhanced <= plain whenever C_e >= C.
inline Airtimes airtimes_at(double target, const LinkBudget& budget) {
  return {invert_latency(target, budget, false), invert_latency(target, budget, true)};
}

}  // namespace sbc
