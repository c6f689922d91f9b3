#pragma once

// Closed-form success rate, latency, communication overhead and energy of
// S-PBFT, S-RAFT and their plain wireless baselines.
//
// Failure counts are composed phase by phase: a PBFT-family network of n nodes
// with budget b succeeds when
//   pre-prepare + prepare  i + j <= b   (i missed pre-prepares, j prepares lost
//                                        on the way to the primary)
//   commit                 l <= b       (nodes with more than b of their n-1
//                                        inbound commits lost)
//   reply                  l + m <= b   (m replies lost among committed nodes)
// The `printed` namespace keeps the literal appendix case sums so their gap to
// the exact composition can be reported.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbc/consensus.hpp"
#include "sbc/numeric.hpp"

namespace sbc {

enum class PbftPhase { pre_prepare, prepare, commit, reply };

struct PbftLinkProbs {
  double active;   // pre-prepare, prepare and active commit links
  double passive;  // the two backscatter commit links into each replica
  double reply;    // node -> client
};

inline PbftLinkProbs pbft_link_probs(const ConsensusConfig& cfg, bool symbiotic) {
  if (!symbiotic) return {cfg.p_s, cfg.p_s, cfg.p_s};
  return {cfg.p_e, cfg.backscatter_p(), cfg.backscatter_p()};
}

namespace detail {

inline void require_pbft_network(int n, int b) {
  if (n < 4) throw DegenerateNetwork("PBFT-family analysis needs n >= 4");
  if (b < 0 || b > n - 3) throw DomainError("PBFT-family fault budget must lie in [0, n-3]");
}

// Exact power with the empty-product convention; 0^0 = 1.
inline double ipow(double x, int k) { return k == 0 ? 1.0 : std::pow(x, k); }

}  // namespace detail

// --- replica commit reception ----------------------------------------------
// A replica hears n-1 commits: n-3 active and 2 backscattered. It keeps up
// when at most b of them are lost, split by how many active links failed.

/// At most b-2 active losses; the passive pair is unconstrained.
inline double replica_commit_case_few_active(int n, int b, double p_active) {
  return numeric::binom_cdf(n - 3, b - 2, 1.0 - p_active);
}

/// Exactly b-1 active losses and at most one passive loss.
inline double replica_commit_case_one_spare(int n, int b, double p_active, double p_passive) {
  return numeric::binom_pmf(n - 3, b - 1, 1.0 - p_active) * (1.0 - (1.0 - p_passive) * (1.0 - p_passive));
}

/// Exactly b active losses and both passive links delivered.
inline double replica_commit_case_no_spare(int n, int b, double p_active, double p_passive) {
  return numeric::binom_pmf(n - 3, b, 1.0 - p_active) * p_passive * p_passive;
}

inline double replica_commit_success(int n, int b, const PbftLinkProbs& p) {
  return replica_commit_case_few_active(n, b, p.active) + replica_commit_case_one_spare(n, b, p.active, p.passive) +
         replica_commit_case_no_spare(n, b, p.active, p.passive);
}

/// The primary hears n-1 active commits and tolerates b losses.
inline double primary_commit_success(int n, int b, const PbftLinkProbs& p) {
  return numeric::binom_cdf(n - 1, b, 1.0 - p.active);
}

/// Distribution of the number of nodes (replicas and primary) that fail commit.
inline numeric::CountDistribution commit_failure_distribution(int n, int b, const PbftLinkProbs& p) {
  const double q_rep = 1.0 - replica_commit_success(n, b, p);
  const double p_pri = primary_commit_success(n, b, p);
  numeric::CountDistribution d(n + 1, 0.0);
  for (int l = 0; l <= n; ++l) {
    d[l] = p_pri * numeric::binom_pmf(n - 1, l, q_rep) + (1.0 - p_pri) * numeric::binom_pmf(n - 1, l - 1, q_rep);
  }
  return d;
}

/// Reply phase after l commit failures: at most b - l of the n - l committed
/// nodes may lose their reply.
inline double reply_success(int n, int b, int l, double p_reply) {
  return numeric::binom_cdf(n - l, b - l, 1.0 - p_reply);
}

inline double pbft_family_phase_success(PbftPhase phase, int n, int b, const PbftLinkProbs& p, int carried) {
  detail::require_pbft_network(n, b);
  if (carried < 0 || carried > b) throw DomainError("carried failures must lie in [0, b]");
  const double qa = 1.0 - p.active;
  switch (phase) {
    case PbftPhase::pre_prepare:
      return numeric::binom_cdf(n - 1, b - carried, qa);
    case PbftPhase::prepare:
      return numeric::binom_cdf(n - 1 - carried, b - carried, qa);
    case PbftPhase::commit:
      return numeric::cdf(commit_failure_distribution(n, b, p), b - carried);
    case PbftPhase::reply:
      return reply_success(n, b, carried, p.reply);
  }
  return 0.0;
}

inline double pbft_family_success(int n, int b, const PbftLinkProbs& p) {
  detail::require_pbft_network(n, b);
  const double qa = 1.0 - p.active;
  double agree = 0.0;
  for (int i = 0; i <= b; ++i) {
    agree += numeric::binom_pmf(n - 1, i, qa) * numeric::binom_cdf(n - 1 - i, b - i, qa);
  }
  const auto commit = commit_failure_distribution(n, b, p);
  double finish = 0.0;
  for (int l = 0; l <= b; ++l) finish += commit[l] * reply_success(n, b, l, p.reply);
  return std::clamp(agree * finish, 0.0, 1.0);
}

inline double spbft_phase_success(PbftPhase phase, const ConsensusConfig& cfg, int carried) {
  return pbft_family_phase_success(phase, cfg.n, cfg.budget(), pbft_link_probs(cfg, true), carried);
}

inline double spbft_success(const ConsensusConfig& cfg) {
  return pbft_family_success(cfg.n, cfg.budget(), pbft_link_probs(cfg, true));
}

/// Plain wireless PBFT: the same structure with every link at p_s.
inline double pbft_success(const ConsensusConfig& cfg) {
  return pbft_family_success(cfg.n, cfg.budget(), pbft_link_probs(cfg, false));
}

namespace printed {

// Literal appendix terms. These are not a partition of the "at most b losses"
// event: the middle term drops the both-delivered passive outcome and the last
// term's binomial index disagrees with its exponent. Kept for reporting.

inline double case_32(int n, int b, double pe) { return numeric::binom_cdf(n - 3, b - 2, 1.0 - pe); }

inline double case_33(int n, int b, double pe, double ps) {
  const double c = numeric::choose(n - 3, b - 1);
  if (c == 0.0) return 0.0;
  return c * detail::ipow(1.0 - pe, b - 1) * detail::ipow(pe, n - b - 2) * 2.0 * ps * (1.0 - ps);
}

inline double case_34(int n, int b, double pe, double ps) {
  const double c = numeric::choose(n - 3, b - 2);
  if (c == 0.0) return 0.0;
  return c * detail::ipow(1.0 - pe, b - 2) * detail::ipow(pe, n - b - 3) * ps * ps;
}

/// Replica commit reception as printed: one closed expression.
inline double replica_commit_success(int n, int b, double pe, double ps) {
  double first = 0.0;
  for (int k = 0; k <= b - 2; ++k) {
    first += numeric::choose(n - 3, k) * detail::ipow(1.0 - pe, k) * detail::ipow(pe, n - 3 - k);
  }
  double second = 0.0, third = 0.0;
  if (b - 1 >= 0) {
    second = numeric::choose(n - 3, b - 1) * detail::ipow(1.0 - pe, b - 1) * detail::ipow(pe, n - b - 2) * 2.0 * ps *
             (1.0 - ps);
  }
  if (b - 2 >= 0) {
    third = numeric::choose(n - 3, b - 2) * detail::ipow(1.0 - pe, b - 2) * detail::ipow(pe, n - b - 3) * ps * ps;
  }
  return first + second + third;
}

inline double case_35(int n, int b, double p_re) {
  double s = 0.0;
  for (int l = 0; l <= b - 1; ++l) s += numeric::binom_pmf(n - 1, l, 1.0 - p_re);
  return s;
}

inline double case_36(int n, int b, double p_re, double p_pn) {
  const double c = numeric::choose(n - 1, b - 1);
  if (c == 0.0) return 0.0;
  return c * detail::ipow(1.0 - p_re, b - 1) * detail::ipow(p_re, n - b) * p_pn;
}

/// Commit-phase success as printed: one closed expression.
inline double commit_success(int n, int b, double p_re, double p_pn) {
  double s = 0.0;
  for (int l = 0; l <= b - 1; ++l) {
    s += numeric::choose(n - 1, l) * detail::ipow(1.0 - p_re, l) * detail::ipow(p_re, n - 1 - l);
  }
  if (b - 1 >= 0) {
    s += numeric::choose(n - 1, b - 1) * detail::ipow(1.0 - p_re, b - 1) * detail::ipow(p_re, n - b) * p_pn;
  }
  return s;
}

/// The nested four-phase formula with its printed indices (C^{b+1} in the
/// commit term, C_{n-1}^m with P_e in the reply term). The self-referential
/// reply limit is read as b - l.
inline double spbft_success(const ConsensusConfig& cfg) {
  const int n = cfg.n;
  const int b = cfg.budget();
  detail::require_pbft_network(n, b);
  const double pe = cfg.p_e;
  const double ps = cfg.p_s;
  const double qe = 1.0 - pe;
  double agree = 0.0;
  for (int i = 0; i <= b; ++i) {
    double inner = 0.0;
    for (int j = 0; j <= b - i; ++j) {
      inner += numeric::choose(n - 1 - i, j) * detail::ipow(qe, j) * detail::ipow(pe, n - 1 - i - j);
    }
    agree += numeric::choose(n - 1, i) * detail::ipow(qe, i) * detail::ipow(pe, n - 1 - i) * inner;
  }
  const double p_re = replica_commit_success(n, b, pe, ps);
  const double p_pn = numeric::binom_cdf(n - 1, b, qe);
  double finish = 0.0;
  for (int l = 0; l <= b; ++l) {
    double commit = numeric::choose(n - 1, l) * detail::ipow(1.0 - p_re, l) * detail::ipow(p_re, n - 1 - l);
    if (n - b - 2 >= 0) {
      commit += numeric::choose(n - 1, b + 1) * detail::ipow(1.0 - p_re, b + 1) * detail::ipow(p_re, n - b - 2) * p_pn;
    }
    double reply = 0.0;
    for (int m = 0; m <= b - l; ++m) {
      reply += numeric::choose(n - 1, m) * detail::ipow(qe, m) * detail::ipow(pe, n - l - m);
    }
    finish += commit * reply;
  }
  return agree * finish;
}

}  // namespace printed

// --- RAFT family -------------------------------------------------------------

struct RaftLinkProbs {
  double down;   // leader -> follower
  double up;     // follower -> leader (and relay forwards)
  double relay;  // relay -> two-hop follower, always an active plain link
};

inline RaftLinkProbs raft_link_probs(const ConsensusConfig& cfg, bool symbiotic) {
  if (!symbiotic) return {cfg.p_s, cfg.p_s, cfg.p_s};
  if (cfg.raft_assignment == RaftAssignment::printed) return {cfg.p_s, cfg.p_e, cfg.p_s};
  return {cfg.p_e, cfg.backscatter_p(), cfg.p_s};
}

/// Downlink allows i failures, the uplink of the n-1-i reached followers the
/// remaining f-i.
inline double raft_family_success(int n, int f, double p_down, double p_up) {
  if (n < 2) throw DegenerateNetwork("RAFT-family analysis needs a leader and a follower");
  double s = 0.0;
  for (int i = 0; i <= f; ++i) {
    s += numeric::binom_pmf(n - 1, i, 1.0 - p_down) * numeric::binom_cdf(n - 1 - i, f - i, 1.0 - p_up);
  }
  return std::clamp(s, 0.0, 1.0);
}

inline double sraft_success(const ConsensusConfig& cfg) {
  if (cfg.n < 3) throw DegenerateNetwork("S-RAFT analysis needs n >= 3");
  const auto p = raft_link_probs(cfg, true);
  return raft_family_success(cfg.n, cfg.budget(), p.down, p.up);
}

inline double raft_success(const ConsensusConfig& cfg) {
  if (cfg.n < 3) throw DegenerateNetwork("RAFT analysis needs n >= 3");
  return raft_family_success(cfg.n, cfg.budget(), cfg.p_s, cfg.p_s);
}

/// A RAFT stage in which `two_hop` followers are reached through relays.
/// Followers 1..one_hop() hear the leader directly; two-hop follower k
/// (0-based) is served by one-hop follower 1 + k mod one_hop().
struct RaftShape {
  int n = 3;
  int two_hop = 0;
  bool symbiotic = false;

  int one_hop() const { return n - 1 - two_hop; }

  std::vector<int> dependents() const {
    const int u = one_hop();
    std::vector<int> d(u, 0);
    for (int k = 0; k < two_hop; ++k) ++d[k % u];
    return d;
  }

  void validate() const {
    if (n < 2) throw DegenerateNetwork("RAFT stage needs a leader and a follower");
    if (two_hop < 0 || one_hop() < 1) throw ValidityError("RAFT stage needs at least one one-hop follower");
  }
};

/// Two-hop follower count for a fraction of all nodes, rounded to nearest
/// and capped so one one-hop follower remains.
inline int two_hop_count(int n, double fraction) {
  const int h = static_cast<int>(std::floor(fraction * n + 0.5));
  return std::clamp(h, 0, std::max(0, n - 2));
}

inline double raft_shape_success(const RaftShape& shape, int f, const RaftLinkProbs& p) {
  shape.validate();
  numeric::CountDistribution total{1.0};
  const double q_dep = 1.0 - p.relay * p.up * p.up;
  for (int d : shape.dependents()) {
    // Relay group: the relay plus its d dependents.
    numeric::CountDistribution reached{p.up, 1.0 - p.up};  // relay's own vote
    for (int k = 0; k < d; ++k) reached = numeric::convolve(reached, {1.0 - q_dep, q_dep});
    numeric::CountDistribution group(d + 2, 0.0);
    for (std::size_t k = 0; k < reached.size(); ++k) group[k] += p.down * reached[k];
    group[d + 1] += 1.0 - p.down;
    total = numeric::convolve(total, group);
  }
  return numeric::cdf(total, f);
}

inline double raft_shape_latency(const RaftShape& shape, const Airtimes& a, Multiplexing mux) {
  shape.validate();
  const double t_down = shape.symbiotic ? a.enhanced : a.plain;
  const double t_up = shape.symbiotic ? a.enhanced : a.plain;
  const double t_relay = a.plain;
  const auto deps = shape.dependents();
  const int max_d = deps.empty() ? 0 : *std::max_element(deps.begin(), deps.end());
  double lat = shape.one_hop() * t_down;
  if (shape.two_hop == 0) return lat + t_up;
  if (mux == Multiplexing::fd) {
    lat += max_d * t_relay;                  // relay hop
    lat += t_up;                             // two-hop votes to relays
    lat += (1 + max_d) * t_up;               // votes and forwards to the leader
    return lat;
  }
  // TD: multi-message senders get their own slot; single-message senders share one.
  bool single_relay = false;
  for (int d : deps) {
    if (d > 1) lat += d * t_relay;
    single_relay = single_relay || d == 1;
  }
  if (single_relay) lat += t_relay;
  lat += t_up;
  for (int d : deps) {
    if (d >= 1) lat += (1 + d) * t_up;
  }
  lat += t_up;  // non-relaying followers and the leader's reply
  return lat;
}

inline std::int64_t raft_shape_overhead(const RaftShape& shape) {
  shape.validate();
  const std::int64_t n = shape.n;
  const std::int64_t h = shape.two_hop;
  return shape.symbiotic ? n : 2 * n - 1 + h;
}

inline double raft_shape_energy(const RaftShape& shape, const Airtimes& a, double tx_power_w) {
  shape.validate();
  const auto deps = shape.dependents();
  const double u = shape.one_hop();
  double relay_hop = 0.0;
  for (int d : deps) relay_hop += static_cast<double>(d) * d;
  if (shape.symbiotic) {
    // Leader downlink and reply at the downlink airtime; relay hop plain.
    return (u * u * a.enhanced + u * a.enhanced + relay_hop * a.plain) * tx_power_w;
  }
  double uplink = shape.two_hop;  // two-hop votes into relays
  for (int d : deps) uplink += (1.0 + d) * (1.0 + d);
  return (u * u + relay_hop + uplink + 1.0) * a.plain * tx_power_w;
}

// --- dispatch on the four base mechanisms ----------------------------------

namespace detail {
inline void require_base(CmId cm) {
  if (cm != CmId::pbft && cm != CmId::s_pbft && cm != CmId::raft && cm != CmId::s_raft) {
    throw CatalogError("closed forms cover PBFT, S-PBFT, RAFT and S-RAFT; expand '" + std::string(cm_name(cm)) +
                       "' through the catalog");
  }
}
}  // namespace detail

inline double success(const ConsensusConfig& cfg) {
  detail::require_base(cfg.cm);
  switch (cfg.cm) {
    case CmId::pbft: return pbft_success(cfg);
    case CmId::s_pbft: return spbft_success(cfg);
    case CmId::raft: return raft_success(cfg);
    default: return sraft_success(cfg);
  }
}

inline double latency(const ConsensusConfig& cfg, const PhaseTimings& t) {
  detail::require_base(cfg.cm);
  const double n = cfg.n;
  const bool fd = cfg.multiplexing == Multiplexing::fd;
  switch (cfg.cm) {
    case CmId::pbft: return fd ? 3.0 * t.t1 + t.t2 : 2.0 * n * t.t1 + t.t2;
    case CmId::s_pbft: return fd ? 3.0 * t.t3 + t.t4 : 2.0 * n * t.t3 + t.t4;
    case CmId::raft: return t.t1 + t.t2;
    default: return t.t3 + t.t4;
  }
}

inline std::int64_t overhead(const ConsensusConfig& cfg) {
  detail::require_base(cfg.cm);
  const std::int64_t n = cfg.n;
  switch (cfg.cm) {
    case CmId::pbft: return 2 * n * n - n;
    case CmId::s_pbft: return 2 * n * n - 5 * n + 3;
    case CmId::raft: return 2 * n - 1;
    default: return n;
  }
}

/// Every active message is charged its sender's full phase airtime.
inline double energy(const ConsensusConfig& cfg, const PhaseTimings& t, double tx_power_w) {
  detail::require_base(cfg.cm);
  const double n = cfg.n;
  switch (cfg.cm) {
    case CmId::pbft: return (2.0 * n * n * t.t1 - 2.0 * n * t.t1 + n * t.t2) * tx_power_w;
    case CmId::s_pbft: return (2.0 * n * n - 5.0 * n + 3.0) * t.t3 * tx_power_w;
    case CmId::raft: return ((n - 1.0) * t.t1 + n * t.t2) * tx_power_w;
    default: return n * t.t3 * tx_power_w;
  }
}

inline MetricSet metrics(const ConsensusConfig& cfg, const Airtimes& a, double tx_power_w) {
  const auto t = PhaseTimings::for_nodes(cfg.n, a);
  return {success(cfg), latency(cfg, t), overhead(cfg), energy(cfg, t, tx_power_w)};
}

}  // namespace sbc
