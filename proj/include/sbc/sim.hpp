#pragma once

// Monte Carlo and exhaustive evaluation of phase plans.
//
// Success rules mirror the closed forms:
//   PBFT family  i missed pre-prepares plus j prepares lost to the primary
//                (among replicas that got one) stay within b; a node whose
//                inbound commits lose more than b fails commit, l <= b; replies
//                lost among committed nodes m satisfy l + m <= b.
//   RAFT family  a follower counts when every hop of its vote path (downlink,
//                relay, uplink, forward) delivers; at most f may not count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "sbc/plan.hpp"
#include "sbc/rng.hpp"

namespace sbc {

/// Delivery probability of one link under `cfg`.
inline double link_probability(const PhasePlan& plan, const LinkSpec& l, const ConsensusConfig& cfg) {
  if (plan.family() == Family::raft && plan.symbiotic()) {
    const auto p = raft_link_probs(cfg, true);
    switch (l.kind) {
      case LinkKind::active_enhanced: return p.down;
      case LinkKind::backscatter: return p.up;
      default: return p.relay;
    }
  }
  switch (l.kind) {
    case LinkKind::active_enhanced: return cfg.p_e;
    case LinkKind::backscatter: return cfg.backscatter_p();
    default: return cfg.p_s;
  }
}

/// Link indices each success rule reads, resolved once per plan.
class Judge {
 public:
  explicit Judge(const PhasePlan& plan) : family_(plan.family()), n_(plan.n) {
    if (family_ == Family::pbft) {
      index_pbft(plan);
    } else {
      index_raft(plan);
    }
    for (std::size_t i = 0; i < plan.links.size(); ++i) {
      if (plan.links[i].decisive) decisive_.push_back(static_cast<int>(i));
    }
  }

  const std::vector<int>& decisive() const { return decisive_; }

  /// `ok[i]` is the delivery outcome of plan link i.
  bool success(const std::vector<std::uint8_t>& ok, int budget) const {
    return family_ == Family::pbft ? pbft(ok, budget) : raft(ok, budget);
  }

 private:
  void index_pbft(const PhasePlan& plan) {
    pre_prepare_.assign(n_, -1);
    prepare_.assign(n_, -1);
    reply_.assign(n_, -1);
    commit_in_.assign(n_, {});
    for (std::size_t i = 0; i < plan.links.size(); ++i) {
      const auto& l = plan.links[i];
      if (!l.decisive) continue;
      const int k = static_cast<int>(i);
      switch (l.phase) {
        case 0: pre_prepare_[l.receiver] = k; break;
        case 1: prepare_[l.sender] = k; break;
        case 2: commit_in_[l.receiver].push_back(k); break;
        default: reply_[l.sender] = k; break;
      }
    }
  }

  void index_raft(const PhasePlan& plan) {
    std::vector<int> down_in(n_, -1), up_own(n_, -1), forward(n_, -1);
    std::vector<int> down_from(n_, -1), up_to(n_, -1);
    for (std::size_t i = 0; i < plan.links.size(); ++i) {
      const auto& l = plan.links[i];
      if (!l.decisive) continue;
      const int k = static_cast<int>(i);
      if (l.phase == 0) {
        down_in[l.receiver] = k;
        down_from[l.receiver] = l.sender;
      } else if (l.origin >= 0) {
        forward[l.origin] = k;
      } else {
        up_own[l.sender] = k;
        up_to[l.sender] = l.receiver;
      }
    }
    chains_.assign(n_, {});
    for (int f = 1; f < n_; ++f) {
      auto& c = chains_[f];
      for (int v = f; v != 0 && v >= 0; v = down_from[v]) c.push_back(down_in[v]);
      c.push_back(up_own[f]);
      if (up_to[f] != 0) c.push_back(forward[f]);
    }
  }

  bool pbft(const std::vector<std::uint8_t>& ok, int b) const {
    int missed = 0;
    for (int r = 1; r < n_; ++r) {
      if (!ok[pre_prepare_[r]]) {
        ++missed;
      } else if (!ok[prepare_[r]]) {
        ++missed;
      }
    }
    if (missed > b) return false;
    int failed_commit = 0;
    std::vector<std::uint8_t> committed(n_, 1);
    for (int v = 0; v < n_; ++v) {
      int lost = 0;
      for (int k : commit_in_[v]) lost += ok[k] ? 0 : 1;
      if (lost > b) {
        committed[v] = 0;
        ++failed_commit;
      }
    }
    if (failed_commit > b) return false;
    int lost_replies = 0;
    for (int v = 0; v < n_; ++v) {
      if (committed[v] && !ok[reply_[v]]) ++lost_replies;
    }
    return failed_commit + lost_replies <= b;
  }

  bool raft(const std::vector<std::uint8_t>& ok, int f) const {
    int lost = 0;
    for (int v = 1; v < n_; ++v) {
      for (int k : chains_[v]) {
        if (!ok[k]) {
          ++lost;
          break;
        }
      }
      if (lost > f) return false;
    }
    return true;
  }

  Family family_;
  int n_;
  std::vector<int> decisive_;
  std::vector<int> pre_prepare_, prepare_, reply_;
  std::vector<std::vector<int>> commit_in_;
  std::vector<std::vector<int>> chains_;
};

struct TrialOutcome {
  bool success = false;
  std::vector<bool> delivered;  // per plan link; gain links read as delivered
  double latency = 0.0;
  double energy = 0.0;
  std::int64_t active_messages = 0;

  bool operator==(const TrialOutcome&) const = default;
};

namespace detail {

inline std::vector<std::uint64_t> link_thresholds(const PhasePlan& plan, const ConsensusConfig& cfg) {
  std::vector<std::uint64_t> t(plan.links.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng::threshold(link_probability(plan, plan.links[i], cfg));
  return t;
}

inline bool delivered(std::uint64_t seed, std::size_t i, std::uint64_t threshold) {
  return threshold == UINT64_MAX || rng::draw(seed, i) < threshold;
}

inline void check_plan_config(const PhasePlan& plan, const ConsensusConfig& cfg) {
  cfg.validate();
  if (cfg.n != plan.n || cfg.family() != plan.family()) {
    throw DomainError("plan and configuration disagree on node count or family");
  }
}

}  // namespace detail

/// One consensus instance with every message link drawn independently.
inline TrialOutcome run_trial(const PhasePlan& plan, const ConsensusConfig& cfg, std::uint64_t seed) {
  detail::check_plan_config(plan, cfg);
  const auto thr = detail::link_thresholds(plan, cfg);
  std::vector<std::uint8_t> ok(plan.links.size(), 1);
  TrialOutcome out;
  out.delivered.assign(plan.links.size(), true);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (!plan.links[i].message()) continue;
    ok[i] = detail::delivered(seed, i, thr[i]) ? 1 : 0;
    out.delivered[i] = ok[i] != 0;
  }
  out.success = Judge(plan).success(ok, cfg.budget());
  out.latency = plan_latency(plan);
  out.energy = plan_energy(plan, plan.tx_power_w);
  out.active_messages = active_messages(plan);
  return out;
}

struct SuccessEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t successes = 0;
  std::int64_t trials = 0;
};

inline SuccessEstimate make_estimate(std::int64_t successes, std::int64_t trials) {
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), successes, trials};
}

/// Mean of `trials` independent trials; trial k uses derive_seed(master, k).
/// Per-worker counts are summed as integers, so any worker count gives the
/// same bits. Only decisive links are drawn: the others cannot change the
/// verdict, and counter-based draws keep those that are drawn identical to
/// run_trial's.
inline SuccessEstimate estimate_success(const PhasePlan& plan, const ConsensusConfig& cfg, std::int64_t trials,
                                        std::uint64_t master_seed, unsigned workers = 0) {
  if (trials < 1) throw DomainError("estimate_success: trials must be >= 1");
  detail::check_plan_config(plan, cfg);
  const Judge judge(plan);
  const auto thr = detail::link_thresholds(plan, cfg);
  const int budget = cfg.budget();
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, trials));

  std::vector<std::int64_t> counts(workers, 0);
  auto work = [&](unsigned w) {
    const std::int64_t lo = trials * w / workers;
    const std::int64_t hi = trials * (w + 1) / workers;
    std::vector<std::uint8_t> ok(plan.links.size(), 1);
    std::int64_t hits = 0;
    for (std::int64_t t = lo; t < hi; ++t) {
      const auto seed = rng::derive_seed(master_seed, static_cast<std::uint64_t>(t));
      for (int i : judge.decisive()) ok[i] = detail::delivered(seed, static_cast<std::size_t>(i), thr[i]) ? 1 : 0;
      hits += judge.success(ok, budget) ? 1 : 0;
    }
    counts[w] = hits;
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  return make_estimate(total, trials);
}

inline constexpr int kMaxEnumeratedLinks = 24;

/// Exact success probability by summing over every outcome of the decisive links.
inline double enumerate_success(const PhasePlan& plan, const ConsensusConfig& cfg) {
  detail::check_plan_config(plan, cfg);
  const Judge judge(plan);
  const auto& idx = judge.decisive();
  const int links = static_cast<int>(idx.size());
  if (links > kMaxEnumeratedLinks) {
    throw SizeError("enumerate_success: " + std::to_string(links) + " stochastic links exceed the limit of " +
                    std::to_string(kMaxEnumeratedLinks));
  }
  std::vector<double> p(links);
  for (int k = 0; k < links; ++k) p[k] = link_probability(plan, plan.links[idx[k]], cfg);
  const int budget = cfg.budget();
  std::vector<std::uint8_t> ok(plan.links.size(), 1);
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << links); ++mask) {
    double w = 1.0;
    for (int k = 0; k < links; ++k) {
      const bool good = (mask >> k) & 1U;
      ok[idx[k]] = good ? 1 : 0;
      w *= good ? p[k] : 1.0 - p[k];
    }
    if (w != 0.0 && judge.success(ok, budget)) total += w;
  }
  return total;
}

}  // namespace sbc
