#pragma once

// The twenty mechanisms as compositions of PBFT-family and RAFT-family stages.
//
// A composite is a sequence of steps; each step runs its stages in parallel.
//   success   product over steps; a step needs all its stages unless a quorum
//             fraction is set, in which case at least ceil(q * stages) must succeed
//   latency   FD: sum over steps of the slowest stage; TD: every stage in turn
//   overhead, energy   sums over all stages
// Subgroups are filled round-robin by node id.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sbc/analytics.hpp"
#include "sbc/consensus.hpp"
#include "sbc/plan.hpp"
#include "sbc/sim.hpp"

namespace sbc {

struct CmParams {
  double primary_group_fraction = 0.2;  // T-PBFT
  double consensus_fraction = 0.4;      // ABC-PBFT
  int shards = 5;                       // DPBFT, NBFT
  int leaders = 5;                      // KRAFT
  double two_hop_fraction = 0.2;        // TH-RAFT
  int domain_size = 10;                 // VSSB-RAFT
  std::optional<double> shard_quorum;   // fraction of parallel stages that must succeed

  void validate() const {
    auto frac_ok = [](double f) { return f > 0.0 && f <= 1.0; };
    if (!frac_ok(primary_group_fraction) || !frac_ok(consensus_fraction) || !frac_ok(two_hop_fraction)) {
      throw ValidityError("CmParams: fractions must lie in (0,1]");
    }
    if (shard_quorum && !frac_ok(*shard_quorum)) throw ValidityError("CmParams: shard quorum must lie in (0,1]");
    if (shards < 1 || leaders < 1 || domain_size < 1) throw ValidityError("CmParams: counts must be >= 1");
  }
};

struct CmSpec {
  CmId id = CmId::s_pbft;
  CmParams params;

  Family family() const { return cm_family(id); }
  bool symbiotic() const { return cm_symbiotic(id); }
};

struct Stage {
  Family family = Family::pbft;
  int two_hop = 0;           // relayed followers, RAFT family only
  std::vector<int> members;  // global node ids; members[0] leads

  int n() const { return static_cast<int>(members.size()); }
};

struct Step {
  std::string name;
  std::vector<Stage> stages;
};

struct Composite {
  CmSpec spec;
  int n = 0;
  std::vector<Step> steps;
};

namespace detail {

inline int ceil_frac(double f, int n) { return static_cast<int>(std::ceil(f * n - 1e-12)); }

inline Stage contiguous(Family f, int first, int count, int two_hop = 0) {
  Stage s{f, two_hop, {}};
  for (int v = first; v < first + count; ++v) s.members.push_back(v);
  return s;
}

inline std::vector<Stage> round_robin(Family f, int n, int groups) {
  std::vector<Stage> out(groups, Stage{f, 0, {}});
  for (int v = 0; v < n; ++v) out[v % groups].members.push_back(v);
  return out;
}

// One delegate per group, topped up round-robin to `size`.
inline Stage delegates(Family f, const std::vector<Stage>& groups, int size) {
  Stage s{f, 0, {}};
  for (std::size_t depth = 0; s.n() < size; ++depth) {
    bool any = false;
    for (const auto& g : groups) {
      if (depth < g.members.size() && s.n() < size) {
        s.members.push_back(g.members[depth]);
        any = true;
      }
    }
    if (!any) break;
  }
  return s;
}

inline void require_size(const Stage& s, const char* what) {
  const int need = min_nodes(s.family);
  if (s.n() < need) {
    std::ostringstream os;
    os << what << " of " << s.n() << " nodes is below the " << to_string(s.family) << " minimum of " << need;
    throw ValidityError(os.str());
  }
}

}  // namespace detail

/// Topology of `spec` over n nodes.
inline Composite expand(const CmSpec& spec, int n) {
  spec.params.validate();
  const auto& p = spec.params;
  Composite c{spec, n, {}};
  const Family fam = spec.family();
  if (n < min_nodes(fam)) throw ValidityError("expand: n is below the family minimum");
  auto single = [&](Stage s, const char* name) { c.steps.push_back({name, {std::move(s)}}); };

  switch (cm_baseline(spec.id)) {
    case CmId::pbft:
    case CmId::vaap:
      single(detail::contiguous(fam, 0, n), "consensus");
      break;
    case CmId::t_pbft: {
      int g = std::max(4, detail::ceil_frac(p.primary_group_fraction, n));
      if (n - g < 2) g = n;
      single(detail::contiguous(Family::pbft, 0, g), "primary group");
      if (g < n) {
        Stage spread{Family::raft, 0, {0}};
        for (int v = g; v < n; ++v) spread.members.push_back(v);
        single(spread, "dissemination");
      }
      break;
    }
    case CmId::abc_pbft:
      single(detail::contiguous(fam, 0, std::min(n, std::max(4, detail::ceil_frac(p.consensus_fraction, n)))),
             "consensus group");
      break;
    case CmId::dpbft:
    case CmId::nbft: {
      const int k = std::min(p.shards, n / 4);
      if (k <= 1) {
        single(detail::contiguous(fam, 0, n), "consensus");
        break;
      }
      auto shards = detail::round_robin(fam, n, k);
      Step shard_step{"shards", shards};
      Step committee{"committee", {detail::delegates(fam, shards, std::max(4, k))}};
      if (cm_baseline(spec.id) == CmId::dpbft) {
        c.steps = {committee, shard_step};
      } else {
        c.steps = {shard_step, committee};
      }
      break;
    }
    case CmId::raft:
      single(detail::contiguous(fam, 0, n), "consensus");
      break;
    case CmId::th_raft:
      single(detail::contiguous(fam, 0, n, two_hop_count(n, p.two_hop_fraction)), "consensus");
      break;
    case CmId::kraft: {
      const int k = std::min(p.leaders, n / 3);
      if (k <= 1) {
        single(detail::contiguous(fam, 0, n), "consensus");
      } else {
        c.steps.push_back({"partitions", detail::round_robin(fam, n, k)});
      }
      break;
    }
    case CmId::vssb_raft: {
      const int d = (n + p.domain_size - 1) / p.domain_size;
      if (d <= 1) {
        single(detail::contiguous(fam, 0, n), "consensus");
        break;
      }
      auto domains = detail::round_robin(fam, n, d);
      c.steps.push_back({"domains", domains});
      c.steps.push_back({"heads", {detail::delegates(fam, domains, std::max(3, d))}});
      break;
    }
    default:
      throw CatalogError("expand: no topology for " + std::string(cm_name(spec.id)));
  }
  for (const auto& step : c.steps) {
    for (const auto& s : step.stages) detail::require_size(s, step.name.c_str());
  }
  return c;
}

/// Base mechanism that runs a stage.
inline CmId stage_cm(const Stage& s, bool symbiotic) {
  if (s.family == Family::pbft) return symbiotic ? CmId::s_pbft : CmId::pbft;
  return symbiotic ? CmId::s_raft : CmId::raft;
}

/// Stage configuration: the composite's probabilities at the stage's size,
/// with the family's default budget.
inline ConsensusConfig stage_config(const Stage& s, bool symbiotic, const ConsensusConfig& base) {
  ConsensusConfig c = base.with_n(s.n()).with_cm(stage_cm(s, symbiotic));
  return c;
}

inline RaftShape stage_shape(const Stage& s, bool symbiotic) { return RaftShape{s.n(), s.two_hop, symbiotic}; }

inline MetricSet stage_metrics(const Stage& s, bool symbiotic, const ConsensusConfig& base, const Airtimes& a,
                               double tx_power_w) {
  const auto cfg = stage_config(s, symbiotic, base);
  if (s.family == Family::raft && s.two_hop > 0) {
    const auto shape = stage_shape(s, symbiotic);
    return {raft_shape_success(shape, cfg.budget(), raft_link_probs(cfg, symbiotic)),
            raft_shape_latency(shape, a, cfg.multiplexing), raft_shape_overhead(shape),
            raft_shape_energy(shape, a, tx_power_w)};
  }
  return metrics(cfg, a, tx_power_w);
}

namespace detail {

inline int quorum_need(const CmParams& p, std::size_t stages) {
  if (!p.shard_quorum || stages <= 1) return static_cast<int>(stages);
  return std::max(1, static_cast<int>(std::ceil(*p.shard_quorum * static_cast<double>(stages) - 1e-12)));
}

}  // namespace detail

/// Closed-form metrics of a composite. `base` supplies probabilities and the
/// multiplexing mode; its n and cm are ignored.
inline MetricSet composite_metrics(const Composite& c, const ConsensusConfig& base, const Airtimes& a,
                                   double tx_power_w) {
  const bool sym = c.spec.symbiotic();
  const bool fd = base.multiplexing == Multiplexing::fd;
  MetricSet m{1.0, 0.0, 0, 0.0};
  for (const auto& step : c.steps) {
    std::vector<double> ok;
    double slowest = 0.0;
    for (const auto& s : step.stages) {
      const auto sm = stage_metrics(s, sym, base, a, tx_power_w);
      ok.push_back(sm.success);
      slowest = std::max(slowest, sm.latency);
      m.latency += fd ? 0.0 : sm.latency;
      m.overhead += sm.overhead;
      m.energy += sm.energy;
    }
    m.latency += fd ? slowest : 0.0;
    m.success *= numeric::at_least(ok, detail::quorum_need(c.spec.params, ok.size()));
  }
  return m;
}

inline MetricSet catalog_metrics(const CmSpec& spec, const ConsensusConfig& base, const Airtimes& a,
                                 double tx_power_w) {
  return composite_metrics(expand(spec, base.n), base, a, tx_power_w);
}

inline CmSpec default_spec(CmId id) { return CmSpec{id, {}}; }

/// Stage plans, step by step.
struct CompositePlan {
  std::vector<std::vector<PhasePlan>> steps;
  std::vector<std::vector<ConsensusConfig>> configs;
};

inline CompositePlan build_composite_plan(const Composite& c, const ConsensusConfig& base, const Airtimes& a) {
  const bool sym = c.spec.symbiotic();
  CompositePlan out;
  for (const auto& step : c.steps) {
    auto& plans = out.steps.emplace_back();
    auto& cfgs = out.configs.emplace_back();
    for (const auto& s : step.stages) {
      const auto cfg = stage_config(s, sym, base);
      if (s.family == Family::raft) {
        plans.push_back(build_raft_plan(stage_shape(s, sym), cfg.cm, cfg.multiplexing, a));
      } else {
        plans.push_back(build_phase_plan(cfg, a));
      }
      cfgs.push_back(cfg);
    }
  }
  return out;
}

/// Monte Carlo success of a composite. Stage j of trial k draws from
/// derive_seed(derive_seed(master, k), j), so stages are independent.
inline SuccessEstimate estimate_composite_success(const Composite& c, const CompositePlan& plan, std::int64_t trials,
                                                  std::uint64_t master_seed, unsigned workers = 0) {
  if (trials < 1) throw DomainError("estimate_composite_success: trials must be >= 1");
  struct Prepared {
    Judge judge;
    std::vector<std::uint64_t> thr;
    int budget;
  };
  std::vector<std::vector<Prepared>> prep;
  for (std::size_t s = 0; s < plan.steps.size(); ++s) {
    auto& row = prep.emplace_back();
    for (std::size_t j = 0; j < plan.steps[s].size(); ++j) {
      const auto& pl = plan.steps[s][j];
      const auto& cfg = plan.configs[s][j];
      row.push_back({Judge(pl), detail::link_thresholds(pl, cfg), cfg.budget()});
    }
  }
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, trials));
  std::vector<std::int64_t> counts(workers, 0);
  auto work = [&](unsigned w) {
    const std::int64_t lo = trials * w / workers;
    const std::int64_t hi = trials * (w + 1) / workers;
    std::int64_t hits = 0;
    for (std::int64_t t = lo; t < hi; ++t) {
      const auto trial_seed = rng::derive_seed(master_seed, static_cast<std::uint64_t>(t));
      bool all = true;
      std::uint64_t stage_index = 0;
      for (std::size_t s = 0; s < prep.size() && all; ++s) {
        int good = 0;
        for (std::size_t j = 0; j < prep[s].size(); ++j, ++stage_index) {
          const auto& pr = prep[s][j];
          const auto seed = rng::derive_seed(trial_seed, stage_index);
          std::vector<std::uint8_t> ok(plan.steps[s][j].links.size(), 1);
          for (int i : pr.judge.decisive()) ok[i] = detail::delivered(seed, static_cast<std::size_t>(i), pr.thr[i]);
          good += pr.judge.success(ok, pr.budget) ? 1 : 0;
        }
        all = good >= detail::quorum_need(c.spec.params, prep[s].size());
      }
      hits += all ? 1 : 0;
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
  for (auto k : counts) total += k;
  return make_estimate(total, trials);
}

struct CatalogEntry {
  CmId id;
  std::string name;
  Family family;
  bool symbiotic;
  std::string params;
  int min_n;
};

inline std::string describe_params(CmId id, const CmParams& p) {
  std::ostringstream os;
  switch (cm_baseline(id)) {
    case CmId::t_pbft: os << "primary_group_fraction=" << p.primary_group_fraction; break;
    case CmId::abc_pbft: os << "consensus_fraction=" << p.consensus_fraction; break;
    case CmId::dpbft:
    case CmId::nbft: os << "shards=" << p.shards; break;
    case CmId::kraft: os << "leaders=" << p.leaders; break;
    case CmId::th_raft: os << "two_hop_fraction=" << p.two_hop_fraction; break;
    case CmId::vssb_raft: os << "domain_size=" << p.domain_size; break;
    default: os << "-"; break;
  }
  if (p.shard_quorum) os << " shard_quorum=" << *p.shard_quorum;
  return os.str();
}

inline std::vector<CatalogEntry> catalog(const CmParams& p = {}) {
  std::vector<CatalogEntry> out;
  for (const auto& info : kCmTable) {
    out.push_back({info.id, std::string(info.name), info.family, info.symbiotic, describe_params(info.id, p),
                   min_nodes(info.family)});
  }
  return out;
}

}  // namespace sbc
