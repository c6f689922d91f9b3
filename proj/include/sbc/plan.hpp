#pragma once

// Phase plans: the round-by-round link choreography of one consensus instance.
//
// Node 0 is the primary (PBFT family) or leader (RAFT family); nodes 1..n-1
// are replicas or followers; node n is the client. A backscatter link whose
// receiver is a PRx only boosts a primary signal: it is a gain link, carries
// no message, and is never sampled or counted.
//
// Airtime of a sender in a round is the sum of its message airtimes (T_s for
// active-plain, T_e otherwise). A round lasts the longest sender airtime of
// each slot, summed over slots. In TD mode every multi-message sender gets
// its own slot (ascending id) and single-message senders share one more.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sbc/analytics.hpp"
#include "sbc/consensus.hpp"

namespace sbc {

enum class LinkKind : std::uint8_t { active_plain, active_enhanced, backscatter };
enum class Role : std::uint8_t { PTx, PRx, STx, SRx };

inline std::string_view to_string(LinkKind k) {
  switch (k) {
    case LinkKind::active_plain: return "active_plain";
    case LinkKind::active_enhanced: return "active_enhanced";
    default: return "backscatter";
  }
}

inline std::string_view to_string(Role r) {
  static constexpr std::string_view names[] = {"PTx", "PRx", "STx", "SRx"};
  return names[static_cast<int>(r)];
}

struct LinkSpec {
  int phase = 0;
  int round = 0;  // within the phase
  int slot = 0;   // time slot within the round; always 0 in FD
  int sender = 0;
  int receiver = 0;
  LinkKind kind = LinkKind::active_plain;
  int channel = 0;  // frequency band; always 0 in TD
  Role sender_role = Role::PTx;
  Role receiver_role = Role::PRx;
  double charge = 0.0;  // airtime billed at P_T; active links only
  bool decisive = false;
  int origin = -1;  // originator of a forwarded vote

  bool gain() const { return kind == LinkKind::backscatter && receiver_role == Role::PRx; }
  bool message() const { return !gain(); }
  bool active() const { return kind != LinkKind::backscatter; }
};

struct PhasePlan {
  CmId cm = CmId::s_pbft;
  int n = 4;
  Multiplexing multiplexing = Multiplexing::fd;
  int two_hop = 0;  // relayed followers (RAFT family)
  Airtimes airtimes;
  double tx_power_w = 1.0;
  std::vector<std::string> phases;
  std::vector<LinkSpec> links;  // ordered by (phase, round, slot)

  Family family() const { return cm_family(cm); }
  bool symbiotic() const { return cm_symbiotic(cm); }
  int client() const { return n; }

  int round_count(int phase) const {
    int r = -1;
    for (const auto& l : links) {
      if (l.phase == phase) r = std::max(r, l.round);
    }
    return r + 1;
  }
};

struct PhaseCensus {
  std::string phase;
  std::int64_t active_plain = 0;
  std::int64_t active_enhanced = 0;
  std::int64_t backscatter = 0;  // message-carrying backscatter only

  std::int64_t active() const { return active_plain + active_enhanced; }
};

inline std::vector<PhaseCensus> census(const PhasePlan& plan) {
  std::vector<PhaseCensus> out(plan.phases.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].phase = plan.phases[i];
  for (const auto& l : plan.links) {
    if (!l.message()) continue;
    auto& c = out[l.phase];
    switch (l.kind) {
      case LinkKind::active_plain: ++c.active_plain; break;
      case LinkKind::active_enhanced: ++c.active_enhanced; break;
      case LinkKind::backscatter: ++c.backscatter; break;
    }
  }
  return out;
}

inline std::int64_t active_messages(const PhasePlan& plan) {
  std::int64_t k = 0;
  for (const auto& l : plan.links) k += l.active() ? 1 : 0;
  return k;
}

inline double link_airtime(LinkKind kind, const Airtimes& a) {
  return kind == LinkKind::active_plain ? a.plain : a.enhanced;
}

namespace detail {

// Groups link indices by (phase, round).
inline std::map<std::pair<int, int>, std::vector<std::size_t>> rounds_of(const PhasePlan& plan) {
  std::map<std::pair<int, int>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < plan.links.size(); ++i) out[{plan.links[i].phase, plan.links[i].round}].push_back(i);
  return out;
}

class PlanBuilder {
 public:
  PlanBuilder(CmId cm, int n, Multiplexing mux, const Airtimes& a, int two_hop) {
    plan_.cm = cm;
    plan_.n = n;
    plan_.multiplexing = mux;
    plan_.airtimes = a;
    plan_.two_hop = two_hop;
  }

  void phase(std::string name) {
    close_round();
    plan_.phases.push_back(std::move(name));
    round_ = -1;
  }

  void round() {
    close_round();
    ++round_;
    open_ = plan_.links.size();
  }

  // charge < 0 bills the sender's airtime in this round.
  void link(int from, int to, LinkKind kind, int channel, Role sr, Role rr, bool decisive, int origin = -1,
            double charge = -1.0) {
    LinkSpec l;
    l.phase = static_cast<int>(plan_.phases.size()) - 1;
    l.round = round_;
    l.sender = from;
    l.receiver = to;
    l.kind = kind;
    l.channel = channel;
    l.sender_role = sr;
    l.receiver_role = rr;
    l.decisive = decisive;
    l.origin = origin;
    l.charge = charge;
    plan_.links.push_back(l);
  }

  PhasePlan finish() {
    close_round();
    return std::move(plan_);
  }

 private:
  void close_round() {
    if (open_ >= plan_.links.size()) return;
    const auto first = plan_.links.begin() + static_cast<std::ptrdiff_t>(open_);
    std::map<int, double> airtime;
    std::map<int, int> count;
    for (auto it = first; it != plan_.links.end(); ++it) {
      if (!it->message()) continue;
      airtime[it->sender] += link_airtime(it->kind, plan_.airtimes);
      ++count[it->sender];
    }
    for (auto it = first; it != plan_.links.end(); ++it) {
      if (it->active() && it->charge < 0.0) it->charge = airtime[it->sender];
      if (!it->active()) it->charge = 0.0;
    }
    if (plan_.multiplexing == Multiplexing::td) {
      std::map<int, int> slot_of;
      int next = 0;
      if (count.size() > 1) {
        for (const auto& [s, c] : count) {
          if (c > 1) slot_of[s] = next++;
        }
      }
      for (auto it = first; it != plan_.links.end(); ++it) {
        it->channel = 0;
        if (!it->message()) continue;
        const auto f = slot_of.find(it->sender);
        it->slot = f == slot_of.end() ? next : f->second;
      }
    }
    std::stable_sort(first, plan_.links.end(), [](const LinkSpec& a, const LinkSpec& b) { return a.slot < b.slot; });
    open_ = plan_.links.size();
  }

  PhasePlan plan_;
  int round_ = -1;
  std::size_t open_ = 0;
};

inline void require_supported(const ConsensusConfig& cfg) {
  if (cfg.cm != CmId::pbft && cfg.cm != CmId::s_pbft && cfg.cm != CmId::raft && cfg.cm != CmId::s_raft) {
    throw CatalogError("no base phase plan for '" + std::string(cm_name(cfg.cm)) + "'; expand it through the catalog");
  }
  if (cfg.n < min_nodes(cfg.family())) throw DegenerateNetwork("phase plan: too few nodes for the family");
}

inline PhasePlan build_pbft_plan(const ConsensusConfig& cfg, const Airtimes& a) {
  const int n = cfg.n;
  const bool sym = cfg.symbiotic();
  const int reps = n - 1;
  auto succ = [reps](int r) { return r % reps + 1; };
  auto pred = [reps](int r) { return (r + reps - 2) % reps + 1; };
  const LinkKind act = sym ? LinkKind::active_enhanced : LinkKind::active_plain;
  const auto bs = LinkKind::backscatter;
  PlanBuilder b(cfg.cm, n, cfg.multiplexing, a, 0);

  // Band f carries STx = replica f, PRx = pred(f), SRx = succ(f).
  b.phase("pre-prepare");
  b.round();
  for (int r = 1; r < n; ++r) b.link(0, r, act, sym ? succ(r) : 0, Role::PTx, Role::PRx, true);
  if (sym) {
    for (int f = 1; f < n; ++f) b.link(f, pred(f), bs, f, Role::STx, Role::PRx, false);
  }

  b.phase("prepare");
  b.round();
  for (int s = 1; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (t == s) continue;
      if (sym && t == succ(s)) {
        b.link(s, t, bs, s, Role::STx, Role::SRx, false);
      } else {
        b.link(s, t, act, s, Role::PTx, Role::PRx, t == 0);
      }
    }
  }

  // Backscattered commits ride the primary's band.
  b.phase("commit");
  b.round();
  for (int r = 1; r < n; ++r) b.link(0, r, act, 0, Role::PTx, Role::PRx, true);
  for (int s = 1; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (t == s) continue;
      if (sym && (t == succ(s) || t == pred(s))) {
        b.link(s, t, bs, 0, Role::STx, Role::SRx, true);
      } else {
        b.link(s, t, act, s, Role::PTx, Role::PRx, true);
      }
    }
  }

  b.phase("reply");
  b.round();
  for (int s = 0; s < n; ++s) {
    if (sym) {
      b.link(s, n, bs, s, Role::STx, Role::SRx, true);
    } else {
      b.link(s, n, LinkKind::active_plain, s, Role::PTx, Role::PRx, true);
    }
  }
  return b.finish();
}

}  // namespace detail

/// RAFT-family plan for a (possibly relayed) stage. Followers 1..u hear the
/// leader directly; the rest are served by relays as in RaftShape.
inline PhasePlan build_raft_plan(const RaftShape& shape, CmId cm, Multiplexing mux, const Airtimes& a) {
  shape.validate();
  if (shape.n < 3) throw DegenerateNetwork("RAFT-family plan needs n >= 3");
  const int n = shape.n;
  const int u = shape.one_hop();
  const bool sym = shape.symbiotic;
  const int followers = n - 1;
  auto succ = [followers](int r) { return r % followers + 1; };
  auto relay_of = [u](int k) { return 1 + (k - u - 1) % u; };
  const LinkKind down = sym ? LinkKind::active_enhanced : LinkKind::active_plain;
  const LinkKind up = sym ? LinkKind::backscatter : LinkKind::active_plain;
  const Role up_sr = sym ? Role::STx : Role::PTx;
  const Role up_rr = sym ? Role::SRx : Role::PRx;
  detail::PlanBuilder b(cm, n, mux, a, shape.two_hop);

  b.phase("downlink");
  b.round();
  for (int r = 1; r <= u; ++r) b.link(0, r, down, sym ? succ(r) : 0, Role::PTx, Role::PRx, true);
  if (sym) {
    for (int r = 1; r <= u; ++r) b.link(succ(r), r, LinkKind::backscatter, succ(r), Role::STx, Role::PRx, false);
  }
  if (shape.two_hop > 0) {
    b.round();
    for (int k = u + 1; k < n; ++k) b.link(relay_of(k), k, LinkKind::active_plain, relay_of(k), Role::PTx, Role::PRx, true);
  }

  // Backscattered votes ride the leader's reply band.
  b.phase("uplink");
  if (shape.two_hop > 0) {
    b.round();
    for (int k = u + 1; k < n; ++k) b.link(k, relay_of(k), up, sym ? 0 : k, up_sr, up_rr, true);
  }
  b.round();
  for (int r = 1; r <= u; ++r) {
    b.link(r, 0, up, sym ? 0 : r, up_sr, up_rr, true);
    for (int k = u + 1; k < n; ++k) {
      if (relay_of(k) == r) b.link(r, 0, up, sym ? 0 : r, up_sr, up_rr, true, k);
    }
  }
  // The symbiotic reply is billed the leader's downlink airtime.
  b.link(0, n, down, 0, Role::PTx, Role::PRx, false, -1, sym ? u * a.enhanced : -1.0);
  return b.finish();
}

inline PhasePlan build_phase_plan(const ConsensusConfig& cfg, const Airtimes& a) {
  detail::require_supported(cfg);
  if (cfg.family() == Family::pbft) return detail::build_pbft_plan(cfg, a);
  return build_raft_plan(RaftShape{cfg.n, 0, cfg.symbiotic()}, cfg.cm, cfg.multiplexing, a);
}

/// Sum over rounds and slots of the longest sender airtime.
inline double plan_latency(const PhasePlan& plan) {
  double total = 0.0;
  for (const auto& [key, idx] : detail::rounds_of(plan)) {
    std::map<int, std::map<int, double>> slot_sender;
    for (auto i : idx) {
      const auto& l = plan.links[i];
      if (l.message()) slot_sender[l.slot][l.sender] += link_airtime(l.kind, plan.airtimes);
    }
    for (const auto& [slot, senders] : slot_sender) {
      double m = 0.0;
      for (const auto& [s, t] : senders) m = std::max(m, t);
      total += m;
    }
  }
  return total;
}

inline double plan_energy(const PhasePlan& plan, double tx_power_w) {
  double e = 0.0;
  for (const auto& l : plan.links) e += l.charge;
  return e * tx_power_w;
}

inline int channel_count(const PhasePlan& plan) {
  std::set<int> ch;
  for (const auto& l : plan.links) ch.insert(l.channel);
  return static_cast<int>(ch.size());
}

struct PlanViolation {
  std::string what;
  LinkSpec link;
};

/// FD exclusivity, backscatter roles and multipath sources.
inline std::vector<PlanViolation> check_plan(const PhasePlan& plan) {
  std::vector<PlanViolation> out;
  for (const auto& l : plan.links) {
    if (l.kind == LinkKind::backscatter && l.sender_role != Role::STx) out.push_back({"backscatter sender is not STx", l});
  }
  for (const auto& [key, idx] : detail::rounds_of(plan)) {
    bool has_backscatter = false;
    std::map<std::pair<int, int>, std::map<int, int>> active_by_band;  // (slot, channel) -> sender -> count
    for (auto i : idx) {
      const auto& l = plan.links[i];
      has_backscatter = has_backscatter || l.kind == LinkKind::backscatter;
      if (l.active()) ++active_by_band[{l.slot, l.channel}][l.sender];
    }
    for (auto i : idx) {
      const auto& l = plan.links[i];
      if (l.kind == LinkKind::active_enhanced && !has_backscatter) {
        out.push_back({"enhanced link without a backscatter contributor", l});
      }
    }
    for (const auto& [band, senders] : active_by_band) {
      int broadcasting = 0;
      for (const auto& [s, c] : senders) broadcasting += c > 1 ? 1 : 0;
      if (broadcasting > 1) {
        LinkSpec probe = plan.links[idx.front()];
        probe.slot = band.first;
        probe.channel = band.second;
        out.push_back({"two broadcasting senders share a band", probe});
      }
    }
  }
  return out;
}

/// One link per line: phase round sender receiver kind roles channel, where
/// channel is `fb<k>` in FD and `ts<k>` (time slot within the round) in TD.
inline void dump_plan(std::ostream& os, const PhasePlan& plan) {
  os << "# plan " << cm_name(plan.cm) << " n=" << plan.n << ' ' << to_string(plan.multiplexing) << '\n';
  const bool fd = plan.multiplexing == Multiplexing::fd;
  for (const auto& l : plan.links) {
    os << plan.phases[l.phase] << ' ' << l.round << ' ' << l.sender << ' ' << l.receiver << ' ' << to_string(l.kind)
       << ' ' << to_string(l.sender_role) << '>' << to_string(l.receiver_role) << ' ' << (fd ? "fb" : "ts")
       << (fd ? l.channel : l.slot);
    if (l.origin >= 0) os << " origin=" << l.origin;
    os << '\n';
  }
}

inline std::string dump_plan(const PhasePlan& plan) {
  std::ostringstream os;
  dump_plan(os, plan);
  return os.str();
}

}  // namespace sbc
