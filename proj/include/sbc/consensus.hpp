#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "sbc/errors.hpp"
#include "sbc/sr_channel.hpp"

namespace sbc {

enum class Family { pbft, raft };
enum class Multiplexing { fd, td };

// Which reliability feeds the S-RAFT downlink and uplink terms. `printed`
// puts P_s on the downlink and P_e on the uplink as the closed form is
// written; `physical` follows the link kinds (enhanced downlink, backscatter
// uplink).
enum class RaftAssignment { printed, physical };

enum class CmId : std::uint8_t {
  pbft, s_pbft, t_pbft, st_pbft, abc_pbft, sabc_pbft, vaap, s_vaap, dpbft, s_dpbft, nbft, s_nbft,
  raft, s_raft, th_raft, sth_raft, kraft, s_kraft, vssb_raft, svssb_raft,
};

struct CmInfo {
  CmId id;
  std::string_view name;
  Family family;
  bool symbiotic;
  CmId twin;  // the counterpart with the symbiotic flag flipped
};

inline constexpr std::array<CmInfo, 20> kCmTable{{
    {CmId::pbft, "PBFT", Family::pbft, false, CmId::s_pbft},
    {CmId::s_pbft, "S-PBFT", Family::pbft, true, CmId::pbft},
    {CmId::t_pbft, "T-PBFT", Family::pbft, false, CmId::st_pbft},
    {CmId::st_pbft, "ST-PBFT", Family::pbft, true, CmId::t_pbft},
    {CmId::abc_pbft, "ABC-PBFT", Family::pbft, false, CmId::sabc_pbft},
    {CmId::sabc_pbft, "SABC-PBFT", Family::pbft, true, CmId::abc_pbft},
    {CmId::vaap, "VaaP", Family::pbft, false, CmId::s_vaap},
    {CmId::s_vaap, "S-VaaP", Family::pbft, true, CmId::vaap},
    {CmId::dpbft, "DPBFT", Family::pbft, false, CmId::s_dpbft},
    {CmId::s_dpbft, "S-DPBFT", Family::pbft, true, CmId::dpbft},
    {CmId::nbft, "NBFT", Family::pbft, false, CmId::s_nbft},
    {CmId::s_nbft, "S-NBFT", Family::pbft, true, CmId::nbft},
    {CmId::raft, "RAFT", Family::raft, false, CmId::s_raft},
    {CmId::s_raft, "S-RAFT", Family::raft, true, CmId::raft},
    {CmId::th_raft, "TH-RAFT", Family::raft, false, CmId::sth_raft},
    {CmId::sth_raft, "STH-RAFT", Family::raft, true, CmId::th_raft},
    {CmId::kraft, "KRAFT", Family::raft, false, CmId::s_kraft},
    {CmId::s_kraft, "S-KRAFT", Family::raft, true, CmId::kraft},
    {CmId::vssb_raft, "VSSB-RAFT", Family::raft, false, CmId::svssb_raft},
    {CmId::svssb_raft, "SVSSB-RAFT", Family::raft, true, CmId::vssb_raft},
}};

inline const CmInfo& cm_info(CmId id) { return kCmTable[static_cast<std::size_t>(id)]; }
inline std::string_view cm_name(CmId id) { return cm_info(id).name; }
inline Family cm_family(CmId id) { return cm_info(id).family; }
inline bool cm_symbiotic(CmId id) { return cm_info(id).symbiotic; }
inline CmId cm_twin(CmId id) { return cm_info(id).twin; }
inline CmId cm_baseline(CmId id) { return cm_symbiotic(id) ? cm_twin(id) : id; }

inline CmId parse_cm(std::string_view name) {
  for (const auto& info : kCmTable) {
    if (info.name == name) return info.id;
  }
  throw CatalogError("unknown consensus mechanism: " + std::string(name));
}

inline std::string_view to_string(Family f) { return f == Family::pbft ? "PBFT-like" : "RAFT-like"; }
inline std::string_view to_string(Multiplexing m) { return m == Multiplexing::fd ? "FD" : "TD"; }

inline Multiplexing parse_multiplexing(std::string_view s) {
  if (s == "FD" || s == "fd") return Multiplexing::fd;
  if (s == "TD" || s == "td") return Multiplexing::td;
  throw ConfigError("unknown multiplexing mode: " + std::string(s));
}

/// Maximum Byzantine nodes a PBFT-family network of n nodes tolerates.
inline int pbft_fault_bound(int n) { return n >= 1 ? (n - 1) / 3 : 0; }
/// Maximum crashed nodes a RAFT-family network of n nodes tolerates.
inline int raft_fault_bound(int n) { return n >= 1 ? (n - 1) / 2 : 0; }

inline int min_nodes(Family f) { return f == Family::pbft ? 4 : 3; }

struct ConsensusConfig {
  int n = 4;
  std::optional<int> fault_budget;  // defaults to the family's maximum tolerance
  CmId cm = CmId::s_pbft;
  Multiplexing multiplexing = Multiplexing::fd;
  double p_s = 0.8;
  double p_e = 0.9;
  std::optional<double> p_b;  // backscatter reliability, defaults to p_s
  RaftAssignment raft_assignment = RaftAssignment::printed;

  Family family() const { return cm_family(cm); }
  bool symbiotic() const { return cm_symbiotic(cm); }
  double backscatter_p() const { return p_b.value_or(p_s); }

  int budget() const {
    if (fault_budget) return *fault_budget;
    return family() == Family::pbft ? pbft_fault_bound(n) : raft_fault_bound(n);
  }

  void validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(p_s) || !prob_ok(p_e) || !prob_ok(backscatter_p())) {
      throw DomainError("ConsensusConfig: probabilities must lie in [0,1]");
    }
    if (n < 1) throw DegenerateNetwork("ConsensusConfig: n must be >= 1");
    if (budget() < 0) throw DomainError("ConsensusConfig: fault budget must be >= 0");
  }

  ConsensusConfig with_cm(CmId id) const {
    ConsensusConfig c = *this;
    c.cm = id;
    return c;
  }
  ConsensusConfig with_n(int nodes) const {
    ConsensusConfig c = *this;
    c.n = nodes;
    c.fault_budget.reset();
    return c;
  }
};

/// Phase airtimes of an n-node network: t1/t2 plain, t3/t4 enhanced.
struct PhaseTimings {
  double t1 = 0.0;  // broadcast to n-1 receivers, plain
  double t2 = 0.0;  // single plain message
  double t3 = 0.0;  // broadcast to n-1 receivers, enhanced
  double t4 = 0.0;  // single enhanced message

  static PhaseTimings for_nodes(int n, const Airtimes& a) {
    return {(n - 1) * a.plain, a.plain, (n - 1) * a.enhanced, a.enhanced};
  }
};

struct MetricSet {
  double success = 0.0;
  double latency = 0.0;       // seconds
  std::int64_t overhead = 0;  // active messages
  double energy = 0.0;        // joules
};

}  // namespace sbc
