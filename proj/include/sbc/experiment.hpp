#pragma once

// Sweep configuration, execution, CSV/SVG emission and the gains summary.
//
// Config text: `key = value` lines grouped under `[section]` headers, `#` or
// `;` comments. `schema = 1` must appear before the first section. Unknown
// sections or keys are errors.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "sbc/catalog.hpp"

namespace sbc {

inline constexpr int kSweepSchema = 1;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || !std::isfinite(x)) throw ConfigError(key + ": not a number: '" + v + "'");
  return x;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw ConfigError(key + ": not an integer: '" + v + "'");
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.starts_with('-')) throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
  return x;
}

// Shortest text that reads back to the same double.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace detail

struct ProbabilityPair {
  double p_s = 0.8;
  double p_e = 0.9;
  auto operator<=>(const ProbabilityPair&) const = default;
};

struct SweepConfig {
  std::vector<CmId> cms;
  int n_min = 4;
  int n_max = 100;
  int n_step = 1;
  std::vector<ProbabilityPair> pairs{{0.8, 0.9}, {0.9, 0.99}};
  std::vector<Multiplexing> multiplexing{Multiplexing::fd, Multiplexing::td};
  std::int64_t trials = 0;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;
  double latency_target = 0.9;  // T_s and T_e both reach this delivery probability
  RaftAssignment raft_assignment = RaftAssignment::printed;
  std::optional<double> p_b;

  // Link budget; transmit power is given in dBm.
  double bandwidth_hz = 1e6;
  double rate_bps = 100e3;
  double capacity_bps = 150e3;
  std::optional<double> enhanced_capacity_bps;  // default: Shannon scaling by the multipath gain
  int subcarriers = 1;
  double tx_power_dbm = 30.0;
  double gamma_d = 10.0;
  double gamma_b = 1.0;

  CmParams variants;

  std::string csv_path = "results.csv";
  std::string svg_dir = "figures";

  SweepConfig() {
    for (const auto& info : kCmTable) cms.push_back(info.id);
  }

  LinkBudget link_budget() const {
    LinkBudget lb;
    lb.bandwidth_hz = bandwidth_hz;
    lb.rate_bps = rate_bps;
    lb.capacity_bps = capacity_bps;
    lb.subcarriers = subcarriers;
    lb.tx_power_w = dbm_to_watts(tx_power_dbm);
    lb.enhanced_capacity_bps = enhanced_capacity_bps.value_or(
        shannon_scaled_capacity(capacity_bps, ChannelParams(gamma_d, gamma_b)));
    return lb;
  }

  Airtimes airtimes() const { return airtimes_at(latency_target, link_budget()); }

  std::vector<int> n_values() const {
    std::vector<int> out;
    for (int n = n_min; n <= n_max; n += n_step) out.push_back(n);
    return out;
  }

  /// Sets one key; `section` is empty for top-level keys.
  void set(const std::string& section, const std::string& key, const std::string& value) {
    const std::string full = section.empty() ? key : section + "." + key;
    using namespace detail;
    if (section.empty() && key == "schema") {
      if (parse_int(full, value) != kSweepSchema) throw ConfigError("unsupported schema version " + value);
    } else if (section == "sweep") {
      if (key == "cms") {
        cms.clear();
        for (const auto& name : split(value, ',')) cms.push_back(parse_cm(name));
      } else if (key == "n_min") {
        n_min = static_cast<int>(parse_int(full, value));
      } else if (key == "n_max") {
        n_max = static_cast<int>(parse_int(full, value));
      } else if (key == "n_step") {
        n_step = static_cast<int>(parse_int(full, value));
      } else if (key == "pairs") {
        pairs.clear();
        for (const auto& item : split(value, ',')) {
          const auto pe = split(item, ':');
          if (pe.size() != 2) throw ConfigError(full + ": expected p_s:p_e, got '" + item + "'");
          pairs.push_back({parse_double(full, pe[0]), parse_double(full, pe[1])});
        }
      } else if (key == "multiplexing") {
        multiplexing.clear();
        for (const auto& m : split(value, ',')) multiplexing.push_back(parse_multiplexing(m));
      } else if (key == "trials") {
        trials = parse_int(full, value);
      } else if (key == "master_seed") {
        master_seed = parse_u64(full, value);
      } else if (key == "workers") {
        workers = static_cast<unsigned>(parse_u64(full, value));
      } else if (key == "latency_target") {
        latency_target = parse_double(full, value);
      } else if (key == "raft_assignment") {
        if (value == "printed") {
          raft_assignment = RaftAssignment::printed;
        } else if (value == "physical") {
          raft_assignment = RaftAssignment::physical;
        } else {
          throw ConfigError(full + ": expected printed or physical");
        }
      } else if (key == "p_b") {
        p_b = parse_double(full, value);
      } else {
        throw ConfigError("unknown key " + full);
      }
    } else if (section == "link") {
      if (key == "bandwidth_hz") {
        bandwidth_hz = parse_double(full, value);
      } else if (key == "rate_bps") {
        rate_bps = parse_double(full, value);
      } else if (key == "capacity_bps") {
        capacity_bps = parse_double(full, value);
      } else if (key == "enhanced_capacity_bps") {
        enhanced_capacity_bps = parse_double(full, value);
      } else if (key == "subcarriers") {
        subcarriers = static_cast<int>(parse_int(full, value));
      } else if (key == "tx_power_dbm") {
        tx_power_dbm = parse_double(full, value);
      } else if (key == "gamma_d") {
        gamma_d = parse_double(full, value);
      } else if (key == "gamma_b") {
        gamma_b = parse_double(full, value);
      } else {
        throw ConfigError("unknown key " + full);
      }
    } else if (section == "variants") {
      if (key == "primary_group_fraction") {
        variants.primary_group_fraction = parse_double(full, value);
      } else if (key == "consensus_fraction") {
        variants.consensus_fraction = parse_double(full, value);
      } else if (key == "shards") {
        variants.shards = static_cast<int>(parse_int(full, value));
      } else if (key == "leaders") {
        variants.leaders = static_cast<int>(parse_int(full, value));
      } else if (key == "two_hop_fraction") {
        variants.two_hop_fraction = parse_double(full, value);
      } else if (key == "domain_size") {
        variants.domain_size = static_cast<int>(parse_int(full, value));
      } else if (key == "shard_quorum") {
        variants.shard_quorum = parse_double(full, value);
      } else {
        throw ConfigError("unknown key " + full);
      }
    } else if (section == "output") {
      if (key == "csv") {
        csv_path = value;
      } else if (key == "svg_dir") {
        svg_dir = value;
      } else {
        throw ConfigError("unknown key " + full);
      }
    } else {
      throw ConfigError("unknown key " + full);
    }
  }

  /// `section.key=value` override, as given on the command line.
  void set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override needs section.key=value: '" + assignment + "'");
    const auto path = detail::trim(std::string_view(assignment).substr(0, eq));
    const auto value = detail::trim(std::string_view(assignment).substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos) {
      set("", path, value);
    } else {
      set(path.substr(0, dot), path.substr(dot + 1), value);
    }
  }

  void validate() const {
    if (cms.empty()) throw ConfigError("sweep.cms is empty");
    if (n_step < 1 || n_min > n_max) throw ConfigError("sweep: n range is empty");
    if (n_min < 1) throw ConfigError("sweep.n_min must be >= 1");
    if (pairs.empty() || multiplexing.empty()) throw ConfigError("sweep: pairs and multiplexing must be non-empty");
    for (const auto& p : pairs) {
      if (!(p.p_s > 0.0 && p.p_s <= p.p_e && p.p_e < 1.0)) {
        throw ConfigError("sweep.pairs: need 0 < p_s <= p_e < 1");
      }
    }
    if (p_b && !(*p_b > 0.0 && *p_b < 1.0)) throw ConfigError("sweep.p_b must lie in (0,1)");
    if (trials < 0) throw ConfigError("sweep.trials must be >= 0");
    if (!(latency_target > 0.0 && latency_target < 1.0)) throw ConfigError("sweep.latency_target must lie in (0,1)");
    if (!(tx_power_dbm > -300.0 && tx_power_dbm < 300.0)) throw ConfigError("link.tx_power_dbm out of range");
    try {
      variants.validate();
      (void)airtimes();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid parameters: ") + e.what());
    }
  }
};

inline SweepConfig parse_sweep_config(std::istream& in) {
  SweepConfig cfg;
  std::string line;
  std::string section;
  bool schema_seen = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    const auto body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    try {
      if (body.front() == '[') {
        if (body.back() != ']') throw ConfigError("malformed section header");
        if (!schema_seen) throw ConfigError("schema must be declared before the first section");
        section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
        continue;
      }
      const auto eq = body.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value");
      const auto key = detail::trim(std::string_view(body).substr(0, eq));
      const auto value = detail::trim(std::string_view(body).substr(eq + 1));
      if (section.empty() && key == "schema") schema_seen = true;
      cfg.set(section, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const CatalogError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!schema_seen) throw ConfigError("missing schema declaration");
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_sweep_config(in);
}

// --- results -----------------------------------------------------------------

struct Gains {
  double success = 0.0;  // (S - B) / B
  double latency = 0.0;  // (B - S) / B, likewise below
  double overhead = 0.0;
  double energy = 0.0;
};

inline Gains gains(const MetricSet& sym, const MetricSet& base) {
  return {(sym.success - base.success) / base.success, (base.latency - sym.latency) / base.latency,
          static_cast<double>(base.overhead - sym.overhead) / static_cast<double>(base.overhead),
          (base.energy - sym.energy) / base.energy};
}

struct SimulatedMetrics {
  double success = 0.0;
  double std_error = 0.0;
  double latency = 0.0;
  std::int64_t overhead = 0;
  double energy = 0.0;
};

struct ResultRow {
  CmId cm = CmId::pbft;
  int n = 0;
  double p_s = 0.0;
  double p_e = 0.0;
  Multiplexing multiplexing = Multiplexing::fd;
  MetricSet analytic;
  std::optional<SimulatedMetrics> simulated;
  std::optional<Gains> gain;  // symbiotic rows only
  std::uint64_t row_seed = 0;
  std::string error;          // non-empty: the cell could not be evaluated

  bool ok() const { return error.empty(); }
};

/// Mechanisms without printed closed forms.
inline bool reconstructed(CmId cm) { return cm != CmId::pbft && cm != CmId::s_pbft && cm != CmId::s_raft; }

/// Seed of one cell; depends only on the master seed and the cell key.
inline std::uint64_t row_seed(std::uint64_t master, CmId cm, int n, double p_s, double p_e, Multiplexing mux) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    h = (h ^ 0xff) * 0x100000001b3ULL;
  };
  feed(cm_name(cm));
  feed(std::to_string(n));
  feed(detail::fmt_double(p_s));
  feed(detail::fmt_double(p_e));
  feed(to_string(mux));
  return rng::derive_seed(master, h);
}

inline ConsensusConfig cell_config(const SweepConfig& sc, CmId cm, int n, const ProbabilityPair& pp, Multiplexing mux) {
  ConsensusConfig c;
  c.n = n;
  c.cm = cm;
  c.multiplexing = mux;
  c.p_s = pp.p_s;
  c.p_e = pp.p_e;
  c.p_b = sc.p_b;
  c.raft_assignment = sc.raft_assignment;
  return c;
}

/// Evaluates one cell. Errors are recorded in the row, never thrown.
inline ResultRow evaluate_cell(const SweepConfig& sc, const Airtimes& a, double tx_w, CmId cm, int n,
                               const ProbabilityPair& pp, Multiplexing mux) {
  ResultRow row;
  row.cm = cm;
  row.n = n;
  row.p_s = pp.p_s;
  row.p_e = pp.p_e;
  row.multiplexing = mux;
  try {
    const auto cfg = cell_config(sc, cm, n, pp, mux);
    const CmSpec spec{cm, sc.variants};
    const auto comp = expand(spec, n);
    row.analytic = composite_metrics(comp, cfg, a, tx_w);
    if (cm_symbiotic(cm)) {
      const auto base = composite_metrics(expand(CmSpec{cm_twin(cm), sc.variants}, n), cfg, a, tx_w);
      row.gain = gains(row.analytic, base);
    }
    if (sc.trials > 0) {
      row.row_seed = row_seed(sc.master_seed, cm, n, pp.p_s, pp.p_e, mux);
      const auto plan = build_composite_plan(comp, cfg, a);
      const auto est = estimate_composite_success(comp, plan, sc.trials, row.row_seed, 1);
      SimulatedMetrics sim{est.estimate, est.std_error, 0.0, 0, 0.0};
      const bool fd = mux == Multiplexing::fd;
      for (const auto& step : plan.steps) {
        double slowest = 0.0;
        for (const auto& p : step) {
          const double lat = plan_latency(p);
          slowest = std::max(slowest, lat);
          sim.latency += fd ? 0.0 : lat;
          sim.overhead += active_messages(p);
          sim.energy += plan_energy(p, tx_w);
        }
        sim.latency += fd ? slowest : 0.0;
      }
      row.simulated = sim;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

inline bool row_less(const ResultRow& a, const ResultRow& b) {
  auto key = [](const ResultRow& r) {
    return std::make_tuple(static_cast<int>(r.cm), r.n, r.p_s, r.p_e, static_cast<int>(r.multiplexing));
  };
  return key(a) < key(b);
}

/// Every (cm, n, pair, multiplexing) cell, in canonical order.
inline std::vector<ResultRow> run_sweep(const SweepConfig& sc) {
  sc.validate();
  const auto a = sc.airtimes();
  const double tx_w = dbm_to_watts(sc.tx_power_dbm);
  struct Cell {
    CmId cm;
    int n;
    ProbabilityPair pp;
    Multiplexing mux;
  };
  std::vector<Cell> cells;
  for (auto cm : sc.cms) {
    for (int n : sc.n_values()) {
      for (const auto& pp : sc.pairs) {
        for (auto mux : sc.multiplexing) cells.push_back({cm, n, pp, mux});
      }
    }
  }
  std::vector<ResultRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& c = cells[i];
      rows[i] = evaluate_cell(sc, a, tx_w, c.cm, c.n, c.pp, c.mux);
    }
  };
  unsigned workers = sc.workers ? sc.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(cells.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  std::stable_sort(rows.begin(), rows.end(), row_less);
  return rows;
}

// --- CSV -----------------------------------------------------------------------

inline std::vector<std::string> csv_header(bool simulated) {
  std::vector<std::string> h{"cm",        "family",  "symbiotic", "reconstructed", "n",         "p_s",
                             "p_e",       "multiplexing", "success", "latency_s",  "overhead",  "energy_j",
                             "gain_success", "gain_latency", "gain_overhead", "gain_energy"};
  if (simulated) {
    for (const char* c : {"sim_success", "sim_stderr", "sim_latency_s", "sim_overhead", "sim_energy_j", "trials",
                          "row_seed"}) {
      h.emplace_back(c);
    }
  }
  h.emplace_back("error");
  return h;
}

namespace detail {
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}
}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, std::int64_t trials) {
  const bool sim = trials > 0;
  const auto header = csv_header(sim);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  using detail::fmt_double;
  for (const auto& r : rows) {
    std::vector<std::string> f{std::string(cm_name(r.cm)), std::string(to_string(cm_family(r.cm))),
                               cm_symbiotic(r.cm) ? "1" : "0", reconstructed(r.cm) ? "1" : "0",
                               std::to_string(r.n), fmt_double(r.p_s), fmt_double(r.p_e),
                               std::string(to_string(r.multiplexing))};
    if (r.ok()) {
      f.push_back(fmt_double(r.analytic.success));
      f.push_back(fmt_double(r.analytic.latency));
      f.push_back(std::to_string(r.analytic.overhead));
      f.push_back(fmt_double(r.analytic.energy));
    } else {
      f.insert(f.end(), 4, "");
    }
    if (r.gain) {
      for (double g : {r.gain->success, r.gain->latency, r.gain->overhead, r.gain->energy}) f.push_back(fmt_double(g));
    } else {
      f.insert(f.end(), 4, "");
    }
    if (sim) {
      if (r.simulated) {
        f.push_back(fmt_double(r.simulated->success));
        f.push_back(fmt_double(r.simulated->std_error));
        f.push_back(fmt_double(r.simulated->latency));
        f.push_back(std::to_string(r.simulated->overhead));
        f.push_back(fmt_double(r.simulated->energy));
        f.push_back(std::to_string(trials));
        f.push_back(std::to_string(r.row_seed));
      } else {
        f.insert(f.end(), 7, "");
      }
    }
    f.push_back(detail::csv_escape(r.error));
    for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
    os << '\n';
  }
}

inline std::string csv_string(const std::vector<ResultRow>& rows, std::int64_t trials) {
  std::ostringstream os;
  write_csv(os, rows, trials);
  return os.str();
}

namespace detail {
inline std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace detail

/// Reads rows written by write_csv.
inline std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty results table");
  const auto header = detail::csv_fields(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"cm", "n", "p_s", "p_e", "multiplexing", "success", "latency_s", "overhead", "energy_j",
                           "gain_success", "gain_latency", "gain_overhead", "gain_energy", "error"}) {
    if (!col.count(need)) throw ConfigError(std::string("results table lacks column ") + need);
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::csv_fields(line);
    if (f.size() != header.size()) throw ConfigError("results line " + std::to_string(lineno) + ": wrong field count");
    auto get = [&](const char* c) -> const std::string& { return f[col.at(c)]; };
    auto num = [&](const char* c) { return std::strtod(get(c).c_str(), nullptr); };
    ResultRow r;
    r.cm = parse_cm(get("cm"));
    r.n = static_cast<int>(detail::parse_int("n", get("n")));
    r.p_s = num("p_s");
    r.p_e = num("p_e");
    r.multiplexing = parse_multiplexing(get("multiplexing"));
    r.error = get("error");
    if (r.ok()) {
      r.analytic = {num("success"), num("latency_s"), detail::parse_int("overhead", get("overhead")), num("energy_j")};
    }
    if (!get("gain_success").empty()) {
      r.gain = Gains{num("gain_success"), num("gain_latency"), num("gain_overhead"), num("gain_energy")};
    }
    if (col.count("sim_success") && !get("sim_success").empty()) {
      r.simulated = SimulatedMetrics{num("sim_success"), num("sim_stderr"), num("sim_latency_s"),
                                     detail::parse_int("sim_overhead", get("sim_overhead")), num("sim_energy_j")};
      r.row_seed = detail::parse_u64("row_seed", get("row_seed"));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- SVG -----------------------------------------------------------------------

enum class Metric { success, latency, overhead, energy };

inline std::string_view to_string(Metric m) {
  static constexpr std::string_view names[] = {"success", "latency", "overhead", "energy"};
  return names[static_cast<int>(m)];
}

inline double metric_of(const MetricSet& m, Metric which) {
  switch (which) {
    case Metric::success: return m.success;
    case Metric::latency: return m.latency;
    case Metric::overhead: return static_cast<double>(m.overhead);
    default: return m.energy;
  }
}

/// Line chart of one metric against n, one series per (cm, pair, multiplexing).
inline std::string render_svg(const std::vector<ResultRow>& rows, Metric metric, Family family) {
  struct Series {
    std::string label;
    bool symbiotic;
    std::vector<std::pair<double, double>> pts;
  };
  std::map<std::tuple<int, double, double, int>, Series> series;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& r : rows) {
    if (!r.ok() || cm_family(r.cm) != family) continue;
    const double y = metric_of(r.analytic, metric);
    if (!std::isfinite(y)) continue;
    auto& s = series[{static_cast<int>(r.cm), r.p_s, r.p_e, static_cast<int>(r.multiplexing)}];
    if (s.label.empty()) {
      s.label = std::string(cm_name(r.cm)) + " (" + detail::fmt_double(r.p_s) + ", " + detail::fmt_double(r.p_e) +
                ") " + std::string(to_string(r.multiplexing));
      s.symbiotic = cm_symbiotic(r.cm);
    }
    s.pts.emplace_back(r.n, y);
    x0 = std::min(x0, double(r.n));
    x1 = std::max(x1, double(r.n));
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  constexpr double W = 900, H = 560, L = 80, R = 260, T = 40, B = 60;
  if (series.empty()) {
    x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << to_string(metric) << " of "
     << to_string(family) << " mechanisms</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0;
    const double yv = y0 + (y1 - y0) * i / 5.0;
    os << "<text x=\"" << num(sx(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    std::snprintf(buf, sizeof buf, "%.4g", yv);
    os << "<text x=\"" << L - 6 << "\" y=\"" << num(sy(yv) + 4) << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">n</text>\n";
  int k = 0;
  for (auto& [key, s] : series) {
    std::sort(s.pts.begin(), s.pts.end());
    const char* color = palette[(k / 2) % 10];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.symbiotic ? "" : " stroke-dasharray=\"5,3\"") << " points=\"";
    for (const auto& [x, y] : s.pts) os << num(sx(x)) << ',' << num(sy(y)) << ' ';
    os << "\"/>\n";
    const double ly = T + 14.0 * k;
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << num(ly) << "\" x2=\"" << W - R + 30 << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\"" << (s.symbiotic ? "" : " stroke-dasharray=\"5,3\"") << "/>\n";
    os << "<text x=\"" << W - R + 34 << "\" y=\"" << num(ly + 4) << "\">" << s.label << "</text>\n";
    ++k;
  }
  os << "</svg>\n";
  return os.str();
}

/// Writes `<metric>_<family>.svg` for every metric and family; returns the paths.
inline std::vector<std::string> write_svgs(const std::vector<ResultRow>& rows, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> out;
  for (auto m : {Metric::success, Metric::latency, Metric::overhead, Metric::energy}) {
    for (auto f : {Family::pbft, Family::raft}) {
      const auto path = (std::filesystem::path(dir) /
                         (std::string(to_string(m)) + "_" + (f == Family::pbft ? "pbft" : "raft") + ".svg"))
                            .string();
      std::ofstream(path) << render_svg(rows, m, f);
      out.push_back(path);
    }
  }
  return out;
}

// --- gains summary ---------------------------------------------------------------

struct AnchorSpec {
  std::string label;
  Family family;
  Metric metric;
  int n;
  std::optional<Multiplexing> multiplexing;  // empty: any
  std::optional<ProbabilityPair> pair;       // empty: first pair present
  double reference_pct;
  std::optional<double> tolerance_pp;  // empty: reported only
};

/// The headline anchors: success at n = 4, the rest at n = 75.
inline std::vector<AnchorSpec> headline_anchors() {
  const ProbabilityPair low{0.8, 0.9};
  return {
      {"success PBFT-like", Family::pbft, Metric::success, 4, Multiplexing::fd, low, 54.1, 10.0},
      {"success RAFT-like", Family::raft, Metric::success, 4, Multiplexing::fd, low, 5.8, 3.0},
      {"latency FD PBFT-like", Family::pbft, Metric::latency, 75, Multiplexing::fd, {}, 3.2, {}},
      {"latency TD PBFT-like", Family::pbft, Metric::latency, 75, Multiplexing::td, {}, 12.1, {}},
      {"latency FD RAFT-like", Family::raft, Metric::latency, 75, Multiplexing::fd, {}, 6.9, {}},
      {"latency TD RAFT-like", Family::raft, Metric::latency, 75, Multiplexing::td, {}, 3.2, {}},
      {"overhead PBFT-like", Family::pbft, Metric::overhead, 75, Multiplexing::fd, {}, 12.2, {}},
      {"overhead RAFT-like", Family::raft, Metric::overhead, 75, Multiplexing::fd, {}, 50.0, 5.0},
      {"energy PBFT-like", Family::pbft, Metric::energy, 75, Multiplexing::fd, {}, 9.2, 5.0},
      {"energy RAFT-like", Family::raft, Metric::energy, 75, Multiplexing::fd, {}, 23.7, 5.0},
  };
}

struct AnchorResult {
  AnchorSpec spec;
  std::vector<std::pair<CmId, double>> contributions;  // percent
  double average_pct = std::nan("");
  bool complete = false;  // every symbiotic CM of the family contributed
  std::vector<std::string> missing;

  std::optional<bool> pass() const {
    if (!spec.tolerance_pp) return std::nullopt;
    return complete && std::abs(average_pct - spec.reference_pct) <= *spec.tolerance_pp;
  }
};

inline double gain_of(const Gains& g, Metric m) {
  switch (m) {
    case Metric::success: return g.success;
    case Metric::latency: return g.latency;
    case Metric::overhead: return g.overhead;
    default: return g.energy;
  }
}

/// Family averages of the gain columns at each anchor. Pure in `rows`.
inline std::vector<AnchorResult> summarize_gains(const std::vector<ResultRow>& rows,
                                                 const std::vector<AnchorSpec>& anchors = headline_anchors()) {
  std::vector<AnchorResult> out;
  for (const auto& a : anchors) {
    AnchorResult res{a, {}, std::nan(""), false, {}};
    std::optional<ProbabilityPair> pair = a.pair;
    if (!pair) {
      for (const auto& r : rows) {
        if (r.n == a.n && cm_family(r.cm) == a.family && r.gain) {
          pair = ProbabilityPair{r.p_s, r.p_e};
          break;
        }
      }
    }
    int expected = 0;
    for (const auto& info : kCmTable) {
      if (info.family != a.family || !info.symbiotic) continue;
      ++expected;
      const ResultRow* hit = nullptr;
      for (const auto& r : rows) {
        if (r.cm == info.id && r.n == a.n && r.gain && pair && r.p_s == pair->p_s && r.p_e == pair->p_e &&
            (!a.multiplexing || r.multiplexing == *a.multiplexing)) {
          hit = &r;
          break;
        }
      }
      if (hit) {
        res.contributions.emplace_back(info.id, 100.0 * gain_of(*hit->gain, a.metric));
      } else {
        res.missing.emplace_back(info.name);
      }
    }
    if (!res.contributions.empty()) {
      double s = 0.0;
      for (const auto& c : res.contributions) s += c.second;
      res.average_pct = s / static_cast<double>(res.contributions.size());
    }
    res.complete = static_cast<int>(res.contributions.size()) == expected;
    out.push_back(std::move(res));
  }
  return out;
}

inline void print_summary(std::ostream& os, const std::vector<AnchorResult>& results) {
  char buf[256];
  for (const auto& r : results) {
    const auto verdict = r.pass();
    std::snprintf(buf, sizeof buf, "%-22s n=%-3d measured %8.2f%%  reference %6.1f%%  delta %+8.2f pp  %s", r.spec.label.c_str(),
                  r.spec.n, r.average_pct, r.spec.reference_pct, r.average_pct - r.spec.reference_pct,
                  !verdict ? "(reported)" : (*verdict ? "PASS" : "FAIL"));
    os << buf;
    if (r.spec.tolerance_pp) os << " (tolerance +-" << *r.spec.tolerance_pp << " pp)";
    os << '\n';
    for (const auto& [cm, g] : r.contributions) {
      std::snprintf(buf, sizeof buf, "    %-12s %8.2f%%", std::string(cm_name(cm)).c_str(), g);
      os << buf << '\n';
    }
    if (!r.missing.empty()) {
      os << "    warning: incomplete summary, missing";
      for (const auto& m : r.missing) os << ' ' << m;
      os << '\n';
    }
  }
}

}  // namespace sbc
