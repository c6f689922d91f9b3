// Command surface: sweep, catalog, validate, summarize, plan.
// Exit status: 0 success, 1 a validation criterion failed, 2 usage or input error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbc/validation.hpp"

namespace {

sbc::SweepConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  sbc::SweepConfig cfg = path.empty() ? sbc::SweepConfig{} : sbc::load_sweep_config(path);
  for (const auto& o : overrides) cfg.set_override(o);
  cfg.validate();
  return cfg;
}

int cmd_sweep(const std::string& config, const std::vector<std::string>& overrides, bool no_svg) {
  const auto cfg = load_config(config, overrides);
  const auto rows = sbc::run_sweep(cfg);
  {
    std::ofstream out(cfg.csv_path);
    if (!out) throw sbc::ConfigError("cannot write " + cfg.csv_path);
    sbc::write_csv(out, rows, cfg.trials);
  }
  std::size_t errors = 0;
  for (const auto& r : rows) errors += r.ok() ? 0 : 1;
  std::cout << "wrote " << rows.size() << " rows to " << cfg.csv_path;
  if (errors) std::cout << " (" << errors << " rows carry an error record)";
  std::cout << '\n';
  if (!no_svg) {
    for (const auto& p : sbc::write_svgs(rows, cfg.svg_dir)) std::cout << "wrote " << p << '\n';
  }
  return 0;
}

int cmd_catalog(const std::string& config, const std::vector<std::string>& overrides) {
  const auto cfg = load_config(config, overrides);
  std::printf("%-12s %-10s %-9s %-6s %s\n", "id", "family", "symbiotic", "min_n", "defaults");
  for (const auto& e : sbc::catalog(cfg.variants)) {
    std::printf("%-12s %-10s %-9s %-6d %s\n", e.name.c_str(), std::string(sbc::to_string(e.family)).c_str(),
                e.symbiotic ? "yes" : "no", e.min_n, e.params.c_str());
  }
  return 0;
}

int cmd_validate(const sbc::ValidationOptions& opts, bool verbose) {
  const auto results = sbc::run_validation(opts, &std::cout, verbose);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (results.size() - failed) << " of " << results.size() << " criteria passed\n";
  return failed ? 1 : 0;
}

int cmd_summarize(const std::string& csv, const std::string& config, const std::vector<std::string>& overrides) {
  std::vector<sbc::ResultRow> rows;
  if (!csv.empty()) {
    std::ifstream in(csv);
    if (!in) throw sbc::ConfigError("cannot open " + csv);
    rows = sbc::read_csv(in);
  } else {
    rows = sbc::run_sweep(load_config(config, overrides));
  }
  sbc::print_summary(std::cout, sbc::summarize_gains(rows));
  return 0;
}

int cmd_plan(const std::string& cm, int n, const std::string& mux, double target) {
  sbc::ConsensusConfig cfg;
  cfg.cm = sbc::parse_cm(cm);
  cfg.n = n;
  cfg.multiplexing = sbc::parse_multiplexing(mux);
  const auto a = sbc::airtimes_at(target, sbc::paper_link_budget(sbc::ChannelParams(10.0, 1.0)));
  sbc::dump_plan(std::cout, sbc::build_phase_plan(cfg, a));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbiotic-radio consensus laboratory"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "sweep configuration file");
    sub->add_option("-s,--set", overrides, "override a key, section.key=value")->take_all();
  };

  auto* sweep = app.add_subcommand("sweep", "run a sweep and write CSV and SVG");
  add_config(sweep);
  bool no_svg = false;
  sweep->add_flag("--no-svg", no_svg, "skip the charts");

  auto* cat = app.add_subcommand("catalog", "list mechanisms with default parameters");
  add_config(cat);

  auto* val = app.add_subcommand("validate", "run the acceptance checks");
  sbc::ValidationOptions vopts;
  bool verbose = false;
  val->add_option("--trials", vopts.mc_trials, "Monte Carlo trials per cell")->check(CLI::PositiveNumber);
  val->add_option("--seed", vopts.seed, "master seed");
  val->add_option("--workers", vopts.workers, "threads, 0 = all cores");
  val->add_flag("-v,--verbose", verbose, "print evidence for passing checks too");

  auto* sum = app.add_subcommand("summarize", "gains at the headline anchors");
  std::string csv;
  sum->add_option("--csv", csv, "results table written by sweep");
  add_config(sum);

  auto* plan = app.add_subcommand("plan", "dump a base phase plan");
  std::string cm = "S-PBFT", mux = "FD";
  int n = 4;
  double target = 0.9;
  plan->add_option("--cm", cm, "PBFT, S-PBFT, RAFT or S-RAFT");
  plan->add_option("-n", n, "node count");
  plan->add_option("--mux", mux, "FD or TD");
  plan->add_option("--latency-target", target, "delivery probability fixing T_s and T_e");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }
  try {
    if (*sweep) return cmd_sweep(config, overrides, no_svg);
    if (*cat) return cmd_catalog(config, overrides);
    if (*val) return cmd_validate(vopts, verbose);
    if (*sum) return cmd_summarize(csv, config, overrides);
    if (*plan) return cmd_plan(cm, n, mux, target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
