#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbc/experiment.hpp"

using namespace sbc;

namespace {

SweepConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_sweep_config(in);
}

SweepConfig small_sweep() {
  SweepConfig sc;
  sc.cms = {CmId::pbft, CmId::s_pbft, CmId::raft, CmId::s_raft, CmId::kraft, CmId::s_kraft};
  sc.n_min = 4;
  sc.n_max = 16;
  sc.n_step = 4;
  return sc;
}

const ResultRow* find_row(const std::vector<ResultRow>& rows, CmId cm, int n, double ps, Multiplexing mux) {
  for (const auto& r : rows) {
    if (r.cm == cm && r.n == n && r.p_s == ps && r.multiplexing == mux) return &r;
  }
  return nullptr;
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto sc = parse(
      "schema = 1\n"
      "# comment\n"
      "[sweep]\n"
      "cms = S-PBFT, RAFT ; trailing\n"
      "n_min = 5\n"
      "n_max = 9\n"
      "pairs = 0.7:0.95\n"
      "multiplexing = TD\n"
      "trials = 100\n"
      "[link]\n"
      "capacity_bps = 2e5\n"
      "[variants]\n"
      "leaders = 3\n");
  EXPECT_EQ(sc.cms, (std::vector<CmId>{CmId::s_pbft, CmId::raft}));
  EXPECT_EQ(sc.n_values(), (std::vector<int>{5, 6, 7, 8, 9}));
  ASSERT_EQ(sc.pairs.size(), 1u);
  EXPECT_EQ(sc.pairs[0].p_e, 0.95);
  EXPECT_EQ(sc.multiplexing, std::vector<Multiplexing>{Multiplexing::td});
  EXPECT_EQ(sc.trials, 100);
  EXPECT_EQ(sc.capacity_bps, 2e5);
  EXPECT_EQ(sc.variants.leaders, 3);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse("[sweep]\nn_min = 5\n"), ConfigError);
  EXPECT_THROW(parse("schema = 2\n"), ConfigError);
  EXPECT_THROW(parse(""), ConfigError);
  EXPECT_THROW(parse("schema = 1\n[sweep]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse("schema = 1\n[sweep]\nn_min = five\n"), ConfigError);
  EXPECT_THROW(parse("schema = 1\n[sweep]\ncms = XBFT\n"), ConfigError);
  EXPECT_THROW(parse("schema = 1\n[sweep\n"), ConfigError);
  try {
    parse("schema = 1\n[sweep]\n\nbogus = 1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
}

TEST(Config, ValidateRejectsInvertedPairs) {
  SweepConfig sc;
  sc.pairs = {{0.9, 0.8}};
  EXPECT_THROW(sc.validate(), ConfigError);
  sc.pairs = {{0.8, 0.9}};
  EXPECT_NO_THROW(sc.validate());
}

TEST(Config, Overrides) {
  SweepConfig sc;
  sc.set_override("sweep.n_max=12");
  sc.set_override("sweep.latency_target = 0.95");
  EXPECT_EQ(sc.latency_target, 0.95);
  EXPECT_EQ(sc.n_max, 12);
  EXPECT_THROW(sc.set_override("n_max"), ConfigError);
  EXPECT_THROW(sc.set_override("sweep.nope=1"), ConfigError);
}

TEST(Sweep, AnalyticHeaderHasNoSimulationColumns) {
  const auto h = csv_header(false);
  EXPECT_EQ(std::count(h.begin(), h.end(), "sim_success"), 0);
  EXPECT_EQ(std::count(h.begin(), h.end(), "row_seed"), 0);
  const auto hs = csv_header(true);
  EXPECT_EQ(std::count(hs.begin(), hs.end(), "sim_success"), 1);
}

TEST(Sweep, CsvIsByteIdenticalAcrossRunsAndWorkers) {
  auto sc = small_sweep();
  sc.trials = 500;
  sc.workers = 1;
  const auto a = csv_string(run_sweep(sc), sc.trials);
  sc.workers = 4;
  const auto b = csv_string(run_sweep(sc), sc.trials);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, csv_string(run_sweep(sc), sc.trials));
}

TEST(Sweep, RowsAreCanonicallyOrdered) {
  const auto rows = run_sweep(small_sweep());
  EXPECT_EQ(rows.size(), 6u * 4u * 2u * 2u);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end(), row_less));
}

TEST(Sweep, RowSeedReplaysTheCell) {
  auto sc = small_sweep();
  sc.trials = 300;
  const auto rows = run_sweep(sc);
  const auto* r = find_row(rows, CmId::s_kraft, 12, 0.8, Multiplexing::fd);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->row_seed, row_seed(sc.master_seed, CmId::s_kraft, 12, 0.8, 0.9, Multiplexing::fd));
  const auto again = evaluate_cell(sc, sc.airtimes(), dbm_to_watts(sc.tx_power_dbm), CmId::s_kraft, 12, {0.8, 0.9},
                                   Multiplexing::fd);
  ASSERT_TRUE(again.simulated);
  EXPECT_EQ(again.simulated->success, r->simulated->success);
  EXPECT_EQ(again.simulated->overhead, r->analytic.overhead);
}

TEST(Sweep, CsvRoundTrip) {
  auto sc = small_sweep();
  sc.trials = 200;
  const auto rows = run_sweep(sc);
  const auto text = csv_string(rows, sc.trials);
  std::istringstream in(text);
  const auto back = read_csv(in);
  ASSERT_EQ(back.size(), rows.size());
  EXPECT_EQ(csv_string(back, sc.trials), text);
}

TEST(Sweep, InvalidCellsBecomeErrorRows) {
  SweepConfig sc;
  sc.cms = {CmId::pbft, CmId::raft};
  sc.n_min = 3;
  sc.n_max = 4;
  sc.pairs = {{0.8, 0.9}};
  sc.multiplexing = {Multiplexing::fd};
  const auto rows = run_sweep(sc);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_FALSE(find_row(rows, CmId::pbft, 3, 0.8, Multiplexing::fd)->ok());
  EXPECT_TRUE(find_row(rows, CmId::pbft, 4, 0.8, Multiplexing::fd)->ok());
  EXPECT_TRUE(find_row(rows, CmId::raft, 3, 0.8, Multiplexing::fd)->ok());
  const auto text = csv_string(rows, 0);
  std::istringstream in(text);
  EXPECT_FALSE(read_csv(in).front().ok());
}

TEST(Sweep, ReconstructedFlag) {
  EXPECT_FALSE(reconstructed(CmId::pbft));
  EXPECT_FALSE(reconstructed(CmId::s_pbft));
  EXPECT_FALSE(reconstructed(CmId::s_raft));
  EXPECT_TRUE(reconstructed(CmId::raft));
  EXPECT_TRUE(reconstructed(CmId::kraft));
}

TEST(Summary, SingleMechanismAverageIsItsGain) {
  const auto rows = run_sweep(small_sweep());
  AnchorSpec a{"probe", Family::pbft, Metric::overhead, 8, Multiplexing::fd, ProbabilityPair{0.8, 0.9}, 0.0, 100.0};
  const auto res = summarize_gains(rows, {a}).front();
  ASSERT_EQ(res.contributions.size(), 1u);
  const auto* r = find_row(rows, CmId::s_pbft, 8, 0.8, Multiplexing::fd);
  EXPECT_DOUBLE_EQ(res.average_pct, 100.0 * r->gain->overhead);
  EXPECT_FALSE(res.complete);
  EXPECT_FALSE(*res.pass());  // incomplete never passes
  std::ostringstream os;
  print_summary(os, {res});
  EXPECT_NE(os.str().find("warning: incomplete summary"), std::string::npos);
}

TEST(Summary, PureInRows) {
  const auto rows = run_sweep(small_sweep());
  std::ostringstream a, b;
  print_summary(a, summarize_gains(rows));
  print_summary(b, summarize_gains(rows));
  EXPECT_EQ(a.str(), b.str());
}

TEST(Svg, WritesOneFilePerMetricAndFamily) {
  const auto dir = std::filesystem::temp_directory_path() / "sbc_svg_test";
  std::filesystem::remove_all(dir);
  const auto paths = write_svgs(run_sweep(small_sweep()), dir.string());
  ASSERT_EQ(paths.size(), 8u);
  for (const auto& p : paths) {
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("<svg", 0), 0u) << p;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "energy_raft.svg"));
  std::filesystem::remove_all(dir);
}

TEST(Gains, SignConventions) {
  const MetricSet s{0.9, 1.0, 8, 2.0};
  const MetricSet b{0.6, 2.0, 10, 4.0};
  const auto g = gains(s, b);
  EXPECT_DOUBLE_EQ(g.success, 0.5);
  EXPECT_DOUBLE_EQ(g.latency, 0.5);
  EXPECT_DOUBLE_EQ(g.overhead, 0.2);
  EXPECT_DOUBLE_EQ(g.energy, 0.5);
}

TEST(Figures, SymbioticDominatesOnTheFullGrid) {
  SweepConfig sc;
  sc.n_min = 10;
  sc.n_max = 100;
  sc.multiplexing = {Multiplexing::fd};
  for (const auto& r : run_sweep(sc)) {
    if (!r.gain) continue;
    ASSERT_TRUE(r.ok()) << r.error;
    EXPECT_GE(r.gain->success, 0.0) << cm_name(r.cm) << r.n;
    EXPECT_GE(r.gain->overhead, 0.0) << cm_name(r.cm) << r.n;
    EXPECT_GE(r.gain->energy, 0.0) << cm_name(r.cm) << r.n;
  }
}
