#include <gtest/gtest.h>

#include "sbc/catalog.hpp"

using namespace sbc;

namespace {

const Airtimes kAir{1.2e-3, 0.9e-3};

ConsensusConfig base(int n, double ps = 0.8, double pe = 0.9, Multiplexing mux = Multiplexing::fd) {
  ConsensusConfig c;
  c.n = n;
  c.p_s = ps;
  c.p_e = pe;
  c.multiplexing = mux;
  return c;
}

MetricSet metrics_of(CmId id, const ConsensusConfig& c) { return catalog_metrics(default_spec(id), c, kAir, 1.0); }

}  // namespace

TEST(Catalog, ListsEveryMechanism) {
  const auto entries = catalog();
  ASSERT_EQ(entries.size(), 20u);
  int symbiotic = 0;
  for (const auto& e : entries) {
    symbiotic += e.symbiotic ? 1 : 0;
    EXPECT_EQ(e.min_n, e.family == Family::pbft ? 4 : 3);
  }
  EXPECT_EQ(symbiotic, 10);
}

TEST(Catalog, BaseMechanismsMatchAnalytics) {
  for (auto id : {CmId::pbft, CmId::s_pbft, CmId::raft, CmId::s_raft}) {
    for (int n : {4, 10, 37}) {
      const auto c = base(n).with_cm(id);
      const auto want = metrics(c, kAir, 1.0);
      const auto got = metrics_of(id, c);
      EXPECT_NEAR(got.success, want.success, 1e-15);
      EXPECT_DOUBLE_EQ(got.latency, want.latency);
      EXPECT_EQ(got.overhead, want.overhead);
    }
  }
}

TEST(Catalog, VaapCostsMatchPbft) {
  for (int n = 4; n <= 60; n += 7) {
    EXPECT_EQ(metrics_of(CmId::vaap, base(n)).overhead, metrics_of(CmId::pbft, base(n)).overhead);
    EXPECT_EQ(metrics_of(CmId::s_vaap, base(n)).overhead, metrics_of(CmId::s_pbft, base(n)).overhead);
  }
}

TEST(Catalog, SymbioticVariantsDominateTwins) {
  for (int n = 10; n <= 100; n += 3) {
    for (auto [ps, pe] : {std::pair{0.8, 0.9}, std::pair{0.9, 0.99}}) {
      for (const auto& info : kCmTable) {
        if (!info.symbiotic) continue;
        const auto c = base(n, ps, pe);
        const auto s = metrics_of(info.id, c);
        const auto b = metrics_of(info.twin, c);
        EXPECT_GE(s.success, b.success) << info.name << " n=" << n;
        EXPECT_LE(s.overhead, b.overhead) << info.name << " n=" << n;
        EXPECT_LE(s.energy, b.energy) << info.name << " n=" << n;
      }
    }
  }
}

TEST(Catalog, NbftAtLeastDpbft) {
  for (int n = 4; n <= 100; ++n) {
    EXPECT_GE(metrics_of(CmId::nbft, base(n)).success, metrics_of(CmId::dpbft, base(n)).success - 1e-15) << n;
    EXPECT_GE(metrics_of(CmId::s_nbft, base(n)).success, metrics_of(CmId::s_dpbft, base(n)).success - 1e-15) << n;
  }
}

TEST(Catalog, ExpansionPartitionsNodes) {
  for (const auto& info : kCmTable) {
    for (int n : {12, 40, 100}) {
      const auto comp = expand(default_spec(info.id), n);
      std::set<int> seen;
      for (const auto& step : comp.steps) {
        for (const auto& st : step.stages) {
          EXPECT_GE(st.n(), min_nodes(st.family)) << info.name;
          for (int m : st.members) {
            EXPECT_GE(m, 0);
            EXPECT_LT(m, n);
            seen.insert(m);
          }
        }
      }
      EXPECT_LE(static_cast<int>(seen.size()), n);
    }
  }
}

TEST(Catalog, SmallNetworksFallBackToBase) {
  EXPECT_EQ(expand(default_spec(CmId::dpbft), 7).steps.size(), 1u);
  EXPECT_EQ(expand(default_spec(CmId::kraft), 5).steps.size(), 1u);
  EXPECT_EQ(expand(default_spec(CmId::vssb_raft), 10).steps.size(), 1u);
  EXPECT_GT(expand(default_spec(CmId::vssb_raft), 11).steps.size(), 1u);
}

TEST(Catalog, ValidityErrors) {
  CmSpec bad = default_spec(CmId::t_pbft);
  bad.params.primary_group_fraction = 0.0;
  EXPECT_THROW(expand(bad, 20), ValidityError);
  bad = default_spec(CmId::kraft);
  bad.params.leaders = 0;
  EXPECT_THROW(expand(bad, 20), ValidityError);
  EXPECT_THROW(expand(default_spec(CmId::pbft), 3), ValidityError);
}

TEST(Catalog, QuorumOverrideIsNoStricter) {
  for (auto id : {CmId::kraft, CmId::s_kraft, CmId::dpbft, CmId::s_nbft}) {
    CmSpec loose = default_spec(id);
    loose.params.shard_quorum = 0.6;
    for (int n : {20, 50, 90}) {
      EXPECT_GE(catalog_metrics(loose, base(n), kAir, 1.0).success, metrics_of(id, base(n)).success) << cm_name(id);
    }
  }
}

TEST(Catalog, CompositePlansAreConsistent) {
  for (const auto& info : kCmTable) {
    for (auto mux : {Multiplexing::fd, Multiplexing::td}) {
      const auto c = base(30, 0.8, 0.9, mux);
      const auto comp = expand(default_spec(info.id), 30);
      const auto plan = build_composite_plan(comp, c, kAir);
      std::int64_t messages = 0;
      for (const auto& step : plan.steps) {
        for (const auto& p : step) {
          EXPECT_TRUE(check_plan(p).empty()) << info.name;
          messages += active_messages(p);
        }
      }
      EXPECT_EQ(messages, composite_metrics(comp, c, kAir, 1.0).overhead) << info.name;
    }
  }
}

TEST(Catalog, CompositeMonteCarloWithinThreeSigma) {
  for (auto id : {CmId::st_pbft, CmId::s_dpbft, CmId::nbft, CmId::sth_raft, CmId::kraft, CmId::svssb_raft}) {
    const auto c = base(24);
    const auto comp = expand(default_spec(id), 24);
    const auto est = estimate_composite_success(comp, build_composite_plan(comp, c, kAir), 30000, 5);
    const double want = composite_metrics(comp, c, kAir, 1.0).success;
    const double sigma = std::sqrt(want * (1 - want) / 30000.0);
    EXPECT_LE(std::abs(est.estimate - want), 3 * sigma + 1e-12) << cm_name(id);
  }
}

TEST(Catalog, TdLatencyIsNoSmallerThanFd) {
  for (const auto& info : kCmTable) {
    for (int n : {8, 33, 80}) {
      EXPECT_GE(metrics_of(info.id, base(n, 0.8, 0.9, Multiplexing::td)).latency,
                metrics_of(info.id, base(n)).latency * (1 - 1e-12))
          << info.name;
    }
  }
}
