#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "sbc/catalog.hpp"
#include "sbc/sr_channel.hpp"

using namespace sbc;

namespace {

constexpr std::uint64_t kSeed = 0x5b0c2024;

struct RandomConfig {
  std::mt19937_64 gen{kSeed};

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }

  ConsensusConfig next(CmId cm) {
    ConsensusConfig c;
    c.cm = cm;
    c.n = integer(min_nodes(cm_family(cm)), 100);
    c.p_s = uniform(0.3, 0.999);
    c.p_e = uniform(c.p_s, 1.0);
    c.multiplexing = integer(0, 1) ? Multiplexing::fd : Multiplexing::td;
    return c;
  }
};

}  // namespace

TEST(Properties, SuccessStaysInUnitIntervalAndRisesWithEnhancedLinks) {
  RandomConfig rc;
  const Airtimes air{1.2e-3, 0.9e-3};
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    for (const auto& info : kCmTable) {
      auto c = rc.next(info.id);
      const double s = catalog_metrics(default_spec(info.id), c, air, 1.0).success;
      ASSERT_GE(s, 0.0) << info.name << " n=" << c.n;
      ASSERT_LE(s, 1.0) << info.name << " n=" << c.n;
      if (info.symbiotic) {
        auto better = c;
        better.p_e = std::min(1.0, c.p_e + 0.5 * (1.0 - c.p_e));
        EXPECT_GE(catalog_metrics(default_spec(info.id), better, air, 1.0).success, s - 1e-12)
            << info.name << " n=" << c.n << " p_e=" << c.p_e;
      }
      ++checked;
    }
  }
  EXPECT_GE(checked, 500);
}

TEST(Properties, BaselineRisesWithSingleLinkReliability) {
  RandomConfig rc;
  for (int i = 0; i < 300; ++i) {
    for (auto cm : {CmId::pbft, CmId::raft}) {
      auto c = rc.next(cm);
      auto better = c;
      better.p_s = std::min(1.0, c.p_s + 0.05);
      EXPECT_GE(success(better), success(c) - 1e-12) << cm_name(cm) << " n=" << c.n;
    }
  }
}

TEST(Properties, QFunctionSymmetryAndMonotonicity) {
  RandomConfig rc;
  double prev = 1.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double q = q_function(x);
    EXPECT_NEAR(q + q_function(-x), 1.0, 1e-12);
    EXPECT_LE(q, prev);
    prev = q;
  }
  for (int i = 0; i < 500; ++i) {
    const double p = rc.uniform(1e-9, 1.0 - 1e-9);
    EXPECT_NEAR(q_function(q_inverse(p)), p, 1e-12 * std::max(1.0, 1.0 / p));
  }
}

// d(arg)/dL >= 0 for every L >= 1 iff (C - R) / B >= max_L (ln L - 2) / (2 ln2 L),
// attained at L = e^3. Below that gap the log term makes P dip over a window of L.
const double kMonotoneGap = 1.0 / (2.0 * std::numbers::ln2 * std::exp(3.0));

TEST(Properties, LinkSuccessRisesWithAirtimeAndCapacity) {
  RandomConfig rc;
  for (int i = 0; i < 500; ++i) {
    LinkBudget lb;
    lb.rate_bps = rc.uniform(10e3, 200e3);
    lb.capacity_bps = lb.rate_bps + lb.bandwidth_hz * rc.uniform(kMonotoneGap, 0.5);
    lb.enhanced_capacity_bps = lb.capacity_bps;
    const double t = rc.uniform(1e-6, 1e-2);
    const double p = link_success_prob(t, lb, false);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_GE(link_success_prob(t * 1.5, lb, false), p);
    auto richer = lb;
    richer.capacity_bps *= 1.2;
    EXPECT_GE(link_success_prob(t, richer, false), p);
  }
}

TEST(Properties, LinkSuccessDipsBelowTheMonotoneGap) {
  LinkBudget lb;
  lb.rate_bps = 10e3;
  lb.capacity_bps = lb.rate_bps + lb.bandwidth_hz * 0.5 * kMonotoneGap;
  lb.enhanced_capacity_bps = lb.capacity_bps;
  const double t = std::exp(3.0) / lb.bandwidth_hz;  // L = e^3
  EXPECT_LT(link_success_prob(2.0 * t, lb, false), link_success_prob(t, lb, false));
}

TEST(Properties, LinkSuccessRisesWithCapacityAnywhere) {
  RandomConfig rc;
  for (int i = 0; i < 500; ++i) {
    LinkBudget lb;
    lb.rate_bps = rc.uniform(10e3, 200e3);
    lb.capacity_bps = lb.rate_bps * rc.uniform(1.001, 3.0);
    lb.enhanced_capacity_bps = lb.capacity_bps;
    const double t = rc.uniform(1e-6, 1e-2);
    auto richer = lb;
    richer.capacity_bps *= rc.uniform(1.0, 1.5);
    EXPECT_GE(link_success_prob(t, richer, false), link_success_prob(t, lb, false));
  }
}

TEST(Properties, OmegaVanishesExactlyWithoutBackscatter) {
  RandomConfig rc;
  for (int i = 0; i < 500; ++i) {
    const double gd = rc.uniform(0.1, 100.0);
    const int m = rc.integer(1, 8);
    EXPECT_EQ(ChannelParams(gd, 0.0, m).omega(), 0.0);
    EXPECT_GT(ChannelParams(gd, rc.uniform(1e-6, 10.0), m).omega(), 0.0);
  }
}

TEST(Properties, EnhancedAirtimeIsShorter) {
  RandomConfig rc;
  for (int i = 0; i < 200; ++i) {
    const ChannelParams params(rc.uniform(1.0, 50.0), rc.uniform(0.01, 5.0));
    const auto lb = paper_link_budget(params);
    const auto a = airtimes_at(rc.uniform(0.6, 0.999), lb);
    EXPECT_LT(a.enhanced, a.plain);
  }
}

TEST(Properties, SpbftEnergyIsOverheadTimesEnhancedBroadcast) {
  const Airtimes air{1.2e-3, 0.9e-3};
  for (int n = 4; n <= 100; ++n) {
    ConsensusConfig c;
    c.cm = CmId::s_pbft;
    c.n = n;
    const auto t = PhaseTimings::for_nodes(n, air);
    EXPECT_NEAR(energy(c, t, 1.0) / t.t3, static_cast<double>(overhead(c)), 1e-9 * overhead(c));
  }
}

TEST(Properties, CompositeBookkeeping) {
  // Overhead and energy add across stages; FD latency never exceeds TD latency.
  RandomConfig rc;
  const Airtimes air{1.2e-3, 0.9e-3};
  for (int i = 0; i < 40; ++i) {
    for (const auto& info : kCmTable) {
      auto c = rc.next(info.id);
      const auto comp = expand(default_spec(info.id), c.n);
      std::int64_t msgs = 0;
      double joules = 0.0, serial = 0.0;
      for (const auto& step : comp.steps) {
        for (const auto& st : step.stages) {
          const auto m = stage_metrics(st, info.symbiotic, c, air, 1.0);
          msgs += m.overhead;
          joules += m.energy;
          serial += m.latency;
        }
      }
      const auto total = composite_metrics(comp, c, air, 1.0);
      EXPECT_EQ(total.overhead, msgs) << info.name;
      EXPECT_NEAR(total.energy, joules, 1e-12 * joules) << info.name;
      EXPECT_LE(total.latency, serial * (1 + 1e-12)) << info.name;
    }
  }
}

TEST(Properties, StricterTargetsNeedLongerAirtime) {
  RandomConfig rc;
  const auto lb = paper_link_budget(ChannelParams(10.0, 1.0));
  for (int i = 0; i < 200; ++i) {
    const double lo = rc.uniform(0.6, 0.99);
    const double hi = rc.uniform(lo, 0.999);
    EXPECT_LE(invert_latency(lo, lb, false), invert_latency(hi, lb, false) * (1 + 1e-12));
  }
}
