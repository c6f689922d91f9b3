#include <gtest/gtest.h>

#include "sbc/catalog.hpp"
#include "sbc/plan.hpp"

using namespace sbc;

namespace {

const Airtimes kAir{1.2e-3, 0.9e-3};

ConsensusConfig cfg(CmId cm, int n, Multiplexing mux = Multiplexing::fd) {
  ConsensusConfig c;
  c.cm = cm;
  c.n = n;
  c.multiplexing = mux;
  return c;
}

}  // namespace

TEST(SpbftPlan, PrePrepareRoundAtFour) {
  const auto plan = build_phase_plan(cfg(CmId::s_pbft, 4), kAir);
  int enhanced = 0, gain = 0;
  for (const auto& l : plan.links) {
    if (l.phase != 0) continue;
    if (l.kind == LinkKind::active_enhanced && l.sender == 0) ++enhanced;
    if (l.gain() && l.sender != 0 && l.receiver != 0) ++gain;
  }
  EXPECT_EQ(enhanced, 3);
  EXPECT_EQ(gain, 3);
  EXPECT_EQ(active_messages(plan), 15);
}

TEST(SpbftPlan, GainLinksFollowTheCyclicRoleTable) {
  // Replica i scatters toward replica i-1, wrapping within 1..n-1.
  const int n = 7;
  const auto plan = build_phase_plan(cfg(CmId::s_pbft, n), kAir);
  for (const auto& l : plan.links) {
    if (!l.gain()) continue;
    EXPECT_EQ(l.receiver, l.sender == 1 ? n - 1 : l.sender - 1);
    EXPECT_EQ(l.sender_role, Role::STx);
    EXPECT_EQ(l.receiver_role, Role::PRx);
  }
}

TEST(SpbftPlan, PhaseCensus) {
  for (int n = 4; n <= 50; ++n) {
    const std::int64_t nn = n;
    const auto c = census(build_phase_plan(cfg(CmId::s_pbft, n), kAir));
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].active_enhanced, nn - 1);
    EXPECT_EQ(c[0].backscatter, 0);
    EXPECT_EQ(c[1].backscatter, nn - 1);
    EXPECT_EQ(c[1].active_enhanced, nn * nn - 3 * nn + 2);
    EXPECT_EQ(c[2].backscatter, 2 * nn - 2);
    EXPECT_EQ(c[2].active_enhanced, nn * nn - 3 * nn + 2);
    EXPECT_EQ(c[3].backscatter, nn);
    EXPECT_EQ(c[3].active(), 0);
  }
}

TEST(SraftPlan, Census) {
  for (int n = 3; n <= 50; ++n) {
    const auto c = census(build_phase_plan(cfg(CmId::s_raft, n), kAir));
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].active_enhanced, n - 1);
    EXPECT_EQ(c[1].backscatter, n - 1);
    EXPECT_EQ(c[1].active(), 1);
  }
}

TEST(Plans, CensusEqualsOverhead) {
  for (int n = 4; n <= 50; ++n) {
    for (auto cm : {CmId::pbft, CmId::s_pbft, CmId::raft, CmId::s_raft}) {
      EXPECT_EQ(active_messages(build_phase_plan(cfg(cm, n), kAir)), overhead(cfg(cm, n))) << cm_name(cm) << n;
    }
  }
}

TEST(Plans, LatencyAndEnergyEqualClosedForms) {
  for (int n = 4; n <= 50; ++n) {
    const auto t = PhaseTimings::for_nodes(n, kAir);
    for (auto cm : {CmId::pbft, CmId::s_pbft, CmId::raft, CmId::s_raft}) {
      for (auto mux : {Multiplexing::fd, Multiplexing::td}) {
        const auto c = cfg(cm, n, mux);
        const auto plan = build_phase_plan(c, kAir);
        EXPECT_NEAR(plan_latency(plan), latency(c, t), 1e-12 * latency(c, t)) << cm_name(cm) << n;
        EXPECT_NEAR(plan_energy(plan, 2.0), energy(c, t, 2.0), 1e-12 * energy(c, t, 2.0)) << cm_name(cm) << n;
      }
    }
  }
}

TEST(Plans, ChannelsAndConflicts) {
  for (int n = 4; n <= 40; ++n) {
    for (auto cm : {CmId::pbft, CmId::s_pbft, CmId::raft, CmId::s_raft}) {
      const auto fd = build_phase_plan(cfg(cm, n), kAir);
      const auto td = build_phase_plan(cfg(cm, n, Multiplexing::td), kAir);
      EXPECT_TRUE(check_plan(fd).empty()) << cm_name(cm) << n;
      EXPECT_TRUE(check_plan(td).empty()) << cm_name(cm) << n;
      EXPECT_LE(channel_count(fd), n);
      EXPECT_EQ(channel_count(td), 1);
    }
  }
}

TEST(Plans, TdSerializesBroadcasts) {
  const int n = 6;
  const auto plan = build_phase_plan(cfg(CmId::s_pbft, n, Multiplexing::td), kAir);
  std::set<int> prepare_slots, commit_slots;
  for (const auto& l : plan.links) {
    if (l.phase == 1 && l.message()) prepare_slots.insert(l.slot);
    if (l.phase == 2 && l.message()) commit_slots.insert(l.slot);
  }
  EXPECT_EQ(prepare_slots.size(), static_cast<std::size_t>(n - 1));
  EXPECT_EQ(commit_slots.size(), static_cast<std::size_t>(n));
}

TEST(Plans, ConflictCheckerFlagsSharedBand) {
  auto plan = build_phase_plan(cfg(CmId::pbft, 5), kAir);
  for (auto& l : plan.links) {
    if (l.phase == 1) l.channel = 0;
  }
  const auto v = check_plan(plan);
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v.front().what, "two broadcasting senders share a band");
}

TEST(Plans, UnsupportedMechanism) {
  EXPECT_THROW(build_phase_plan(cfg(CmId::kraft, 10), kAir), CatalogError);
  EXPECT_THROW(build_phase_plan(cfg(CmId::s_pbft, 3), kAir), DegenerateNetwork);
}

TEST(Plans, DumpFormatGolden) {
  const std::string want =
      "# plan S-RAFT n=3 FD\n"
      "downlink 0 0 1 active_enhanced PTx>PRx fb2\n"
      "downlink 0 0 2 active_enhanced PTx>PRx fb1\n"
      "downlink 0 2 1 backscatter STx>PRx fb2\n"
      "downlink 0 1 2 backscatter STx>PRx fb1\n"
      "uplink 0 1 0 backscatter STx>SRx fb0\n"
      "uplink 0 2 0 backscatter STx>SRx fb0\n"
      "uplink 0 0 3 active_enhanced PTx>PRx fb0\n";
  EXPECT_EQ(dump_plan(build_phase_plan(cfg(CmId::s_raft, 3), kAir)), want);
}

TEST(Plans, DumpShowsTimeSlotsInTd) {
  const auto text = dump_plan(build_phase_plan(cfg(CmId::pbft, 4, Multiplexing::td), kAir));
  EXPECT_NE(text.find("prepare 0 3 2 active_plain PTx>PRx ts2"), std::string::npos) << text;
  EXPECT_EQ(text.find(" fb"), std::string::npos);
}

TEST(RelayPlan, CensusLatencyEnergyMatchShape) {
  for (int n = 4; n <= 40; ++n) {
    for (bool sym : {false, true}) {
      const RaftShape shape{n, two_hop_count(n, 0.2), sym};
      for (auto mux : {Multiplexing::fd, Multiplexing::td}) {
        const auto plan = build_raft_plan(shape, sym ? CmId::sth_raft : CmId::th_raft, mux, kAir);
        EXPECT_EQ(active_messages(plan), raft_shape_overhead(shape));
        EXPECT_NEAR(plan_latency(plan), raft_shape_latency(shape, kAir, mux), 1e-12 * plan_latency(plan)) << n << sym;
        EXPECT_NEAR(plan_energy(plan, 1.0), raft_shape_energy(shape, kAir, 1.0), 1e-12 * plan_energy(plan, 1.0)) << n << sym;
        EXPECT_TRUE(check_plan(plan).empty());
      }
    }
  }
}
