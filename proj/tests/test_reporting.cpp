#include <gtest/gtest.h>

#include "pedf/reporting.hpp"
#include "pedf/scenarios.hpp"

using namespace pedf;

TEST(OnThresholdCrossing, DropBelow75ReportsCaseIIIToEveryPredecessor) {
  const auto t = build_fig1_scenario();
  const NodeId n3 = t.at("3");
  const auto drop = consume({76.0, true}, 2.0);
  ASSERT_EQ(drop.crossings.size(), 1u);
  const auto msgs = on_threshold_crossing(t, n3, drop.crossings.back(), 100.0);
  ASSERT_EQ(msgs.size(), t.predecessors(n3).size());
  std::vector<NodeId> receivers;
  for (const auto& m : msgs) {
    EXPECT_EQ(m.sender, n3);
    EXPECT_EQ(m.reported_band, EnergyBand::CaseIII);
    EXPECT_EQ(m.sent_at_ms, 100.0);
    receivers.push_back(m.receiver);
  }
  EXPECT_EQ(receivers, (std::vector<NodeId>{t.at("2"), t.at("D")}));
}

TEST(OnThresholdCrossing, RiseAbove25ReportsCaseII) {
  const auto t = build_fig1_scenario();
  EnergyParams p;
  p.replenish_rate = 1.0;
  const auto up = replenish({24.0, true}, 2.0, p);
  const auto msgs = on_threshold_crossing(t, t.at("3"), up.crossings.back(), 5.0);
  ASSERT_FALSE(msgs.empty());
  for (const auto& m : msgs) EXPECT_EQ(m.reported_band, EnergyBand::CaseII);
}

TEST(OnThresholdCrossing, NoCrossingNoMessages) {
  const auto u = consume({60.0, true}, 1.0);
  EXPECT_TRUE(u.crossings.empty());
  // The engine only calls on_threshold_crossing per crossing; none here.
}

TEST(NeighborEnergyView, StartsAtCaseIVForEveryNeighbor) {
  const auto t = build_fig1_scenario();
  NeighborEnergyView v(t, t.at("2"));
  EXPECT_EQ(v.entries().size(), t.neighbors(t.at("2")).size());
  for (const auto& [n, e] : v.entries()) EXPECT_EQ(e.band, EnergyBand::CaseIV);
  EXPECT_THROW(v.band_of(t.at("D")), std::out_of_range);
}

TEST(ApplyReport, UpdatesEntry) {
  const auto t = build_fig1_scenario();
  const NodeId n2 = t.at("2"), n3 = t.at("3");
  NeighborEnergyView v(t, n2);
  auto updated = apply_report(v, {n3, n2, EnergyBand::CaseII, 10.0}, 12.0);
  EXPECT_EQ(updated.band_of(n3), EnergyBand::CaseII);
  EXPECT_EQ(updated.entry(n3).last_updated_ms, 12.0);
  EXPECT_EQ(v.band_of(n3), EnergyBand::CaseIV);  // value semantics
}

TEST(ApplyReport, DuplicateIsIdempotent) {
  const auto t = build_fig1_scenario();
  const NodeId n2 = t.at("2"), n3 = t.at("3");
  const ReportMessage msg{n3, n2, EnergyBand::CaseIII, 10.0, 4};
  auto once = apply_report(NeighborEnergyView(t, n2), msg, 10.0);
  auto twice = apply_report(once, msg, 15.0);
  EXPECT_EQ(once, twice);
}

TEST(ApplyReport, OutOfOrderDeliveryKeepsLatestSent) {
  const auto t = build_fig1_scenario();
  const NodeId n2 = t.at("2"), n3 = t.at("3");
  const ReportMessage early{n3, n2, EnergyBand::CaseIII, 10.0, 1};
  const ReportMessage late{n3, n2, EnergyBand::CaseII, 20.0, 2};
  auto a = apply_report(apply_report(NeighborEnergyView(t, n2), late, 25.0), early, 30.0);
  auto b = apply_report(apply_report(NeighborEnergyView(t, n2), early, 12.0), late, 25.0);
  EXPECT_EQ(a.band_of(n3), EnergyBand::CaseII);
  EXPECT_EQ(b.band_of(n3), EnergyBand::CaseII);
}

TEST(ApplyReport, SameTimestampOrderedBySequence) {
  const auto t = build_fig1_scenario();
  const NodeId n2 = t.at("2"), n3 = t.at("3");
  const ReportMessage first{n3, n2, EnergyBand::CaseIII, 10.0, 1};
  const ReportMessage second{n3, n2, EnergyBand::CaseII, 10.0, 2};
  auto a = apply_report(apply_report(NeighborEnergyView(t, n2), second, 10.0), first, 10.0);
  auto b = apply_report(apply_report(NeighborEnergyView(t, n2), first, 10.0), second, 10.0);
  EXPECT_EQ(a.band_of(n3), EnergyBand::CaseII);
  EXPECT_EQ(a.band_of(n3), b.band_of(n3));
}

TEST(ApplyReport, RejectsNonNeighborAndTimeTravel) {
  const auto t = build_fig1_scenario();
  const NodeId n2 = t.at("2");
  NeighborEnergyView v(t, n2);
  EXPECT_THROW(v.apply({t.at("D"), n2, EnergyBand::CaseI, 1.0}, 1.0), std::invalid_argument);
  EXPECT_THROW(v.apply({t.at("3"), n2, EnergyBand::CaseI, 5.0}, 4.0), std::invalid_argument);
}
