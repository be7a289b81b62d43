#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fixtures.hpp"
#include "gridflex/error.hpp"
#include "gridflex/markets.hpp"
#include "gridflex/scenario.hpp"
#include "gridflex/worlds.hpp"

using namespace gridflex;
using fixtures::Builder;

namespace {

namespace chr = std::chrono;

// One node, every day of `year` drawn from `shape(day_index, hour)`.
DemandData year_of(int year, double (*shape)(long, int)) {
  DemandData d;
  d.first_year = year;
  d.nodes = {1, 2};
  const auto days = (chr::sys_days{chr::year{year + 1} / 1 / 1} - chr::sys_days{chr::year{year} / 1 / 1}).count();
  d.mw.assign(2, {});
  for (long day = 0; day < days; ++day)
    for (int h = 0; h < 24; ++h) {
      d.mw[0].push_back(shape(day, h));
      d.mw[1].push_back(0.5 * shape(day, h));
    }
  return d;
}

double flat_shape(long, int h) { return 10.0 + h; }
double alternating_shape(long day, int h) { return day % 2 == 0 ? 20.0 + h : 5.0 + 0.5 * h; }

double weight_sum(const std::vector<RepresentativeDay>& days) {
  return std::accumulate(days.begin(), days.end(), 0.0, [](double s, const auto& d) { return s + d.weight; });
}

Network two_sided() {
  Builder b;
  b.op("T", OperatorType::TSO).op("D", OperatorType::DSO);
  b.node(1, "T", 10.0).node(2, "D", 10.0);
  b.line("b12", 1, 2, 0.1, 100.0);
  b.sub("S1", 1, 2, "b12");
  b.gen("g1", 1, 100.0, 20.0);
  Fsp t;
  t.id = "ft";
  t.node = 1;
  t.cap_up = t.cap_down = {4.0};
  t.bid = 30.0;
  Fsp d = t;
  d.id = "fd";
  d.node = 2;
  b.net.fsps = {t, d};
  return b.net;
}

}  // namespace

TEST(DemandCsv, ParsesHeaderAndRows) {
  std::istringstream in(
      "timestamp,node,mw\n"
      "2023-01-01T00:00,1,5.5\n2023-01-01T00:00,2,1\n"
      "2023-01-01T01:00,2,2\n2023-01-01T01:00,1,6\n");
  const DemandData d = read_demand_csv(in);
  EXPECT_EQ(d.first_year, 2023);
  EXPECT_EQ(d.first_month, 1);
  EXPECT_EQ(d.first_day, 1);
  ASSERT_EQ(d.nodes, (std::vector<int>{1, 2}));
  EXPECT_EQ(d.hours(), 2u);
  EXPECT_DOUBLE_EQ(d.mw[0][1], 6.0);
  EXPECT_DOUBLE_EQ(d.mw[1][0], 1.0);
}

TEST(DemandCsv, RejectsGapsAndBadValues) {
  std::istringstream gap("2023-01-01T00:00,1,5\n2023-01-01T02:00,1,5\n");
  EXPECT_THROW(read_demand_csv(gap), Error);
  std::istringstream negative("2023-01-01T00:00,1,-5\n");
  EXPECT_THROW(read_demand_csv(negative), Error);
  std::istringstream stamp("2023-13-01T00:00,1,5\n");
  EXPECT_THROW(read_demand_csv(stamp), Error);
  std::istringstream missing("2023-01-01T00:00,1,5\n2023-01-01T00:00,2,5\n2023-01-01T01:00,1,5\n");
  EXPECT_THROW(read_demand_csv(missing), Error);
}

TEST(Seasons, CalendarQuarters) {
  EXPECT_EQ(season_of_month(12), Season::Winter);
  EXPECT_EQ(season_of_month(2), Season::Winter);
  EXPECT_EQ(season_of_month(3), Season::Spring);
  EXPECT_EQ(season_of_month(8), Season::Summer);
  EXPECT_EQ(season_of_month(11), Season::Autumn);
}

TEST(Clustering, ShortDataIsInsufficient) {
  DemandData d = year_of(2023, flat_shape);
  for (auto& row : d.mw) row.resize(364 * 24);
  try {
    cluster_representative_days(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(Clustering, IdenticalDaysSplitTheSeason) {
  const auto days = cluster_representative_days(year_of(2023, flat_shape));
  ASSERT_EQ(days.size(), 8u);
  for (std::size_t s = 0; s < 8; s += 2) {
    const auto& hi = days[s];
    const auto& lo = days[s + 1];
    EXPECT_EQ(hi.level, LoadLevel::High);
    EXPECT_EQ(lo.level, LoadLevel::Low);
    EXPECT_EQ(hi.mw, lo.mw);
    EXPECT_LE(std::abs(hi.weight - lo.weight), 1.0);
    for (int h = 0; h < 24; ++h) EXPECT_DOUBLE_EQ(hi.mw[0][h], 10.0 + h);
  }
  EXPECT_DOUBLE_EQ(weight_sum(days), 365.0);
  EXPECT_EQ(days[0].label, "winter_high");
  EXPECT_EQ(days[7].label, "autumn_low");
}

TEST(Clustering, AlternatingShapesRecoverCentroidsAndCounts) {
  const DemandData data = year_of(2023, alternating_shape);
  const auto days = cluster_representative_days(data);
  ASSERT_EQ(days.size(), 8u);
  const chr::sys_days start{chr::year{2023} / 1 / 1};
  for (std::size_t s = 0; s < 4; ++s) {
    double even = 0, odd = 0;
    for (long d = 0; d < 365; ++d) {
      const chr::year_month_day ymd{start + chr::days{d}};
      if (season_of_month(static_cast<int>(static_cast<unsigned>(ymd.month()))) != days[2 * s].season) continue;
      (d % 2 == 0 ? even : odd) += 1;
    }
    EXPECT_DOUBLE_EQ(days[2 * s].weight, even);
    EXPECT_DOUBLE_EQ(days[2 * s + 1].weight, odd);
    for (int h = 0; h < 24; ++h) {
      EXPECT_DOUBLE_EQ(days[2 * s].mw[0][h], alternating_shape(0, h));
      EXPECT_DOUBLE_EQ(days[2 * s + 1].mw[0][h], alternating_shape(1, h));
      EXPECT_DOUBLE_EQ(days[2 * s].mw[1][h], 0.5 * alternating_shape(0, h));
    }
    EXPECT_DOUBLE_EQ(days[2 * s].profile[0][23], 1.0);
  }
  EXPECT_DOUBLE_EQ(weight_sum(days), 365.0);
}

TEST(Clustering, LeapYearWeightsSumToYearLength) {
  const auto days = cluster_representative_days(year_of(2024, alternating_shape));
  EXPECT_NEAR(weight_sum(days), 365.0, 1.0);
}

TEST(Clustering, DayTypeSplitSeparatesWeekends) {
  ClusterOptions opts;
  opts.split_by_day_type = true;
  const auto days = cluster_representative_days(year_of(2023, flat_shape), opts);
  EXPECT_DOUBLE_EQ(weight_sum(days), 365.0);
  // Winter 2023: Jan + Feb + Dec hold 90 days, 27 of them on weekends.
  EXPECT_DOUBLE_EQ(days[0].weight, 63.0);
  EXPECT_DOUBLE_EQ(days[1].weight, 27.0);
}

TEST(Clustering, SyntheticYearIsDeterministicAndPositive) {
  const Network net = worlds::desk_instance(3);
  const auto a = cluster_representative_days(worlds::synthetic_year(net, 2023, 7));
  const auto b = cluster_representative_days(worlds::synthetic_year(net, 2023, 7));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t d = 0; d < a.size(); ++d) {
    EXPECT_EQ(a[d].mw, b[d].mw);
    EXPECT_EQ(a[d].weight, b[d].weight);
    for (const auto& row : a[d].profile)
      for (double v : row) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
  }
}

TEST(Imbalances, ZeroVolumeGivesZeroSeries) {
  const Network net = two_sided();
  const auto da = clear_day_ahead(net);
  const auto imb = synthesize_imbalances(net, {da}, {365.0}, 0.0, 1);
  ASSERT_EQ(imb.size(), 1u);
  for (int h = 0; h < 24; ++h) EXPECT_EQ(imb[0].total(h), 0.0);
}

TEST(Imbalances, SingleGeneratorScalesToVolumeOverWeight) {
  const Network net = two_sided();
  const auto da = clear_day_ahead(net);
  const double volume = 7300.0;
  const auto imb = synthesize_imbalances(net, {da}, {365.0}, volume, 1);
  double abs_sum = 0.0;
  for (double v : imb[0].by_generator.at(0)) abs_sum += std::abs(v);
  EXPECT_NEAR(abs_sum, volume / 365.0, 1e-9);
}

TEST(Imbalances, HalfDeficitHalfSurplus) {
  const Network net = worlds::desk_instance(2);
  const auto da = clear_day_ahead(net);
  for (const auto pattern : {ImbalancePattern::Alternating, ImbalancePattern::Random}) {
    const auto imb = synthesize_imbalances(net, {da, da}, {200.0, 165.0}, 50000.0, 11, pattern);
    double weighted = 0.0;
    for (std::size_t d = 0; d < 2; ++d) {
      int deficit = 0, surplus = 0;
      for (int h = 0; h < 24; ++h) {
        const double t = imb[d].total(h);
        if (t > 0) ++deficit;
        if (t < 0) ++surplus;
      }
      EXPECT_LE(std::abs(deficit - surplus), 1);
      EXPECT_EQ(deficit + surplus, 24);
      double day_abs = 0.0;
      for (const auto& row : imb[d].by_generator)
        for (double v : row) day_abs += std::abs(v);
      weighted += (d == 0 ? 200.0 : 165.0) * day_abs;
    }
    EXPECT_NEAR(weighted, 50000.0, 50000.0 * 1e-9);
  }
}

TEST(Imbalances, ProportionalToDispatchAndDeterministic) {
  const Network net = worlds::desk_instance(5);
  const auto da = clear_day_ahead(net);
  const auto a = synthesize_imbalances(net, {da}, {365.0}, 9000.0, 4, ImbalancePattern::Random);
  const auto b = synthesize_imbalances(net, {da}, {365.0}, 9000.0, 4, ImbalancePattern::Random);
  EXPECT_EQ(a[0].by_generator, b[0].by_generator);
  double ratio = 0.0;
  for (std::size_t g = 0; g < da.qda.size(); ++g)
    for (int h = 0; h < 24; ++h) {
      if (da.qda[g][h] <= 0.0) {
        EXPECT_EQ(a[0].by_generator[g][h], 0.0);
        continue;
      }
      const double r = std::abs(a[0].by_generator[g][h]) / da.qda[g][h];
      if (ratio == 0.0) ratio = r;
      EXPECT_NEAR(r, ratio, 1e-12);
    }
}

TEST(Imbalances, NothingDispatchedIsAnError) {
  Builder b;
  b.op("T", OperatorType::TSO).node(1, "T", 0.0).gen("g", 1, 10.0, 5.0);
  const auto da = clear_day_ahead(b.net);
  try {
    synthesize_imbalances(b.net, {da}, {365.0}, 10.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroDispatch);
  }
}

TEST(Sensitivity, IdentityIsBitForBit) {
  const Network net = worlds::desk_instance(1);
  const Network out = apply_sensitivity(net, {});
  std::ostringstream a, b;
  write_network(net, a);
  write_network(out, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sensitivity, ZeroSizeRemovesDistributionFlexibility) {
  const Network net = two_sided();
  const Network out = apply_sensitivity(net, {0.0, 1.0, 1.0});
  EXPECT_EQ(out.fsps[0].cap_up, net.fsps[0].cap_up);
  for (double v : out.fsps[1].cap_up) EXPECT_EQ(v, 0.0);
  for (double v : out.fsps[1].cap_down) EXPECT_EQ(v, 0.0);
}

TEST(Sensitivity, DemandAndBidScaleOnlyDistribution) {
  const Network net = two_sided();
  const Network out = apply_sensitivity(net, {1.0, 1.5, 2.0});
  EXPECT_DOUBLE_EQ(out.nodes[1].demand[5], 20.0);
  EXPECT_DOUBLE_EQ(out.nodes[0].demand[5], 10.0);
  EXPECT_DOUBLE_EQ(out.fsps[0].bid, 30.0);
  EXPECT_DOUBLE_EQ(out.fsps[1].bid, 45.0);
  EXPECT_EQ(out.generators.front().capacity, net.generators.front().capacity);
}

TEST(Sensitivity, NegativeFactorRejected) {
  EXPECT_THROW(apply_sensitivity(two_sided(), {-0.1, 1.0, 1.0}), Error);
}

TEST(Sensitivity, DefaultGrids) {
  const auto size = default_fsp_size_grid();
  ASSERT_EQ(size.size(), 16u);
  EXPECT_EQ(size.front(), 0.0);
  EXPECT_EQ(size[1], 0.2);
  EXPECT_EQ(size.back(), 3.0);
  EXPECT_EQ(default_fsp_bid_grid(), size);
  const auto demand = default_demand_grid();
  ASSERT_EQ(demand.size(), 13u);
  EXPECT_EQ(demand.front(), 0.8);
  EXPECT_EQ(demand[1], 0.9);
  EXPECT_EQ(demand.back(), 2.0);
}

TEST(Replication, EmptyAdditionsAreIdentity) {
  const Network net = worlds::replication_base();
  std::ostringstream a, b;
  write_network(net, a);
  write_network(inject_replication(net, {}), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Replication, RejectsTransmissionAndMissingNodes) {
  const Network net = worlds::replication_base();
  Replication r = worlds::replication_wind_farms();
  r.generators[0].node = 1;
  try {
    inject_replication(net, r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNode);
  }
  r.generators[0].node = 999;
  EXPECT_THROW(inject_replication(net, r), Error);
}

TEST(Replication, WindFarmsRaiseLocalDispatchAndCutImports) {
  const Network base = worlds::replication_base();
  const Network with = inject_replication(base, worlds::replication_wind_farms());
  ASSERT_EQ(with.generators.size(), base.generators.size() + 2);
  EXPECT_TRUE(with.generators.back().is_res);
  const auto da0 = clear_day_ahead(base);
  const auto da1 = clear_day_ahead(with);
  double local0 = 0.0, local1 = 0.0;
  for (int h = 0; h < 24; ++h) {
    local0 += da0.dispatch_at(32, h) + da0.dispatch_at(34, h);
    local1 += da1.dispatch_at(32, h) + da1.dispatch_at(34, h);
  }
  EXPECT_GT(local1, local0);

  MarketOptions opts;
  const auto imb0 = zero_imbalances(base, da0);
  const auto imb1 = zero_imbalances(with, da1);
  const auto r0 = run_scheme(Scheme::MLOpfJoint, base, da0, build_offers(base, da0, opts), imb0, opts);
  const auto r1 = run_scheme(Scheme::MLOpfJoint, with, da1, build_offers(with, da1, opts), imb1, opts);
  double import0 = 0.0, import1 = 0.0;
  for (int h = 0; h < 24; ++h) {
    import0 += r0.markets.front().interfaces.front().p_subs[h];
    import1 += r1.markets.front().interfaces.front().p_subs[h];
  }
  EXPECT_LT(import1, import0);
}
