#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gridflex/error.hpp"
#include "gridflex/reporting.hpp"
#include "json.hpp"

using namespace gridflex;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::vector<DayInfo> eight_days() {
  std::vector<DayInfo> days;
  const double weights[] = {10, 80, 46, 46, 50, 42, 45, 46};
  int k = 0;
  for (const Season s : {Season::Winter, Season::Spring, Season::Summer, Season::Autumn})
    for (const LoadLevel l : {LoadLevel::High, LoadLevel::Low})
      days.push_back({to_string(s) + "_" + to_string(l), s, l, weights[k++]});
  return days;
}

CostReport cost(Scheme s, double local, double tso) {
  CostReport c;
  c.scheme = s;
  c.local = local;
  c.tso = tso;
  return c;
}

std::vector<CostReport> all_costs(double scale) {
  return {cost(Scheme::CommonJoint, 0, 11658e3 * scale),  cost(Scheme::CommonSeparate, 0, 11800e3 * scale),
          cost(Scheme::MLOpfJoint, 802e3, 11937e3 * scale), cost(Scheme::MLOpfSeparate, 810e3, 12000e3 * scale),
          cost(Scheme::MLPtdfJoint, 790e3, 11950e3 * scale), cost(Scheme::MLPtdfSeparate, 795e3, 12010e3 * scale)};
}

}  // namespace

TEST(FormatFixed, HalfAwayFromZeroWithoutNegativeZero) {
  EXPECT_EQ(format_fixed(2.5, 0), "3");
  EXPECT_EQ(format_fixed(-2.5, 0), "-3");
  EXPECT_EQ(format_fixed(-97.15, 1), "-97.2");
  EXPECT_EQ(format_fixed(0.125, 2), "0.13");
  EXPECT_EQ(format_fixed(-0.0001, 2), "0.00");
  EXPECT_EQ(format_fixed(1234567.0, 0), "1234567");
  EXPECT_EQ(format_fixed(1e-7, 6), "0.000000");
}

TEST(EnergyActivated, WeightMultipliesSingleActivation) {
  SchemeResult r;
  r.scheme = Scheme::CommonSeparate;
  MarketEnergy cm{"TSO", "common-cm", Product::CM, std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)};
  cm.up_mwh[0] = 1.0;  // 1 MW for one hour
  r.energy.push_back(cm);
  const auto t = emit_energy_activated(r, eight_days());
  ASSERT_EQ(t.columns.size(), 9u);
  EXPECT_EQ(t.columns.front(), "winter_high");
  EXPECT_EQ(t.columns.back(), "total");
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[2].product, "CM");
  EXPECT_EQ(t.rows[2].direction, "Up");
  EXPECT_NEAR(t.rows[2].gwh[0], 0.01, 1e-15);
  std::ostringstream os;
  write_csv(t, os);
  EXPECT_EQ(os.str(),
            "so,market,product,direction,winter_high,winter_low,spring_high,spring_low,summer_high,summer_low,"
            "autumn_high,autumn_low,total\n"
            "TSO,common-cm,All,Total,0.01,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.01\n"
            "TSO,common-cm,CM,Total,0.01,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.01\n"
            "TSO,common-cm,CM,Up,0.01,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.01\n"
            "TSO,common-cm,CM,Down,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00,0.00\n");
}

TEST(EnergyActivated, ZeroActivationsKeepStructure) {
  SchemeResult r;
  r.energy.push_back({"DSO", "lfm-opf@D", Product::Joint, std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)});
  r.energy.push_back({"TSO", "tso-joint", Product::Joint, std::vector<double>(8, 0.0), std::vector<double>(8, 0.0)});
  const auto t = emit_energy_activated(r, eight_days());
  ASSERT_EQ(t.rows.size(), 8u);
  for (const auto& row : t.rows)
    for (double v : row.gwh) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(t.rows[4].market, "tso-joint");
  EXPECT_EQ(t.rows[4].product, "All");
}

TEST(EnergyActivated, TotalsAggregateExactly) {
  SchemeResult r;
  MarketEnergy m{"TSO", "tso-b", Product::B, {}, {}};
  for (int d = 0; d < 8; ++d) {
    m.up_mwh.push_back(13.7 * (d + 1));
    m.down_mwh.push_back(4.1 * (8 - d));
  }
  r.energy.push_back(m);
  const auto days = eight_days();
  const auto t = emit_energy_activated(r, days);
  const auto& all = t.rows[0].gwh;
  const auto& up = t.rows[2].gwh;
  const auto& down = t.rows[3].gwh;
  double sum_up = 0.0;
  for (std::size_t d = 0; d < 8; ++d) {
    EXPECT_EQ(all[d], up[d] + down[d]);
    EXPECT_EQ(t.rows[1].gwh[d], all[d]);
    EXPECT_DOUBLE_EQ(up[d], days[d].weight * m.up_mwh[d] / 1000.0);
    sum_up += up[d];
  }
  EXPECT_EQ(up[8], sum_up);
  EXPECT_DOUBLE_EQ(all[8], up[8] + down[8]);
}

TEST(EnergyActivated, CsvRoundTripsWithinPrecisionAndJsonKeepsFullPrecision) {
  SchemeResult r;
  r.energy.push_back({"DSO", "lfm-ptdf@D", Product::Joint, {1.234, 5, 6, 7, 8, 9, 10, 11.987}, {0, 1, 2, 3, 4, 5, 6, 7}});
  const auto t = emit_energy_activated(r, eight_days());
  std::ostringstream csv;
  write_csv(t, csv, 3);
  const auto rows = parse_csv(csv.str());
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      EXPECT_NEAR(std::stod(rows[i + 1][4 + c]), t.rows[i].gwh[c], 0.5e-3 + 1e-12);
  std::ostringstream js;
  write_json(t, js);
  const auto j = nlohmann::json::parse(js.str());
  EXPECT_EQ(j.at("schema"), "gridflex.energy_activated/1");
  EXPECT_EQ(j.at("rows")[2].at("gwh")[0].get<double>(), t.rows[2].gwh[0]);
}

TEST(CostComparison, PercentDeltaExamples) {
  EXPECT_EQ(percent_delta(11658, 11369), -2.5);
  EXPECT_EQ(percent_delta(100, 100), 0.0);
  EXPECT_EQ(percent_delta(0, 0), 0.0);
  EXPECT_FALSE(percent_delta(0, 5).has_value());
  // (23 - 802) / 802 is -97.13%, which rounds to -97.1 at one decimal.
  EXPECT_EQ(percent_delta(802, 23), -97.1);
}

TEST(CostComparison, RowsAndGolden) {
  auto base = all_costs(1.0);
  auto repl = all_costs(11369.0 / 11658.0);
  repl[2].local = 23e3;
  const auto t = emit_cost_comparison({{"base", base}, {"replication", repl}});
  ASSERT_EQ(t.rows.size(), 8u);
  EXPECT_EQ(t.rows[0].label, "Common Joint");
  EXPECT_EQ(t.rows[2].label, "ML-OPF Local");
  EXPECT_EQ(t.rows[7].label, "ML-PTDF Separate");
  EXPECT_EQ(t.rows[0].delta_pct, -2.5);
  std::ostringstream os;
  write_csv(t, os);
  EXPECT_EQ(os.str(),
            "scheme,base_keur,replication_keur,delta_pct\n"
            "Common Joint,11658,11369,-2.5\n"
            "Common Separate,11800,11507,-2.5\n"
            "ML-OPF Local,802,23,-97.1\n"
            "ML-OPF Joint,11937,11641,-2.5\n"
            "ML-OPF Separate,12000,11703,-2.5\n"
            "ML-PTDF Local,790,790,0.0\n"
            "ML-PTDF Joint,11950,11654,-2.5\n"
            "ML-PTDF Separate,12010,11712,-2.5\n");
}

TEST(CostComparison, IdenticalScenariosGiveZeroDelta) {
  const auto t = emit_cost_comparison({{"a", all_costs(1.0)}, {"b", all_costs(1.0)}});
  for (const auto& r : t.rows) EXPECT_EQ(r.delta_pct, 0.0);
  std::ostringstream os;
  write_csv(t, os);
  for (const auto& row : parse_csv(os.str()))
    if (row[0] != "scheme") EXPECT_EQ(row.back(), "0.0");
}

TEST(CostComparison, CommonRowsIncludeLocalPart) {
  const auto t = emit_cost_comparison({{"only", {cost(Scheme::CommonJoint, 0, 5000), cost(Scheme::MLOpfSeparate, 300, 900)}}});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].keur[0], 5.0);
  EXPECT_EQ(t.rows[1].label, "ML-OPF Local");
  EXPECT_EQ(t.rows[1].keur[0], 0.3);
  EXPECT_EQ(t.rows[2].label, "ML-OPF Separate");
  EXPECT_FALSE(t.rows[0].delta_pct.has_value());
}

TEST(CostComparison, MissingSchemes) {
  try {
    emit_cost_comparison({{"empty", {}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingScheme);
  }
  try {
    emit_cost_comparison({{"a", all_costs(1.0)}, {"b", {cost(Scheme::CommonJoint, 0, 1)}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingScheme);
  }
}

TEST(CostComparison, JsonKeepsFullPrecision) {
  const auto t = emit_cost_comparison({{"a", {cost(Scheme::CommonJoint, 0, 1234.5678)}}});
  std::ostringstream os;
  write_json(t, os);
  const auto j = nlohmann::json::parse(os.str());
  EXPECT_EQ(j.at("rows")[0].at("keur")[0].get<double>(), 1.2345678);
  EXPECT_TRUE(j.at("rows")[0].at("delta_pct").is_null());
}

TEST(Surface, BoundaryFromThresholdScan) {
  const std::vector<double> xs{0.0, 0.2, 0.4};
  const std::vector<double> ys{0.8, 1.0, 1.2, 1.4, 1.6};
  std::vector<std::vector<std::optional<double>>> v(3, std::vector<std::optional<double>>(5, 0.0));
  v[0][2] = 3.0;
  v[0][4] = 7.0;
  v[1][3] = 1e-3;
  v[1][4] = 2.0;
  v[2][4] = 5e-7;
  const auto s = make_surface("fsp_size", "demand", "nsf", xs, ys, v);
  EXPECT_FALSE(s.flat);
  EXPECT_EQ(s.boundary[0], 1.2);
  EXPECT_EQ(s.boundary[1], 1.4);
  EXPECT_FALSE(s.boundary[2].has_value());
  std::ostringstream os;
  write_boundary_csv(s, os);
  EXPECT_EQ(os.str(), "fsp_size,boundary_demand\n0.000000,1.200000\n0.200000,1.400000\n0.400000,none\n");
}

TEST(Surface, AllZeroIsFlat) {
  const auto s = make_surface("fsp_size", "demand", "nsf", {0.0, 1.0}, {1.0}, {{0.0}, {0.0}});
  EXPECT_TRUE(s.flat);
  std::ostringstream os;
  write_boundary_csv(s, os);
  EXPECT_EQ(os.str(), "entire grid flat\n");
}

TEST(Surface, EmptyAxisIsAnError) {
  try {
    make_surface("fsp_size", "demand", "nsf", {}, {1.0}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  EXPECT_THROW(make_surface("fsp_size", "demand", "nsf", {1.0}, {}, {{}}), Error);
}

TEST(Surface, LongCsvAndMatrixGoldens) {
  const auto s = make_surface("fsp_size", "demand", "dso_cost", {0.0, 0.5}, {1.0, 2.0},
                              {{12.5, std::nullopt}, {0.0, 3.25}});
  std::ostringstream csv, mat;
  write_long_csv(s, csv, 2);
  write_gnuplot_matrix(s, mat, 2);
  EXPECT_EQ(csv.str(),
            "fsp_size,demand,dso_cost\n"
            "0.000000,1.000000,12.50\n"
            "0.000000,2.000000,\n"
            "0.500000,1.000000,0.00\n"
            "0.500000,2.000000,3.25\n");
  EXPECT_EQ(mat.str(), "2 0.000000 0.500000\n1.000000 12.50 0.00\n2.000000 NaN 3.25\n");
  EXPECT_EQ(csv.str().find('\r'), std::string::npos);
}

TEST(Surface, FromStudyResultWithHoles) {
  StudyResult r;
  r.schemes = {Scheme::MLPtdfJoint};
  for (double size : {0.0, 1.0})
    for (double demand : {1.0, 1.5}) {
      GridPoint p;
      p.scenario = "base";
      p.factors = {size, 1.0, demand};
      p.ok = !(size == 1.0 && demand == 1.5);
      SchemeResult sr;
      sr.scheme = Scheme::MLPtdfJoint;
      sr.annual_dso_nsf_mwh = demand > 1.0 ? 10.0 - 10.0 * size : 0.0;
      sr.annual_local_objective = 100.0 - 50.0 * size;
      if (p.ok) p.schemes.push_back(sr);
      r.points.push_back(p);
    }
  const auto nsf = emit_surface(r, SurfaceMetric::Nsf, Scheme::MLPtdfJoint, "fsp_size", "demand");
  EXPECT_EQ(nsf.xs, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(nsf.values[0][1], 10.0);
  EXPECT_FALSE(nsf.values[1][1].has_value());
  EXPECT_EQ(nsf.boundary[0], 1.5);
  EXPECT_FALSE(nsf.boundary[1].has_value());
  const auto cost = emit_surface(r, SurfaceMetric::DsoCost, Scheme::MLPtdfJoint, "fsp_size", "demand");
  EXPECT_EQ(cost.values[1][0], 50.0);
  EXPECT_THROW(emit_surface(r, SurfaceMetric::Nsf, Scheme::CommonJoint, "fsp_size", "demand"), Error);
  EXPECT_THROW(emit_surface(r, SurfaceMetric::Nsf, Scheme::MLPtdfJoint, "fsp_size", "fsp_bid"), Error);
  EXPECT_THROW(emit_surface(r, SurfaceMetric::Nsf, Scheme::MLPtdfJoint, "fsp_size", "demand", "other"), Error);
}

TEST(Mix, ReferenceTotalsRoundByLargestRemainder) {
  const auto t = emit_mix_report({{"thermal", 3}, {"hydro", 68}, {"nuclear", 43}, {"wind", 27}});
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].technology, "thermal");
  EXPECT_EQ(t.rows[0].percent, 2);
  EXPECT_EQ(t.rows[1].percent, 48);
  EXPECT_EQ(t.rows[2].percent, 31);
  EXPECT_EQ(t.rows[3].percent, 19);
  EXPECT_EQ(t.total_twh, 141.0);
  std::ostringstream os;
  write_csv(t, os);
  EXPECT_EQ(os.str(), "technology,twh,percent\nthermal,3,2\nhydro,68,48\nnuclear,43,31\nwind,27,19\ntotal,141,100\n");
}

TEST(Mix, SingleAndZero) {
  const auto one = emit_mix_report({{"hydro", 0.4}});
  EXPECT_EQ(one.rows[0].percent, 100);
  const auto zero = emit_mix_report({{"hydro", 0.0}, {"wind", 0.0}});
  for (const auto& r : zero.rows) EXPECT_EQ(r.percent, 0);
  std::ostringstream os;
  write_csv(zero, os);
  EXPECT_EQ(os.str(), "technology,twh,percent\nhydro,0,0\nwind,0,0\ntotal,0,0\n");
}

TEST(Mix, PercentagesAlwaysSumToHundred) {
  for (int seed = 1; seed < 200; ++seed) {
    std::map<std::string, double> twh;
    double v = seed;
    for (const char* t : {"thermal", "hydro", "nuclear", "wind", "solar", "biomass"}) {
      v = std::fmod(v * 7.31 + 0.7, 53.0);
      twh[t] = v;
    }
    const auto m = emit_mix_report(twh);
    int sum = 0;
    for (const auto& r : m.rows) {
      sum += r.percent;
      EXPECT_LE(std::abs(r.percent - 100.0 * r.twh / m.total_twh), 1.0);
    }
    EXPECT_EQ(sum, 100);
    EXPECT_EQ(m.rows.back().technology, "biomass");
  }
}

TEST(Mix, FromDayAheadOutcomes) {
  DayAheadOutcome a;
  a.generators = {"g1", "g2", "g3"};
  a.qda = {Series(24, 100.0), Series(24, 50.0), Series(24, 10.0)};
  const auto t = emit_mix_report({a, a}, {200.0, 165.0}, {{"g1", "hydro"}, {"g2", "nuclear"}});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].technology, "hydro");
  EXPECT_NEAR(t.rows[0].twh, 365.0 * 2400.0 / 1e6, 1e-12);
  EXPECT_EQ(t.rows[2].technology, "other");
  EXPECT_THROW(emit_mix_report({a}, {1.0, 2.0}, {}), Error);
}
