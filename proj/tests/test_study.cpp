#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridflex/error.hpp"
#include "gridflex/study.hpp"
#include "gridflex/worlds.hpp"

using namespace gridflex;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gridflex_test_study_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<RepresentativeDay> days_of(const Network& net) {
  return cluster_representative_days(worlds::synthetic_year(net, 2023, 1));
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

}  // namespace

TEST(StudyConfig, DefaultsAndPaths) {
  std::istringstream in(R"({"network": "net.json", "results_dir": "out"})");
  const auto c = read_study_config(in, "/base");
  EXPECT_EQ(c.network, "/base/net.json");
  EXPECT_EQ(c.results_dir, "/base/out");
  EXPECT_EQ(c.schemes, all_schemes());
  EXPECT_EQ(c.fsp_size, (std::vector<double>{1.0}));
  EXPECT_EQ(c.seed, 1u);
  EXPECT_DOUBLE_EQ(c.imbalance_share, 0.02);
  EXPECT_FALSE(c.annual_imbalance_mwh.has_value());
  EXPECT_EQ(c.market.ess_model, EssModel::BothLegs);
  EXPECT_EQ(c.scenarios.size(), 1u);
  EXPECT_EQ(c.scenarios[0].name, "base");
}

TEST(StudyConfig, SweepsSchemesAndScenarios) {
  std::istringstream in(R"({
    "network": "/abs/net.json", "results_dir": "out", "seed": 9,
    "schemes": ["common-joint", "ml-ptdf-separate"],
    "sweep": {"fsp_size": "default", "fsp_bid": [0.5, 1.5], "demand": 1.2},
    "annual_imbalance_mwh": 1500, "imbalance_pattern": "random", "split_by_day_type": true,
    "market": {"cnsf_eur_per_mwh": 5000, "min_bid_size_mw": 0.5, "ess_model": "round-trip", "mip_gap": 1e-4},
    "scenarios": [{"name": "base"},
                  {"name": "plus", "fsps": [{"id": "x", "node": 31, "kind": "DR", "cap_up_mw": 2, "cap_down_mw": 1,
                                             "bid_eur_per_mwh": 40, "dr_max_hours_h": 3}]}]
  })");
  const auto c = read_study_config(in, "/base");
  EXPECT_EQ(c.network, "/abs/net.json");
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::CommonJoint, Scheme::MLPtdfSeparate}));
  EXPECT_EQ(c.fsp_size, default_fsp_size_grid());
  EXPECT_EQ(c.fsp_bid, (std::vector<double>{0.5, 1.5}));
  EXPECT_EQ(c.demand, (std::vector<double>{1.2}));
  EXPECT_EQ(*c.annual_imbalance_mwh, 1500.0);
  EXPECT_EQ(c.imbalance_pattern, ImbalancePattern::Random);
  EXPECT_TRUE(c.clustering.split_by_day_type);
  EXPECT_EQ(c.market.cnsf, 5000.0);
  EXPECT_EQ(c.market.min_bid_size, 0.5);
  EXPECT_EQ(c.market.ess_model, EssModel::RoundTrip);
  EXPECT_EQ(c.market.solver.mip_gap, 1e-4);
  ASSERT_EQ(c.scenarios.size(), 2u);
  ASSERT_EQ(c.scenarios[1].replication.fsps.size(), 1u);
  EXPECT_EQ(c.scenarios[1].replication.fsps[0].kind, FspKind::DR);
  EXPECT_EQ(c.scenarios[1].replication.fsps[0].dr_max_hours, 3.0);
}

TEST(StudyConfig, RejectsBadValues) {
  for (const char* text : {R"({"results_dir": "out"})",
                           R"({"network": "n", "results_dir": "o", "schemes": ["nope"]})",
                           R"({"network": "n", "results_dir": "o", "sweep": {"fsp_size": [-1]}})",
                           R"({"network": "n", "results_dir": "o", "sweep": {"demand": []}})",
                           R"({"network": "n", "results_dir": "o", "imbalance_pattern": "zigzag"})",
                           R"({"network": "n", "results_dir": "o", "market": {"ess_model": "magic"}})",
                           R"({"network": "n", "results_dir": "o", "schemes": []})", "not json"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_study_config(in), Error) << text;
  }
}

TEST(Study, SinglePointAnnualizesByWeights) {
  const Network net = worlds::subscription_relief();
  const auto days = days_of(net);
  StudyConfig cfg;
  cfg.schemes = {Scheme::CommonJoint, Scheme::MLPtdfJoint};
  cfg.annual_imbalance_mwh = 2000.0;
  const StudyResult r = run_study(cfg, net, days);
  ASSERT_EQ(r.points.size(), 1u);
  ASSERT_TRUE(r.points[0].ok) << r.points[0].error;
  EXPECT_EQ(r.annual_imbalance_mwh, 2000.0);
  double weight = 0.0;
  for (const auto& d : r.days) weight += d.weight;
  EXPECT_DOUBLE_EQ(weight, 365.0);
  for (const auto& s : r.points[0].schemes) {
    ASSERT_EQ(s.daily.size(), days.size());
    double local = 0.0, tso = 0.0, penalty = 0.0;
    for (std::size_t d = 0; d < days.size(); ++d) {
      local += days[d].weight * s.daily[d].local;
      tso += days[d].weight * s.daily[d].tso;
      penalty += days[d].weight * s.daily[d].nsf_penalty;
    }
    EXPECT_TRUE(close_rel(s.annual.local, local, 1e-9));
    EXPECT_TRUE(close_rel(s.annual.tso, tso, 1e-9));
    EXPECT_TRUE(close_rel(s.annual.nsf_penalty, penalty, 1e-9));
    EXPECT_GT(s.annual.total(), 0.0);
  }
  EXPECT_EQ(r.points[0].find(Scheme::CommonJoint)->annual.local, 0.0);
  EXPECT_GT(r.points[0].find(Scheme::MLPtdfJoint)->annual_subscription, 0.0);
  EXPECT_EQ(r.points[0].find(Scheme::MLOpfJoint), nullptr);
}

TEST(Study, ImbalanceShareOfDayAheadEnergy) {
  const Network net = worlds::bundled().front().net;
  const auto days = days_of(net);
  StudyConfig cfg;
  cfg.schemes = {Scheme::CommonJoint};
  cfg.imbalance_share = 0.05;
  const StudyResult r = run_study(cfg, net, days);
  ASSERT_TRUE(r.points[0].ok) << r.points[0].error;
  double energy = 0.0;
  for (const auto& [tech, mwh] : r.points[0].generation_mwh) energy += mwh;
  EXPECT_TRUE(close_rel(r.annual_imbalance_mwh, 0.05 * energy, 1e-12));
}

TEST(Study, FailingPointBecomesAHole) {
  const Network net = worlds::replication_base();
  const auto days = days_of(net);
  StudyConfig cfg;
  cfg.schemes = {Scheme::CommonJoint};
  StudyScenario broken;
  broken.name = "broken";
  broken.replication = worlds::replication_wind_farms();
  broken.replication.generators[0].node = 4242;
  StudyScenario good;
  good.name = "wind";
  good.replication = worlds::replication_wind_farms();
  cfg.scenarios = {StudyScenario{}, broken, good};
  cfg.workers = 2;
  const StudyResult r = run_study(cfg, net, days);
  ASSERT_EQ(r.points.size(), 3u);
  EXPECT_EQ(r.holes(), 1u);
  EXPECT_TRUE(r.points[0].ok);
  EXPECT_FALSE(r.points[1].ok);
  EXPECT_NE(r.points[1].error.find("4242"), std::string::npos) << r.points[1].error;
  EXPECT_TRUE(r.points[2].schemes.size() == 1 && r.points[2].ok);
  EXPECT_GT(r.points[2].generation_mwh.at("wind"), 0.0);
}

TEST(Study, GridOrderAndWorkerIndependence) {
  const Network net = worlds::congestible_dso();
  const auto days = days_of(net);
  StudyConfig cfg;
  cfg.schemes = {Scheme::MLPtdfJoint};
  cfg.fsp_size = {0.0, 1.0};
  cfg.demand = {1.0, 1.6};
  cfg.workers = 1;
  const StudyResult serial = run_study(cfg, net, days);
  cfg.workers = 3;
  const StudyResult pooled = run_study(cfg, net, days);
  ASSERT_EQ(serial.points.size(), 4u);
  EXPECT_EQ(serial.points[1].factors.fsp_size, 0.0);
  EXPECT_EQ(serial.points[1].factors.demand, 1.6);
  std::ostringstream a, b;
  write_study_json(serial, a);
  write_study_json(pooled, b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Study, JsonRoundTrip) {
  const Network net = worlds::subscription_relief();
  StudyConfig cfg;
  cfg.schemes = {Scheme::CommonSeparate, Scheme::MLOpfSeparate};
  cfg.annual_cm_reference_mwh = 123.0;
  StudyScenario bad;
  bad.name = "bad";
  Fsp f;
  f.id = "nowhere";
  f.node = 1;
  bad.replication.fsps = {f};
  cfg.scenarios = {StudyScenario{}, bad};
  const StudyResult r = run_study(cfg, net, days_of(net));
  std::ostringstream first;
  write_study_json(r, first);
  std::istringstream in(first.str());
  const StudyResult back = read_study_json(in);
  std::ostringstream second;
  write_study_json(back, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.holes(), 1u);
  EXPECT_EQ(*back.annual_cm_reference_mwh, 123.0);
  ASSERT_TRUE(back.points[0].ok);
  EXPECT_EQ(back.points[0].schemes[1].energy.size(), r.points[0].schemes[1].energy.size());
  std::istringstream wrong(R"({"schema": "gridflex.network/1"})");
  EXPECT_THROW(read_study_json(wrong), Error);
}

TEST(Study, RunFromConfigWritesDocumentsDeterministically) {
  const fs::path dir = scratch("docs");
  save_network(worlds::subscription_relief(), (dir / "net.json").string());
  {
    std::ofstream cfg(dir / "study.json");
    cfg << R"({"network": "net.json", "results_dir": "out", "schemes": ["ml-opf-joint"], "export_lp": true})";
  }
  const auto cfg = load_study_config((dir / "study.json").string());
  const StudyResult r = run_study(cfg);
  EXPECT_EQ(r.holes(), 0u);
  const fs::path out = dir / "out";
  ASSERT_TRUE(fs::exists(out / "study.json"));
  EXPECT_TRUE(fs::exists(out / "days.csv"));
  EXPECT_TRUE(fs::exists(out / "lp" / "day_ahead_winter_high.lp"));
  EXPECT_TRUE(fs::exists(out / "markets" / "point_0" / "day_ahead" / "winter_high.json"));
  EXPECT_TRUE(fs::exists(out / "markets" / "point_0" / "ml-opf-joint" / "winter_high" / "lfm-opf@D.json"));
  const std::string study1 = slurp(out / "study.json");
  const std::string lfm1 = slurp(out / "markets" / "point_0" / "ml-opf-joint" / "summer_low" / "tso-joint.json");
  run_study(cfg);
  EXPECT_EQ(slurp(out / "study.json"), study1);
  EXPECT_EQ(slurp(out / "markets" / "point_0" / "ml-opf-joint" / "summer_low" / "tso-joint.json"), lfm1);
  EXPECT_EQ(slurp(out / "days.csv").substr(0, 32), "label,season,level,weight_days\nw");
  fs::remove_all(dir);
}

TEST(Study, UnvalidatedNetworkIsRejected) {
  const fs::path dir = scratch("invalid");
  Network net = worlds::subscription_relief();
  net.lines.front().to = 777;
  save_network(net, (dir / "net.json").string());
  StudyConfig cfg;
  cfg.network = (dir / "net.json").string();
  cfg.results_dir = (dir / "out").string();
  try {
    run_study(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnvalidatedNetwork);
  }
  fs::remove_all(dir);
}
