#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gridflex/netmodel.hpp"
#include "gridflex/worlds.hpp"

using namespace gridflex;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = GRIDFLEX_SOURCE_DIR;
const std::string kCli = GRIDFLEX_CLI;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "gridflex_test_cli.log";
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  r.out = os.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gridflex_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(BundledData, FilesMatchGeneratorsAndValidate) {
  const auto worlds = worlds::bundled();
  EXPECT_GE(worlds.size(), 5u);
  for (const auto& w : worlds) {
    const fs::path file = kSource / "data" / (w.name + ".json");
    ASSERT_TRUE(fs::exists(file)) << file;
    std::ostringstream expected;
    write_network(w.net, expected);
    EXPECT_EQ(slurp(file), expected.str()) << w.name << " is stale; rerun make_worlds";
    EXPECT_TRUE(validate_network(load_network(file.string())).ok()) << w.name;
  }
}

TEST(Cli, ValidateExitCodes) {
  const auto ok = run("validate \"" + (kSource / "data" / "meshed_pair.json").string() + "\"");
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("ok"), std::string::npos);

  const fs::path dir = scratch("validate");
  Network bad = worlds::subscription_relief();
  bad.lines.front().reactance = 0.0;
  bad.fsps.front().node = 999;
  save_network(bad, (dir / "bad.json").string());
  const auto findings = run("validate \"" + (dir / "bad.json").string() + "\"");
  EXPECT_EQ(findings.code, 2) << findings.out;
  EXPECT_NE(findings.out.find("999"), std::string::npos) << findings.out;

  const auto missing = run("validate \"" + (dir / "nope.json").string() + "\"");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.out.find("error:"), std::string::npos);

  { std::ofstream(dir / "garbage.json") << "{ nope"; }
  EXPECT_EQ(run("validate \"" + (dir / "garbage.json").string() + "\"").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  fs::remove_all(dir);
}

TEST(Cli, RunRefusesInvalidNetwork) {
  const fs::path dir = scratch("invalid");
  Network bad = worlds::subscription_relief();
  bad.lines.front().to = 4040;
  save_network(bad, (dir / "net.json").string());
  { std::ofstream(dir / "study.json") << R"({"network": "net.json", "results_dir": "out"})"; }
  const auto r = run("run \"" + (dir / "study.json").string() + "\"");
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_FALSE(fs::exists(dir / "out" / "study.json"));
  fs::remove_all(dir);
}

TEST(Cli, RunThenReportEveryTable) {
  const fs::path dir = scratch("run");
  save_network(worlds::subscription_relief(), (dir / "net.json").string());
  {
    std::ofstream(dir / "study.json") << R"({"network": "net.json", "results_dir": "results",
      "schemes": ["common-joint", "ml-ptdf-joint"], "sweep": {"fsp_size": [0, 1]}})";
  }
  const auto r = run("run \"" + (dir / "study.json").string() + "\" --workers 2");
  ASSERT_EQ(r.code, 0) << r.out;
  const fs::path res = dir / "results";
  ASSERT_TRUE(fs::exists(res / "study.json"));
  EXPECT_FALSE(fs::exists(res / "markets"));

  const std::string base = "report \"" + res.string() + "\" ";
  EXPECT_EQ(run(base + "--table energy --scheme ml-ptdf-joint").code, 0);
  EXPECT_TRUE(fs::exists(res / "energy_ml-ptdf-joint.csv"));
  EXPECT_EQ(slurp(res / "energy_ml-ptdf-joint.csv").substr(0, 26), "so,market,product,directio");

  EXPECT_EQ(run(base + "--table cost").code, 0);
  EXPECT_EQ(slurp(res / "cost_comparison.csv").substr(0, 29), "scheme,base_keur\nCommon Joint");

  EXPECT_EQ(run(base + "--table surface --scheme ml-ptdf-joint --y fsp_bid").code, 0);
  EXPECT_TRUE(fs::exists(res / "surface_dso_cost_ml-ptdf-joint.csv"));
  EXPECT_TRUE(fs::exists(res / "surface_dso_cost_ml-ptdf-joint.dat"));
  EXPECT_TRUE(fs::exists(res / "surface_dso_cost_ml-ptdf-joint_boundary.csv"));

  EXPECT_EQ(run(base + "--table mix").code, 0);
  EXPECT_EQ(slurp(res / "mix.csv").substr(0, 22), "technology,twh,percent");

  const auto js = run(base + "--table cost --format json --stdout");
  EXPECT_EQ(js.code, 0);
  EXPECT_NE(js.out.find("gridflex.cost_comparison/1"), std::string::npos);

  EXPECT_EQ(run(base + "--table energy --fsp-size 7").code, 1);
  EXPECT_EQ(run(base + "--table energy --scheme ml-opf-joint").code, 1);
  EXPECT_EQ(run(base + "--table bogus").code, 1);
  EXPECT_EQ(run("report \"" + (dir / "none").string() + "\" --table cost").code, 1);
  fs::remove_all(dir);
}
