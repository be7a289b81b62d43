#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridflex/error.hpp"
#include "gridflex/netmodel.hpp"
#include "gridflex/reporting.hpp"
#include "gridflex/study.hpp"

namespace fs = std::filesystem;
using namespace gridflex;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kFindings = 2;

int print_findings(const std::string& what, const ValidationReport& report) {
  for (const auto& f : report.findings) std::cout << what << ": " << f.kind << " " << f.subject << ": " << f.message << '\n';
  return report.ok() ? kOk : kFindings;
}

int cmd_validate(const std::string& path) {
  const Network net = load_network(path);
  const auto report = validate_network(net);
  if (report.ok()) std::cout << path << ": ok (" << net.nodes.size() << " nodes, " << net.lines.size() << " lines)\n";
  return print_findings(path, report);
}

int cmd_run(const std::string& config_path, unsigned workers) {
  StudyConfig cfg = load_study_config(config_path);
  if (workers) cfg.workers = workers;
  {
    const Network net = load_network(cfg.network);
    const auto report = validate_network(net);
    if (!report.ok()) return print_findings(cfg.network, report);
  }
  const StudyResult r = run_study(cfg);
  std::cout << r.points.size() << " grid points, " << r.holes() << " holes; results in " << cfg.results_dir << '\n';
  for (const auto& p : r.points)
    if (!p.ok)
      std::cerr << "hole " << p.scenario << " fsp_size=" << p.factors.fsp_size << " fsp_bid=" << p.factors.fsp_bid
                << " demand=" << p.factors.demand << ": " << p.error << '\n';
  return r.holes() == r.points.size() ? kError : kOk;
}

struct ReportArgs {
  std::string results;
  std::string table;
  std::string format = "csv";
  std::string scheme;
  std::string scenario = "base";
  std::vector<std::string> compare;
  std::string metric = "dso_cost";
  std::string x = "fsp_size", y = "demand";
  double fsp_size = 1.0, fsp_bid = 1.0, demand = 1.0;
  int decimals = -1;
  bool to_stdout = false;
};

const GridPoint& pick_point(const StudyResult& r, const std::string& scenario, const ReportArgs& a) {
  for (const auto& p : r.points)
    if (p.scenario == scenario && p.factors.fsp_size == a.fsp_size && p.factors.fsp_bid == a.fsp_bid &&
        p.factors.demand == a.demand) {
      if (!p.ok) throw Error(ErrorCode::InvalidInput, "grid point is a hole: " + p.error);
      return p;
    }
  throw Error(ErrorCode::InvalidInput, "no grid point for scenario " + scenario + " at the requested factors");
}

Scheme pick_scheme(const StudyResult& r, const std::string& name) {
  if (!name.empty()) return parse_scheme(name);
  if (r.schemes.empty()) throw Error(ErrorCode::MissingScheme, "results hold no scheme");
  return r.schemes.front();
}

void emit(const ReportArgs& a, const fs::path& dir, const std::string& name, const std::string& text) {
  if (a.to_stdout) {
    std::cout << text;
    return;
  }
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + p.string());
  out << text;
  std::cout << p.string() << '\n';
}

int cmd_report(const ReportArgs& a) {
  fs::path file = a.results;
  if (fs::is_directory(file)) file /= "study.json";
  const fs::path dir = file.parent_path().empty() ? fs::path(".") : file.parent_path();
  const StudyResult r = load_study_json(file.string());
  const bool json = a.format == "json";
  std::ostringstream os;

  if (a.table == "energy") {
    const Scheme s = pick_scheme(r, a.scheme);
    const SchemeResult* sr = pick_point(r, a.scenario, a).find(s);
    if (!sr) throw Error(ErrorCode::MissingScheme, "results hold no " + to_string(s));
    const auto t = emit_energy_activated(*sr, r.days);
    json ? write_json(t, os) : write_csv(t, os, a.decimals < 0 ? 2 : a.decimals);
    emit(a, dir, "energy_" + to_string(s) + (json ? ".json" : ".csv"), os.str());
  } else if (a.table == "cost") {
    std::vector<std::string> names = a.compare;
    if (names.empty())
      for (const auto& p : r.points)
        if (std::find(names.begin(), names.end(), p.scenario) == names.end()) names.push_back(p.scenario);
    std::vector<CostScenario> scenarios;
    for (const auto& n : names) {
      const GridPoint& p = pick_point(r, n, a);
      CostScenario sc{n, {}};
      for (const auto& s : p.schemes) sc.costs.push_back(s.annual);
      scenarios.push_back(std::move(sc));
    }
    const auto t = emit_cost_comparison(scenarios);
    json ? write_json(t, os) : write_csv(t, os);
    emit(a, dir, std::string("cost_comparison") + (json ? ".json" : ".csv"), os.str());
  } else if (a.table == "surface") {
    const Scheme s = pick_scheme(r, a.scheme);
    const auto metric = parse_surface_metric(a.metric);
    const auto surf = emit_surface(r, metric, s, a.x, a.y, a.scenario);
    const std::string stem = "surface_" + to_string(metric) + "_" + to_string(s);
    const int dec = a.decimals < 0 ? 6 : a.decimals;
    write_long_csv(surf, os, dec);
    emit(a, dir, stem + ".csv", os.str());
    std::ostringstream mat, bnd;
    write_gnuplot_matrix(surf, mat, dec);
    write_boundary_csv(surf, bnd);
    if (!a.to_stdout) {
      emit(a, dir, stem + ".dat", mat.str());
      emit(a, dir, stem + "_boundary.csv", bnd.str());
    } else {
      std::cout << bnd.str();
    }
  } else if (a.table == "mix") {
    std::map<std::string, double> twh;
    for (const auto& [tech, mwh] : pick_point(r, a.scenario, a).generation_mwh) twh[tech] = mwh / 1e6;
    const auto t = emit_mix_report(twh);
    json ? write_json(t, os) : write_csv(t, os, a.decimals < 0 ? 3 : a.decimals);
    emit(a, dir, std::string("mix") + (json ? ".json" : ".csv"), os.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridflex: TSO-DSO coordination scheme simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the study described by a config file");
  std::string config;
  unsigned workers = 0;
  run->add_option("config", config, "Study config (JSON)")->required();
  run->add_option("--workers", workers, "Worker threads (default: config, then hardware threads)");

  auto* report = app.add_subcommand("report", "Render a table from study results");
  ReportArgs ra;
  report->add_option("results", ra.results, "Results directory or study.json")->required();
  report->add_option("--table", ra.table, "Table to render")->required()->check(CLI::IsMember({"energy", "cost", "surface", "mix"}));
  report->add_option("--format", ra.format, "csv or json (energy, cost, mix)")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--scheme", ra.scheme, "Coordination scheme (default: first in results)");
  report->add_option("--scenario", ra.scenario, "Scenario name (default: base)");
  report->add_option("--compare", ra.compare, "Scenarios for the cost table, base first");
  report->add_option("--metric", ra.metric, "Surface metric")->check(CLI::IsMember({"dso_cost", "nsf"}));
  report->add_option("--x", ra.x, "Surface x axis")->check(CLI::IsMember({"fsp_size", "fsp_bid", "demand"}));
  report->add_option("--y", ra.y, "Surface y axis")->check(CLI::IsMember({"fsp_size", "fsp_bid", "demand"}));
  report->add_option("--fsp-size", ra.fsp_size, "Grid point fsp_size factor (default 1)");
  report->add_option("--fsp-bid", ra.fsp_bid, "Grid point fsp_bid factor (default 1)");
  report->add_option("--demand", ra.demand, "Grid point demand factor (default 1)");
  report->add_option("--decimals", ra.decimals, "Decimals for energies (GWh, TWh) and surface values");
  report->add_flag("--stdout", ra.to_stdout, "Print instead of writing into the results directory");

  auto* validate = app.add_subcommand("validate", "Validate a network document");
  std::string network;
  validate->add_option("network", network, "Network document (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }
  try {
    if (*run) return cmd_run(config, workers);
    if (*report) return cmd_report(ra);
    if (*validate) return cmd_validate(network);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
