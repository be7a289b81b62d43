#include "gridflex/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "gridflex/error.hpp"
#include "gridflex/worlds.hpp"
#include "json_util.hpp"
#include "netmodel_json.hpp"

namespace gridflex {
namespace {

namespace fs = std::filesystem;
using json::Json;
using json::Ordered;

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::vector<double> grid_values(const Json& sweep, const char* key, std::vector<double> (*defaults)()) {
  if (!sweep.contains(key)) return {1.0};
  const auto& v = sweep.at(key);
  if (v.is_string()) {
    if (v.get<std::string>() != "default")
      throw Error(ErrorCode::InvalidInput, std::string("sweep.") + key + " must be a list or \"default\"");
    return defaults();
  }
  if (v.is_number()) return {v.get<double>()};
  auto values = v.get<std::vector<double>>();
  if (values.empty()) throw Error(ErrorCode::InvalidInput, std::string("sweep.") + key + " is empty");
  for (double x : values)
    if (!(x >= 0.0)) throw Error(ErrorCode::InvalidInput, std::string("sweep.") + key + " has a negative factor");
  return values;
}

EssModel parse_ess_model(const std::string& s) {
  if (s == "both-legs") return EssModel::BothLegs;
  if (s == "round-trip") return EssModel::RoundTrip;
  throw Error(ErrorCode::InvalidInput, "market.ess_model must be \"both-legs\" or \"round-trip\", got '" + s + "'");
}

StudyConfig config_from_json(const Json& j, const std::string& base_dir) {
  StudyConfig c;
  c.network = resolve(base_dir, j.at("network").get<std::string>());
  c.results_dir = resolve(base_dir, j.at("results_dir").get<std::string>());
  c.demand_csv = resolve(base_dir, j.value("demand_csv", std::string{}));
  c.synthetic_year = j.value("synthetic_year", c.synthetic_year);
  c.seed = j.value("seed", c.seed);
  if (j.contains("annual_imbalance_mwh")) c.annual_imbalance_mwh = j.at("annual_imbalance_mwh").get<double>();
  c.imbalance_share = j.value("imbalance_share", c.imbalance_share);
  const std::string pattern = j.value("imbalance_pattern", std::string{"alternating"});
  if (pattern == "alternating") c.imbalance_pattern = ImbalancePattern::Alternating;
  else if (pattern == "random") c.imbalance_pattern = ImbalancePattern::Random;
  else throw Error(ErrorCode::InvalidInput, "imbalance_pattern must be \"alternating\" or \"random\"");
  if (j.contains("schemes")) {
    c.schemes.clear();
    for (const auto& s : j.at("schemes")) c.schemes.push_back(parse_scheme(s.get<std::string>()));
    if (c.schemes.empty()) throw Error(ErrorCode::InvalidInput, "schemes is empty");
  }
  if (j.contains("scenarios")) {
    c.scenarios.clear();
    for (const auto& s : j.at("scenarios")) {
      StudyScenario sc;
      sc.name = s.at("name").get<std::string>();
      for (const auto& g : s.value("generators", Json::array()))
        sc.replication.generators.push_back(generator_from_json(g, kDefaultHorizon));
      for (const auto& f : s.value("fsps", Json::array())) sc.replication.fsps.push_back(fsp_from_json(f));
      c.scenarios.push_back(std::move(sc));
    }
    if (c.scenarios.empty()) throw Error(ErrorCode::InvalidInput, "scenarios is empty");
  }
  const Json sweep = j.value("sweep", Json::object());
  c.fsp_size = grid_values(sweep, "fsp_size", default_fsp_size_grid);
  c.fsp_bid = grid_values(sweep, "fsp_bid", default_fsp_bid_grid);
  c.demand = grid_values(sweep, "demand", default_demand_grid);
  c.clustering.split_by_day_type = j.value("split_by_day_type", false);
  const Json m = j.value("market", Json::object());
  c.market.cnsf = m.value("cnsf_eur_per_mwh", c.market.cnsf);
  c.market.min_bid_size = m.value("min_bid_size_mw", c.market.min_bid_size);
  c.market.ess_model = parse_ess_model(m.value("ess_model", std::string{"both-legs"}));
  c.market.wind_max_flex_up = m.value("wind_max_flex_up_pu", c.market.wind_max_flex_up);
  c.market.solar_max_flex_up = m.value("solar_max_flex_up_pu", c.market.solar_max_flex_up);
  c.market.allow_nsf = m.value("allow_nsf", c.market.allow_nsf);
  c.market.solver.mip_gap = m.value("mip_gap", c.market.solver.mip_gap);
  c.market.solver.time_limit_s = m.value("time_limit_s", c.market.solver.time_limit_s);
  c.market.solver.feas_tol = m.value("feasibility_tol", c.market.solver.feas_tol);
  c.workers = j.value("workers", 0u);
  if (j.contains("market_documents")) c.market_documents = j.at("market_documents").get<bool>();
  c.export_lp = j.value("export_lp", false);
  if (j.contains("annual_cm_reference_mwh")) c.annual_cm_reference_mwh = j.at("annual_cm_reference_mwh").get<double>();
  if (j.contains("annual_cm_reference_eur")) c.annual_cm_reference_eur = j.at("annual_cm_reference_eur").get<double>();
  return c;
}

std::string market_label(const FlexOutcome& o) { return o.so == "DSO" ? o.market + "@" + o.scope : o.market; }

double sum(const Series& s) {
  double t = 0.0;
  for (double v : s) t += v;
  return t;
}

struct Document {
  std::string path;  // relative to the results dir
  std::string text;
};

double imbalance_volume(const StudyConfig& cfg, const std::map<std::string, double>& generation_mwh) {
  if (cfg.annual_imbalance_mwh) return *cfg.annual_imbalance_mwh;
  double energy = 0.0;
  for (const auto& [tech, mwh] : generation_mwh) energy += mwh;
  return cfg.imbalance_share * energy;
}

void run_point(const StudyConfig& cfg, const Network& net, const std::vector<RepresentativeDay>& days,
               const StudyScenario& scenario, GridPoint& point, std::vector<Document>* docs, const std::string& tag) {
  const Network base = inject_replication(net, scenario.replication);
  std::vector<Network> day_nets;
  std::vector<DayAheadOutcome> das;
  std::vector<double> weights;
  for (const auto& day : days) {
    day_nets.push_back(apply_sensitivity(with_day_demand(base, day), point.factors));
    try {
      das.push_back(clear_day_ahead(day_nets.back(), cfg.market));
    } catch (const Error& e) {
      throw Error(e.code(), "day-ahead " + day.label + ": " + e.what());
    }
    weights.push_back(day.weight);
  }
  for (std::size_t d = 0; d < days.size(); ++d) {
    for (std::size_t g = 0; g < das[d].generators.size(); ++g) {
      const auto& tech = day_nets[d].generator(das[d].generators[g]).technology;
      point.generation_mwh[tech] += days[d].weight * sum(das[d].qda[g]);
    }
  }
  const double volume = imbalance_volume(cfg, point.generation_mwh);
  const auto imbalances = synthesize_imbalances(day_nets.front(), das, weights, volume, cfg.seed, cfg.imbalance_pattern);

  for (Scheme s : cfg.schemes) {
    SchemeResult r;
    r.scheme = s;
    r.annual.scheme = s;
    std::map<std::string, std::size_t> energy_index;
    for (std::size_t d = 0; d < days.size(); ++d) {
      const Network& nd = day_nets[d];
      const double w = days[d].weight;
      SchemeRun run;
      try {
        run = run_scheme(s, nd, das[d], build_offers(nd, das[d], cfg.market), imbalances[d], cfg.market);
      } catch (const Error& e) {
        throw Error(e.code(), to_string(s) + " on " + days[d].label + ": " + e.what());
      }
      r.daily.push_back(run.costs);
      r.annual.local += w * run.costs.local;
      r.annual.tso += w * run.costs.tso;
      r.annual.nsf_penalty += w * run.costs.nsf_penalty;
      for (const auto& m : run.markets) {
        r.annual_subscription += w * m.cost.subscription;
        if (m.so == "DSO") r.annual_local_objective += w * m.objective;
        for (std::size_t n = 0; n < m.nodes.size(); ++n) {
          const double e = sum(m.nsf_p[n]) + sum(m.nsf_n[n]);
          r.annual_nsf_mwh += w * e;
          if (nd.is_dso_node(m.nodes[n])) r.annual_dso_nsf_mwh += w * e;
        }
        const std::string label = market_label(m);
        auto it = energy_index.find(label);
        if (it == energy_index.end()) {
          it = energy_index.emplace(label, r.energy.size()).first;
          r.energy.push_back({m.so, label, m.product, std::vector<double>(days.size(), 0.0),
                              std::vector<double>(days.size(), 0.0)});
        }
        for (const auto& f : m.fsps) {
          r.energy[it->second].up_mwh[d] += sum(f.up);
          r.energy[it->second].down_mwh[d] += sum(f.down);
        }
        if (docs) {
          std::ostringstream os;
          write_outcome_json(m, os);
          docs->push_back({"markets/" + tag + "/" + to_string(s) + "/" + days[d].label + "/" + label + ".json",
                           os.str()});
        }
      }
    }
    point.schemes.push_back(std::move(r));
  }
  if (docs) {
    for (std::size_t d = 0; d < days.size(); ++d) {
      std::ostringstream os;
      write_day_ahead_json(das[d], os);
      docs->push_back({"markets/" + tag + "/day_ahead/" + days[d].label + ".json", os.str()});
    }
  }
}

Ordered cost_json(const CostReport& c) {
  return Ordered{{"local", c.local}, {"tso", c.tso}, {"nsf_penalty", c.nsf_penalty}, {"total", c.total()}};
}

CostReport cost_from_json(const Json& j, Scheme s) {
  CostReport c;
  c.scheme = s;
  c.local = j.at("local").get<double>();
  c.tso = j.at("tso").get<double>();
  c.nsf_penalty = j.at("nsf_penalty").get<double>();
  return c;
}

Season parse_season(const std::string& s) {
  for (Season v : {Season::Winter, Season::Spring, Season::Summer, Season::Autumn})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::InvalidInput, "unknown season '" + s + "'");
}

Product parse_product(const std::string& s) {
  for (Product p : {Product::CM, Product::B, Product::Joint})
    if (to_string(p) == s) return p;
  throw Error(ErrorCode::InvalidInput, "unknown product '" + s + "'");
}

}  // namespace

const SchemeResult* GridPoint::find(Scheme s) const {
  for (const auto& r : schemes)
    if (r.scheme == s) return &r;
  return nullptr;
}

std::size_t StudyResult::holes() const {
  return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.ok; }));
}

StudyConfig read_study_config(std::istream& in, const std::string& base_dir) {
  return json::guarded([&] { return config_from_json(json::parse(in), base_dir); });
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open study config " + path);
  return read_study_config(in, fs::path(path).parent_path().string());
}

namespace {

StudyResult run_grid(const StudyConfig& cfg, const Network& net, const std::vector<RepresentativeDay>& days,
                     std::vector<std::vector<Document>>* docs) {
  StudyResult result;
  result.seed = cfg.seed;
  result.network = net.name;
  result.schemes = cfg.schemes;
  result.annual_cm_reference_mwh = cfg.annual_cm_reference_mwh;
  result.annual_cm_reference_eur = cfg.annual_cm_reference_eur;
  for (const auto& d : days) result.days.push_back({d.label, d.season, d.level, d.weight});

  struct Item {
    const StudyScenario* scenario;
    SensitivityFactors factors;
  };
  std::vector<Item> items;
  for (const auto& sc : cfg.scenarios)
    for (double size : cfg.fsp_size)
      for (double bid : cfg.fsp_bid)
        for (double dem : cfg.demand) items.push_back({&sc, {size, bid, dem}});
  result.points.resize(items.size());
  if (docs) docs->assign(items.size(), {});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < items.size(); i = next++) {
      GridPoint& p = result.points[i];
      p.scenario = items[i].scenario->name;
      p.factors = items[i].factors;
      try {
        run_point(cfg, net, days, *items[i].scenario, p, docs ? &(*docs)[i] : nullptr, "point_" + std::to_string(i));
        p.ok = true;
      } catch (const std::exception& e) {
        p = GridPoint{};
        p.scenario = items[i].scenario->name;
        p.factors = items[i].factors;
        p.error = e.what();
        if (docs) (*docs)[i].clear();
      }
    }
  };
  unsigned n = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(items.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (const auto& p : result.points) {
    if (!p.ok) continue;
    result.annual_imbalance_mwh = imbalance_volume(cfg, p.generation_mwh);
    break;
  }
  return result;
}

}  // namespace

StudyResult run_study(const StudyConfig& config, const Network& net, const std::vector<RepresentativeDay>& days) {
  return run_grid(config, net, days, nullptr);
}

StudyResult run_study(const StudyConfig& config) {
  const Network net = load_network(config.network);
  const auto report = validate_network(net);
  if (!report.ok())
    throw Error(ErrorCode::UnvalidatedNetwork, config.network + ": " + report.findings.front().message);
  const DemandData demand = config.demand_csv.empty() ? worlds::synthetic_year(net, config.synthetic_year, config.seed)
                                                      : load_demand_csv(config.demand_csv);
  const auto days = cluster_representative_days(demand, config.clustering);

  const std::size_t points = config.scenarios.size() * config.fsp_size.size() * config.fsp_bid.size() * config.demand.size();
  const bool want_docs = config.market_documents.value_or(points == 1);
  std::vector<std::vector<Document>> docs;
  StudyResult result = run_grid(config, net, days, want_docs ? &docs : nullptr);

  const fs::path dir(config.results_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "study.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write " + (dir / "study.json").string());
    write_study_json(result, out);
  }
  {
    std::ofstream out(dir / "days.csv", std::ios::binary);
    out << "label,season,level,weight_days\n";
    for (const auto& d : result.days)
      out << d.label << ',' << to_string(d.season) << ',' << to_string(d.level) << ',' << d.weight << '\n';
  }
  if (config.export_lp) {
    fs::create_directories(dir / "lp");
    const Network base = inject_replication(net, config.scenarios.front().replication);
    const SensitivityFactors f{config.fsp_size.front(), config.fsp_bid.front(), config.demand.front()};
    for (const auto& day : days) {
      std::ofstream out(dir / "lp" / ("day_ahead_" + day.label + ".lp"), std::ios::binary);
      mp::write_lp_format(build_day_ahead_program(apply_sensitivity(with_day_demand(base, day), f)), out);
    }
  }
  for (const auto& point_docs : docs) {
    for (const auto& doc : point_docs) {
      const fs::path p = dir / doc.path;
      fs::create_directories(p.parent_path());
      std::ofstream out(p, std::ios::binary);
      out << doc.text;
    }
  }
  return result;
}

void write_study_json(const StudyResult& r, std::ostream& out) {
  Ordered j;
  j["schema"] = "gridflex.study/1";
  j["network"] = r.network;
  j["seed"] = r.seed;
  j["annual_imbalance_mwh"] = r.annual_imbalance_mwh;
  if (r.annual_cm_reference_mwh) j["annual_cm_reference_mwh"] = *r.annual_cm_reference_mwh;
  if (r.annual_cm_reference_eur) j["annual_cm_reference_eur"] = *r.annual_cm_reference_eur;
  Ordered schemes = Ordered::array();
  for (Scheme s : r.schemes) schemes.push_back(to_string(s));
  j["schemes"] = std::move(schemes);
  Ordered days = Ordered::array();
  for (const auto& d : r.days)
    days.push_back(
        Ordered{{"label", d.label}, {"season", to_string(d.season)}, {"level", to_string(d.level)}, {"weight", d.weight}});
  j["days"] = std::move(days);
  j["holes"] = r.holes();
  Ordered points = Ordered::array();
  for (const auto& p : r.points) {
    Ordered e{{"scenario", p.scenario},
              {"fsp_size", p.factors.fsp_size},
              {"fsp_bid", p.factors.fsp_bid},
              {"demand", p.factors.demand},
              {"ok", p.ok}};
    if (!p.ok) {
      e["error"] = p.error;
      points.push_back(std::move(e));
      continue;
    }
    Ordered gen = Ordered::object();
    for (const auto& [tech, mwh] : p.generation_mwh) gen[tech] = mwh;
    e["generation_mwh"] = std::move(gen);
    Ordered schemes_out = Ordered::array();
    for (const auto& s : p.schemes) {
      Ordered daily = Ordered::array();
      for (const auto& c : s.daily) daily.push_back(cost_json(c));
      Ordered energy = Ordered::array();
      for (const auto& m : s.energy)
        energy.push_back(Ordered{{"so", m.so},
                                 {"market", m.market},
                                 {"product", to_string(m.product)},
                                 {"up_mwh", m.up_mwh},
                                 {"down_mwh", m.down_mwh}});
      schemes_out.push_back(Ordered{{"scheme", to_string(s.scheme)},
                                    {"annual_eur", cost_json(s.annual)},
                                    {"annual_subscription_eur", s.annual_subscription},
                                    {"annual_local_objective_eur", s.annual_local_objective},
                                    {"annual_nsf_mwh", s.annual_nsf_mwh},
                                    {"annual_dso_nsf_mwh", s.annual_dso_nsf_mwh},
                                    {"daily_eur", std::move(daily)},
                                    {"energy", std::move(energy)}});
    }
    e["schemes"] = std::move(schemes_out);
    points.push_back(std::move(e));
  }
  j["points"] = std::move(points);
  out << j.dump(2) << '\n';
}

StudyResult read_study_json(std::istream& in) {
  return json::guarded([&] {
    const Json j = json::parse(in);
    if (j.value("schema", std::string{}) != "gridflex.study/1")
      throw Error(ErrorCode::InvalidInput, "not a gridflex.study/1 document");
    StudyResult r;
    r.network = j.at("network").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.annual_imbalance_mwh = j.at("annual_imbalance_mwh").get<double>();
    if (j.contains("annual_cm_reference_mwh")) r.annual_cm_reference_mwh = j.at("annual_cm_reference_mwh").get<double>();
    if (j.contains("annual_cm_reference_eur")) r.annual_cm_reference_eur = j.at("annual_cm_reference_eur").get<double>();
    for (const auto& s : j.at("schemes")) r.schemes.push_back(parse_scheme(s.get<std::string>()));
    for (const auto& d : j.at("days"))
      r.days.push_back({d.at("label").get<std::string>(), parse_season(d.at("season").get<std::string>()),
                        d.at("level").get<std::string>() == to_string(LoadLevel::High) ? LoadLevel::High : LoadLevel::Low,
                        d.at("weight").get<double>()});
    for (const auto& e : j.at("points")) {
      GridPoint p;
      p.scenario = e.at("scenario").get<std::string>();
      p.factors = {e.at("fsp_size").get<double>(), e.at("fsp_bid").get<double>(), e.at("demand").get<double>()};
      p.ok = e.at("ok").get<bool>();
      if (!p.ok) {
        p.error = e.value("error", std::string{});
        r.points.push_back(std::move(p));
        continue;
      }
      for (const auto& [tech, mwh] : e.at("generation_mwh").items()) p.generation_mwh[tech] = mwh.get<double>();
      for (const auto& s : e.at("schemes")) {
        SchemeResult sr;
        sr.scheme = parse_scheme(s.at("scheme").get<std::string>());
        sr.annual = cost_from_json(s.at("annual_eur"), sr.scheme);
        sr.annual_subscription = s.at("annual_subscription_eur").get<double>();
        sr.annual_local_objective = s.at("annual_local_objective_eur").get<double>();
        sr.annual_nsf_mwh = s.at("annual_nsf_mwh").get<double>();
        sr.annual_dso_nsf_mwh = s.at("annual_dso_nsf_mwh").get<double>();
        for (const auto& c : s.at("daily_eur")) sr.daily.push_back(cost_from_json(c, sr.scheme));
        for (const auto& m : s.at("energy"))
          sr.energy.push_back({m.at("so").get<std::string>(), m.at("market").get<std::string>(),
                               parse_product(m.at("product").get<std::string>()),
                               m.at("up_mwh").get<std::vector<double>>(), m.at("down_mwh").get<std::vector<double>>()});
        p.schemes.push_back(std::move(sr));
      }
      r.points.push_back(std::move(p));
    }
    return r;
  });
}

StudyResult load_study_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open results " + path);
  return read_study_json(in);
}

}  // namespace gridflex
