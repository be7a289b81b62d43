#include "gridflex/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "gridflex/error.hpp"
#include "json_util.hpp"

namespace gridflex {
namespace {

using json::Ordered;

double round_half_away(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

std::string format_fixed(double value, int decimals) {
  double r = round_half_away(value, decimals);
  if (r == 0.0) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

// ---- energy activated ----

EnergyActivatedTable emit_energy_activated(const SchemeResult& scheme, const std::vector<DayInfo>& days) {
  EnergyActivatedTable t;
  for (const auto& d : days) t.columns.push_back(d.label);
  t.columns.push_back("total");
  const std::size_t nd = days.size();
  for (const auto& m : scheme.energy) {
    std::vector<double> up(nd + 1, 0.0), down(nd + 1, 0.0), all(nd + 1, 0.0);
    for (std::size_t d = 0; d < nd; ++d) {
      up[d] = days[d].weight * (d < m.up_mwh.size() ? m.up_mwh[d] : 0.0) / 1000.0;
      down[d] = days[d].weight * (d < m.down_mwh.size() ? m.down_mwh[d] : 0.0) / 1000.0;
      all[d] = up[d] + down[d];
    }
    for (std::size_t d = 0; d < nd; ++d) {
      up[nd] += up[d];
      down[nd] += down[d];
      all[nd] += all[d];
    }
    const std::string product = to_string(m.product);
    t.rows.push_back({m.so, m.market, "All", "Total", all});
    t.rows.push_back({m.so, m.market, product, "Total", all});
    t.rows.push_back({m.so, m.market, product, "Up", up});
    t.rows.push_back({m.so, m.market, product, "Down", down});
  }
  return t;
}

void write_csv(const EnergyActivatedTable& t, std::ostream& out, int decimals) {
  out << "so,market,product,direction";
  for (const auto& c : t.columns) out << ',' << csv_field(c);
  out << '\n';
  for (const auto& r : t.rows) {
    out << csv_field(r.so) << ',' << csv_field(r.market) << ',' << r.product << ',' << r.direction;
    for (double v : r.gwh) out << ',' << format_fixed(v, decimals);
    out << '\n';
  }
}

void write_json(const EnergyActivatedTable& t, std::ostream& out) {
  Ordered j;
  j["schema"] = "gridflex.energy_activated/1";
  j["unit"] = "GWh/year";
  j["columns"] = t.columns;
  Ordered rows = Ordered::array();
  for (const auto& r : t.rows)
    rows.push_back(Ordered{{"so", r.so}, {"market", r.market}, {"product", r.product}, {"direction", r.direction},
                           {"gwh", r.gwh}});
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

// ---- cost comparison ----

std::optional<double> percent_delta(double base, double value) {
  if (base == 0.0) {
    if (value == 0.0) return 0.0;
    return std::nullopt;
  }
  const double r = round_half_away((value - base) / base * 100.0, 1);
  return r == 0.0 ? 0.0 : r;
}

namespace {

struct RowSpec {
  std::string label;
  std::vector<Scheme> sources;  // first one present is used
  bool local;
};

const std::vector<RowSpec>& row_specs() {
  static const std::vector<RowSpec> specs = {
      {"Common Joint", {Scheme::CommonJoint}, false},
      {"Common Separate", {Scheme::CommonSeparate}, false},
      {"ML-OPF Local", {Scheme::MLOpfJoint, Scheme::MLOpfSeparate}, true},
      {"ML-OPF Joint", {Scheme::MLOpfJoint}, false},
      {"ML-OPF Separate", {Scheme::MLOpfSeparate}, false},
      {"ML-PTDF Local", {Scheme::MLPtdfJoint, Scheme::MLPtdfSeparate}, true},
      {"ML-PTDF Joint", {Scheme::MLPtdfJoint}, false},
      {"ML-PTDF Separate", {Scheme::MLPtdfSeparate}, false},
  };
  return specs;
}

bool is_common(Scheme s) { return s == Scheme::CommonJoint || s == Scheme::CommonSeparate; }

const CostReport* find_cost(const CostScenario& sc, Scheme s) {
  for (const auto& c : sc.costs)
    if (c.scheme == s) return &c;
  return nullptr;
}

}  // namespace

CostComparisonTable emit_cost_comparison(const std::vector<CostScenario>& scenarios) {
  if (scenarios.empty() || scenarios.front().costs.empty())
    throw Error(ErrorCode::MissingScheme, "cost comparison needs at least one scheme");
  CostComparisonTable t;
  for (const auto& sc : scenarios) t.scenarios.push_back(sc.name);
  const CostScenario& first = scenarios.front();
  for (const auto& spec : row_specs()) {
    std::optional<Scheme> chosen;
    for (Scheme s : spec.sources)
      if (find_cost(first, s)) {
        chosen = s;
        break;
      }
    if (!chosen) continue;
    CostRow row;
    row.label = spec.label;
    for (const auto& sc : scenarios) {
      const CostReport* c = find_cost(sc, *chosen);
      if (!c) throw Error(ErrorCode::MissingScheme, "scenario " + sc.name + " has no " + to_string(*chosen) + " result");
      const double eur = is_common(*chosen) ? c->total() : (spec.local ? c->local : c->tso);
      row.keur.push_back(eur / 1000.0);
    }
    if (scenarios.size() == 2) row.delta_pct = percent_delta(row.keur[0], row.keur[1]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const CostComparisonTable& t, std::ostream& out) {
  out << "scheme";
  for (const auto& s : t.scenarios) out << ',' << csv_field(s + "_keur");
  if (t.scenarios.size() == 2) out << ",delta_pct";
  out << '\n';
  for (const auto& r : t.rows) {
    out << csv_field(r.label);
    for (double v : r.keur) out << ',' << format_fixed(v, 0);
    if (t.scenarios.size() == 2) out << ',' << (r.delta_pct ? format_fixed(*r.delta_pct, 1) : "");
    out << '\n';
  }
}

void write_json(const CostComparisonTable& t, std::ostream& out) {
  Ordered j;
  j["schema"] = "gridflex.cost_comparison/1";
  j["unit"] = "kEUR/year";
  j["scenarios"] = t.scenarios;
  Ordered rows = Ordered::array();
  for (const auto& r : t.rows) {
    Ordered e{{"scheme", r.label}, {"keur", r.keur}};
    e["delta_pct"] = r.delta_pct ? Ordered(*r.delta_pct) : Ordered(nullptr);
    rows.push_back(std::move(e));
  }
  j["rows"] = std::move(rows);
  out << j.dump(2) << '\n';
}

// ---- sensitivity surface ----

std::string to_string(SurfaceMetric m) { return m == SurfaceMetric::DsoCost ? "dso_cost" : "nsf"; }

SurfaceMetric parse_surface_metric(const std::string& s) {
  if (s == "dso_cost") return SurfaceMetric::DsoCost;
  if (s == "nsf") return SurfaceMetric::Nsf;
  throw Error(ErrorCode::InvalidInput, "surface metric must be dso_cost or nsf, got '" + s + "'");
}

SurfaceData make_surface(std::string x_name, std::string y_name, std::string metric, std::vector<double> xs,
                         std::vector<double> ys, std::vector<std::vector<std::optional<double>>> values) {
  if (xs.empty() || ys.empty()) throw Error(ErrorCode::EmptyGrid, "surface has an empty axis");
  if (values.size() != xs.size()) throw Error(ErrorCode::DimensionMismatch, "surface values do not match the x axis");
  for (const auto& col : values)
    if (col.size() != ys.size()) throw Error(ErrorCode::DimensionMismatch, "surface values do not match the y axis");
  SurfaceData s;
  s.x_name = std::move(x_name);
  s.y_name = std::move(y_name);
  s.metric = std::move(metric);
  s.xs = std::move(xs);
  s.ys = std::move(ys);
  s.values = std::move(values);
  std::vector<std::size_t> order(s.ys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.ys[a] < s.ys[b]; });
  s.flat = true;
  for (std::size_t ix = 0; ix < s.xs.size(); ++ix) {
    std::optional<double> first;
    for (std::size_t iy : order) {
      const auto& v = s.values[ix][iy];
      if (v && *v > SurfaceData::kThreshold) {
        first = s.ys[iy];
        break;
      }
    }
    if (first) s.flat = false;
    s.boundary.push_back(first);
  }
  return s;
}

namespace {

double factor(const SensitivityFactors& f, const std::string& name) {
  if (name == "fsp_size") return f.fsp_size;
  if (name == "fsp_bid") return f.fsp_bid;
  if (name == "demand") return f.demand;
  throw Error(ErrorCode::InvalidInput, "surface axis must be fsp_size, fsp_bid or demand, got '" + name + "'");
}

std::vector<double> distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

SurfaceData emit_surface(const StudyResult& result, SurfaceMetric metric, Scheme scheme, const std::string& x_name,
                         const std::string& y_name, const std::string& scenario) {
  if (x_name == y_name) throw Error(ErrorCode::InvalidInput, "surface axes must differ");
  std::string other;
  for (const char* n : {"fsp_size", "fsp_bid", "demand"})
    if (n != x_name && n != y_name) other = n;
  std::vector<const GridPoint*> points;
  std::vector<double> xs, ys, rest;
  for (const auto& p : result.points) {
    if (p.scenario != scenario) continue;
    points.push_back(&p);
    xs.push_back(factor(p.factors, x_name));
    ys.push_back(factor(p.factors, y_name));
    rest.push_back(factor(p.factors, other));
  }
  if (points.empty()) throw Error(ErrorCode::EmptyGrid, "no grid points for scenario " + scenario);
  if (distinct(rest).size() > 1)
    throw Error(ErrorCode::InvalidInput, "surface needs a single " + other + " value; the study sweeps it");
  xs = distinct(xs);
  ys = distinct(ys);
  std::vector<std::vector<std::optional<double>>> values(xs.size(), std::vector<std::optional<double>>(ys.size()));
  for (const GridPoint* p : points) {
    if (!p->ok) continue;
    const auto* r = p->find(scheme);
    if (!r) throw Error(ErrorCode::MissingScheme, "study has no " + to_string(scheme) + " results");
    const auto ix = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), factor(p->factors, x_name)) - xs.begin());
    const auto iy = static_cast<std::size_t>(std::lower_bound(ys.begin(), ys.end(), factor(p->factors, y_name)) - ys.begin());
    values[ix][iy] = metric == SurfaceMetric::DsoCost ? r->annual_local_objective : r->annual_dso_nsf_mwh;
  }
  return make_surface(x_name, y_name, to_string(metric), std::move(xs), std::move(ys), std::move(values));
}

void write_long_csv(const SurfaceData& s, std::ostream& out, int decimals) {
  out << csv_field(s.x_name) << ',' << csv_field(s.y_name) << ',' << csv_field(s.metric) << '\n';
  for (std::size_t ix = 0; ix < s.xs.size(); ++ix)
    for (std::size_t iy = 0; iy < s.ys.size(); ++iy) {
      out << format_fixed(s.xs[ix], 6) << ',' << format_fixed(s.ys[iy], 6) << ',';
      if (s.values[ix][iy]) out << format_fixed(*s.values[ix][iy], decimals);
      out << '\n';
    }
}

void write_gnuplot_matrix(const SurfaceData& s, std::ostream& out, int decimals) {
  // "matrix nonuniform": first row holds the x axis, first column the y axis.
  out << s.xs.size();
  for (double x : s.xs) out << ' ' << format_fixed(x, 6);
  out << '\n';
  for (std::size_t iy = 0; iy < s.ys.size(); ++iy) {
    out << format_fixed(s.ys[iy], 6);
    for (std::size_t ix = 0; ix < s.xs.size(); ++ix)
      out << ' ' << (s.values[ix][iy] ? format_fixed(*s.values[ix][iy], decimals) : std::string("NaN"));
    out << '\n';
  }
}

void write_boundary_csv(const SurfaceData& s, std::ostream& out) {
  if (s.flat) {
    out << "entire grid flat\n";
    return;
  }
  out << csv_field(s.x_name) << ",boundary_" << csv_field(s.y_name) << '\n';
  for (std::size_t ix = 0; ix < s.xs.size(); ++ix)
    out << format_fixed(s.xs[ix], 6) << ',' << (s.boundary[ix] ? format_fixed(*s.boundary[ix], 6) : "none") << '\n';
}

// ---- generation mix ----

namespace {

int technology_rank(const std::string& t) {
  static const std::vector<std::string> order = {"thermal", "hydro", "nuclear", "wind", "solar"};
  const auto it = std::find(order.begin(), order.end(), t);
  return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

}  // namespace

MixTable emit_mix_report(const std::map<std::string, double>& twh_by_technology) {
  MixTable t;
  for (const auto& [tech, twh] : twh_by_technology) t.rows.push_back({tech, twh, 0});
  std::stable_sort(t.rows.begin(), t.rows.end(), [](const MixRow& a, const MixRow& b) {
    const int ra = technology_rank(a.technology), rb = technology_rank(b.technology);
    return ra != rb ? ra < rb : a.technology < b.technology;
  });
  for (const auto& r : t.rows) t.total_twh += r.twh;
  if (t.total_twh <= 0.0) return t;

  std::vector<double> remainder(t.rows.size());
  int assigned = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double exact = 100.0 * t.rows[i].twh / t.total_twh;
    t.rows[i].percent = static_cast<int>(std::floor(exact));
    remainder[i] = exact - t.rows[i].percent;
    assigned += t.rows[i].percent;
  }
  std::vector<std::size_t> order(t.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < 100 && k < order.size(); ++k, ++assigned) ++t.rows[order[k]].percent;
  t.total_percent = 100;
  return t;
}

MixTable emit_mix_report(const std::vector<DayAheadOutcome>& days, const std::vector<double>& weights,
                         const std::map<std::string, std::string>& technology_of_generator) {
  if (days.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "one weight per day is required");
  std::map<std::string, double> twh;
  for (std::size_t d = 0; d < days.size(); ++d)
    for (std::size_t g = 0; g < days[d].generators.size(); ++g) {
      const auto it = technology_of_generator.find(days[d].generators[g]);
      const std::string tech = it == technology_of_generator.end() ? "other" : it->second;
      twh[tech] += weights[d] * sum(days[d].qda[g]) / 1e6;
    }
  return emit_mix_report(twh);
}

void write_csv(const MixTable& t, std::ostream& out, int decimals) {
  out << "technology,twh,percent\n";
  for (const auto& r : t.rows)
    out << csv_field(r.technology) << ',' << format_fixed(r.twh, decimals) << ',' << r.percent << '\n';
  out << "total," << format_fixed(t.total_twh, decimals) << ',' << t.total_percent << '\n';
}

void write_json(const MixTable& t, std::ostream& out) {
  Ordered j;
  j["schema"] = "gridflex.generation_mix/1";
  Ordered rows = Ordered::array();
  for (const auto& r : t.rows) rows.push_back(Ordered{{"technology", r.technology}, {"twh", r.twh}, {"percent", r.percent}});
  j["rows"] = std::move(rows);
  j["total_twh"] = t.total_twh;
  j["total_percent"] = t.total_percent;
  out << j.dump(2) << '\n';
}

}  // namespace gridflex
