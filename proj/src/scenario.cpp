#include "gridflex/scenario.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "gridflex/error.hpp"

namespace gridflex {

namespace chr = std::chrono;

std::string to_string(Season s) {
  switch (s) {
    case Season::Winter: return "winter";
    case Season::Spring: return "spring";
    case Season::Summer: return "summer";
    case Season::Autumn: return "autumn";
  }
  return "?";
}

std::string to_string(LoadLevel l) { return l == LoadLevel::High ? "high" : "low"; }

Season season_of_month(int month) {
  if (month == 12 || month <= 2) return Season::Winter;
  if (month <= 5) return Season::Spring;
  if (month <= 8) return Season::Summer;
  return Season::Autumn;
}

namespace {

struct Stamp {
  chr::sys_days day;
  int hour = 0;
};

Stamp parse_stamp(const std::string& text) {
  int y = 0, m = 0, d = 0, h = 0;
  char sep = 0;
  std::istringstream in(text);
  char dash1 = 0, dash2 = 0;
  in >> y >> dash1 >> m >> dash2 >> d >> sep >> h;
  const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)}, chr::day{static_cast<unsigned>(d)}};
  if (!in || dash1 != '-' || dash2 != '-' || (sep != 'T' && sep != ' ') || !ymd.ok() || h < 0 || h > 23)
    throw Error(ErrorCode::InvalidInput, "bad timestamp '" + text + "'");
  return {chr::sys_days{ymd}, h};
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

double distance2(const Series& a, const Series& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

double mean(const Series& s) { return s.empty() ? 0.0 : std::accumulate(s.begin(), s.end(), 0.0) / s.size(); }

Series centroid(const std::vector<Series>& vecs, const std::vector<std::size_t>& members) {
  Series c(vecs.front().size(), 0.0);
  for (const auto m : members)
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += vecs[m][k];
  for (auto& v : c) v /= static_cast<double>(members.size());
  return c;
}

// Two-means with farthest-point initialisation. Returns member indices of
// the two clusters; identical centres fall back to a chronological half split.
std::array<std::vector<std::size_t>, 2> two_means(const std::vector<Series>& vecs) {
  const std::size_t n = vecs.size();
  auto half_split = [&] {
    std::array<std::vector<std::size_t>, 2> out;
    for (std::size_t i = 0; i < n; ++i) out[i < (n + 1) / 2 ? 0 : 1].push_back(i);
    return out;
  };
  if (n < 2) return half_split();
  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (mean(vecs[i]) > mean(vecs[first])) first = i;
  std::size_t second = first;
  double far = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (const double d = distance2(vecs[i], vecs[first]); d > far) {
      far = d;
      second = i;
    }
  if (far == 0.0) return half_split();
  std::array<Series, 2> centre{vecs[first], vecs[second]};
  std::vector<int> label(n, -1);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int l = distance2(vecs[i], centre[1]) < distance2(vecs[i], centre[0]) ? 1 : 0;
      if (l != label[i]) {
        label[i] = l;
        changed = true;
      }
    }
    std::array<std::vector<std::size_t>, 2> members;
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(label[i])].push_back(i);
    if (members[0].empty() || members[1].empty()) return half_split();
    if (!changed) return members;
    centre = {centroid(vecs, members[0]), centroid(vecs, members[1])};
  }
  std::array<std::vector<std::size_t>, 2> members;
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(label[i])].push_back(i);
  return members;
}

}  // namespace

DemandData read_demand_csv(std::istream& in) {
  std::map<std::pair<long, int>, std::map<int, double>> rows;  // (day, hour) -> node -> MW
  std::string line;
  std::size_t lineno = 0;
  std::set<int> nodes;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(trim(c));
    if (cells.size() != 3) throw Error(ErrorCode::InvalidInput, "demand CSV line " + std::to_string(lineno) + " needs 3 fields");
    if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(cells[0].front()))) continue;
    const Stamp st = parse_stamp(cells[0]);
    int node = 0;
    double mw = 0.0;
    try {
      std::size_t used = 0;
      node = std::stoi(cells[1], &used);
      if (used != cells[1].size()) throw std::invalid_argument("node");
      mw = std::stod(cells[2], &used);
      if (used != cells[2].size()) throw std::invalid_argument("mw");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidInput, "demand CSV line " + std::to_string(lineno) + " has a bad node or MW value");
    }
    if (!std::isfinite(mw) || mw < 0.0)
      throw Error(ErrorCode::InvalidInput, "demand CSV line " + std::to_string(lineno) + " has negative or non-finite MW");
    const long key = st.day.time_since_epoch().count();
    rows[{key, st.hour}][node] = mw;
    nodes.insert(node);
  }
  DemandData data;
  if (rows.empty()) return data;
  const chr::sys_days start{chr::days{rows.begin()->first.first}};
  const chr::year_month_day ymd{start};
  data.first_year = static_cast<int>(ymd.year());
  data.first_month = static_cast<int>(static_cast<unsigned>(ymd.month()));
  data.first_day = static_cast<int>(static_cast<unsigned>(ymd.day()));
  data.nodes.assign(nodes.begin(), nodes.end());
  const long first_hour = rows.begin()->first.first * 24 + rows.begin()->first.second;
  data.mw.assign(data.nodes.size(), Series(rows.size(), 0.0));
  std::size_t t = 0;
  for (const auto& [key, values] : rows) {
    if (key.first * 24 + key.second != first_hour + static_cast<long>(t))
      throw Error(ErrorCode::InvalidInput, "demand CSV hours are not contiguous");
    if (values.size() != nodes.size()) throw Error(ErrorCode::InvalidInput, "demand CSV misses a node in some hour");
    for (std::size_t k = 0; k < data.nodes.size(); ++k) data.mw[k][t] = values.at(data.nodes[k]);
    ++t;
  }
  return data;
}

DemandData load_demand_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open demand CSV " + path);
  return read_demand_csv(in);
}

std::vector<RepresentativeDay> cluster_representative_days(const DemandData& data, const ClusterOptions& opts) {
  const chr::year_month_day ymd{chr::year{data.first_year}, chr::month{static_cast<unsigned>(data.first_month)},
                                chr::day{static_cast<unsigned>(data.first_day)}};
  if (!ymd.ok()) throw Error(ErrorCode::InvalidInput, "demand data has an invalid start date");
  const chr::sys_days start{ymd};
  const auto year_len = static_cast<std::size_t>((chr::sys_days{ymd + chr::years{1}} - start).count());
  const std::size_t complete = data.hours() / 24;
  if (complete < 365 || data.nodes.empty())
    throw Error(ErrorCode::InsufficientData, "clustering needs one full year of hourly demand, got " +
                                                 std::to_string(complete) + " days");
  const std::size_t days = std::min(complete, year_len);

  std::vector<Series> total(days, Series(24, 0.0));
  std::vector<double> peak(data.nodes.size(), 0.0);
  for (std::size_t d = 0; d < days; ++d)
    for (std::size_t h = 0; h < 24; ++h)
      for (std::size_t k = 0; k < data.nodes.size(); ++k) {
        const double v = data.mw[k][d * 24 + h];
        total[d][h] += v;
        peak[k] = std::max(peak[k], v);
      }

  std::vector<RepresentativeDay> out;
  for (const Season season : {Season::Winter, Season::Spring, Season::Summer, Season::Autumn}) {
    std::vector<std::size_t> idx;
    std::vector<bool> weekend;
    for (std::size_t d = 0; d < days; ++d) {
      const chr::sys_days day = start + chr::days{static_cast<long>(d)};
      const chr::year_month_day date{day};
      if (season_of_month(static_cast<int>(static_cast<unsigned>(date.month()))) != season) continue;
      idx.push_back(d);
      const auto wd = chr::weekday{day}.c_encoding();
      weekend.push_back(wd == 0 || wd == 6);
    }
    std::vector<Series> vecs;
    for (const auto d : idx) vecs.push_back(total[d]);

    std::array<std::vector<std::size_t>, 2> groups;
    if (opts.split_by_day_type) {
      for (std::size_t i = 0; i < idx.size(); ++i) groups[weekend[i] ? 1 : 0].push_back(i);
      if (groups[0].empty() || groups[1].empty()) groups = two_means(vecs);
    } else {
      groups = two_means(vecs);
    }
    auto group_mean = [&](const std::vector<std::size_t>& g) {
      double s = 0.0;
      for (const auto i : g) s += mean(vecs[i]);
      return g.empty() ? 0.0 : s / static_cast<double>(g.size());
    };
    if (!opts.split_by_day_type && group_mean(groups[1]) > group_mean(groups[0])) std::swap(groups[0], groups[1]);

    for (int g = 0; g < 2; ++g) {
      RepresentativeDay rd;
      rd.season = season;
      rd.level = g == 0 ? LoadLevel::High : LoadLevel::Low;
      rd.label = to_string(season) + "_" + to_string(rd.level);
      rd.weight = static_cast<double>(groups[g].size());
      rd.nodes = data.nodes;
      rd.mw.assign(data.nodes.size(), Series(24, 0.0));
      for (const auto i : groups[g])
        for (std::size_t k = 0; k < data.nodes.size(); ++k)
          for (std::size_t h = 0; h < 24; ++h) rd.mw[k][h] += data.mw[k][idx[i] * 24 + h];
      rd.profile = rd.mw;
      for (std::size_t k = 0; k < data.nodes.size(); ++k)
        for (std::size_t h = 0; h < 24; ++h) {
          if (!groups[g].empty()) rd.mw[k][h] /= static_cast<double>(groups[g].size());
          rd.profile[k][h] = peak[k] > 0.0 ? rd.mw[k][h] / peak[k] : 0.0;
        }
      out.push_back(std::move(rd));
    }
  }
  return out;
}

Network with_day_demand(const Network& net, const RepresentativeDay& day) {
  Network out = net;
  out.horizon = 24;
  for (std::size_t k = 0; k < day.nodes.size(); ++k)
    for (auto& n : out.nodes)
      if (n.id == day.nodes[k]) n.demand = day.mw[k];
  return out;
}

std::vector<ImbalanceSeries> synthesize_imbalances(const Network& net, const std::vector<DayAheadOutcome>& days,
                                                   const std::vector<double>& weights, double annual_volume_mwh,
                                                   std::uint64_t seed, ImbalancePattern pattern) {
  if (days.size() != weights.size()) throw Error(ErrorCode::DimensionMismatch, "one weight per day-ahead outcome expected");
  if (!(annual_volume_mwh >= 0.0)) throw Error(ErrorCode::InvalidInput, "annual imbalance volume must be >= 0");
  double dispatched = 0.0;
  for (std::size_t d = 0; d < days.size(); ++d)
    for (const auto& row : days[d].qda) dispatched += weights[d] * std::accumulate(row.begin(), row.end(), 0.0);
  std::vector<ImbalanceSeries> out;
  if (annual_volume_mwh == 0.0) {
    for (const auto& da : days) out.push_back(zero_imbalances(net, da));
    return out;
  }
  if (!(dispatched > 0.0)) throw Error(ErrorCode::ZeroDispatch, "no day-ahead dispatch to allocate imbalances to");
  const double kappa = annual_volume_mwh / dispatched;
  std::mt19937_64 rng(seed);
  for (const auto& da : days) {
    std::vector<double> sign(static_cast<std::size_t>(da.horizon));
    for (std::size_t h = 0; h < sign.size(); ++h) sign[h] = h % 2 == 0 ? 1.0 : -1.0;
    if (pattern == ImbalancePattern::Random) std::shuffle(sign.begin(), sign.end(), rng);
    Table t = da.qda;
    for (auto& row : t)
      for (std::size_t h = 0; h < row.size(); ++h) row[h] *= sign[h] * kappa;
    out.push_back(make_imbalances(net, da, t));
  }
  return out;
}

namespace {

std::vector<double> grid(int count, double start, double step_tenths) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back((start * 10.0 + k * step_tenths) / 10.0);
  return g;
}

}  // namespace

std::vector<double> default_fsp_size_grid() { return grid(16, 0.0, 2.0); }
std::vector<double> default_fsp_bid_grid() { return grid(16, 0.0, 2.0); }
std::vector<double> default_demand_grid() { return grid(13, 0.8, 1.0); }

Network apply_sensitivity(const Network& net, const SensitivityFactors& f) {
  if (!(f.fsp_size >= 0.0) || !(f.fsp_bid >= 0.0) || !(f.demand >= 0.0))
    throw Error(ErrorCode::InvalidInput, "sensitivity factors must be >= 0");
  Network out = net;
  for (auto& fsp : out.fsps) {
    if (!out.is_dso_node(fsp.node)) continue;
    for (auto& v : fsp.cap_up) v *= f.fsp_size;
    for (auto& v : fsp.cap_down) v *= f.fsp_size;
    if (fsp.kind == FspKind::RES) {
      fsp.max_flex_up *= f.fsp_size;
      fsp.max_flex_down *= f.fsp_size;
    }
    fsp.bid *= f.fsp_bid;
  }
  for (auto& n : out.nodes)
    if (out.is_dso_node(n.id))
      for (auto& d : n.demand) d *= f.demand;
  return out;
}

Network inject_replication(const Network& net, const Replication& add) {
  Network out = net;
  auto check = [&](int node, const std::string& what) {
    if (!out.has_node(node) || !out.is_dso_node(node))
      throw Error(ErrorCode::UnknownNode, what + " targets node " + std::to_string(node) + ", not a DSO node");
  };
  for (Generator g : add.generators) {
    check(g.node, "generator " + g.id);
    g.is_res = true;
    if (g.zone.empty()) g.zone = out.node(g.node).zone;
    out.generators.push_back(std::move(g));
  }
  for (const Fsp& f : add.fsps) {
    check(f.node, "FSP " + f.id);
    out.fsps.push_back(f);
  }
  return out;
}

}  // namespace gridflex
