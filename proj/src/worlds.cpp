#include "gridflex/worlds.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <tuple>

namespace gridflex::worlds {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Evening-peaking load shape with a smaller morning shoulder, about 0.65 to 1.05.
double load_shape(int h) {
  const double hh = static_cast<double>(h % 24);
  return 0.65 + 0.35 * std::exp(-(hh - 18.0) * (hh - 18.0) / 18.0) + 0.15 * std::exp(-(hh - 9.0) * (hh - 9.0) / 8.0);
}

double solar_shape(int h) {
  const double hh = static_cast<double>(h % 24);
  return hh < 6.0 || hh > 18.0 ? 0.0 : std::sin(kPi * (hh - 6.0) / 12.0);
}

struct Draw {
  std::mt19937_64 rng;
  explicit Draw(std::uint64_t seed) : rng(seed) {}
  double operator()(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

Node node(int id, const std::string& op, double base, int hours, bool shaped = true) {
  Node n;
  n.id = id;
  n.zone = "Z1";
  n.operator_id = op;
  for (int h = 0; h < hours; ++h) n.demand.push_back(shaped ? base * load_shape(h) : base);
  return n;
}

Line line(const std::string& id, int from, int to, double x, double pmax) { return {id, from, to, x, -pmax, pmax}; }

Generator generator(const std::string& id, int node, double cap, double bid, const std::string& tech) {
  Generator g;
  g.id = id;
  g.node = node;
  g.zone = "Z1";
  g.technology = tech;
  g.capacity = cap;
  g.bid = bid;
  return g;
}

Fsp fsp(const std::string& id, int node, FspKind kind, double cap, double bid) {
  Fsp f;
  f.id = id;
  f.node = node;
  f.kind = kind;
  f.cap_up = {cap};
  f.cap_down = {cap};
  f.bid = bid;
  return f;
}

Network skeleton(const std::string& name, int hours) {
  Network net;
  net.name = name;
  net.horizon = hours;
  net.base_power = 100.0;
  net.zones = {{"Z1"}};
  net.operators = {{"T", OperatorType::TSO}, {"D", OperatorType::DSO}};
  return net;
}

InterfaceSubstation interface(const std::string& id, int tso, int dso, const std::string& line_id,
                              std::vector<SubscriptionLevel> levels) {
  InterfaceSubstation s;
  s.id = id;
  s.tso_node = tso;
  s.dso_node = dso;
  s.line = line_id;
  s.levels = std::move(levels);
  return s;
}

}  // namespace

Network desk_instance(std::uint64_t seed, int hours) {
  Draw u(seed);
  Network net = skeleton("desk-" + std::to_string(seed), hours);
  for (int i = 1; i <= 8; ++i) net.nodes.push_back(node(i, "T", u(15, 45), hours));
  for (int i = 101; i <= 106; ++i) net.nodes.push_back(node(i, "D", u(6, 14), hours));

  for (int i = 1; i <= 8; ++i) {
    const int j = i % 8 + 1;
    net.lines.push_back(line("t" + std::to_string(i) + "_" + std::to_string(j), i, j, u(0.05, 0.12), u(180, 260)));
  }
  net.lines.push_back(line("t1_5", 1, 5, u(0.08, 0.15), u(150, 220)));
  net.lines.push_back(line("t3_7", 3, 7, u(0.08, 0.15), u(150, 220)));
  net.lines[static_cast<std::size_t>(u.pick(0, 7))].p_max = u(35, 70);
  for (auto& l : net.lines) l.p_min = -l.p_max;
  for (int i = 101; i <= 106; ++i) {
    const int j = i == 106 ? 101 : i + 1;
    net.lines.push_back(line("d" + std::to_string(i) + "_" + std::to_string(j), i, j, u(0.1, 0.25), u(20, 40)));
  }
  net.lines.push_back(line("d101_104", 101, 104, u(0.1, 0.25), u(20, 40)));
  net.lines.push_back(line("b2_101", 2, 101, u(0.2, 0.3), 80));
  net.lines.push_back(line("b6_104", 6, 104, u(0.2, 0.3), 80));
  net.interfaces.push_back(interface("S1", 2, 101, "b2_101", {{u(15, 25), 0.0}, {kInf, u(40, 120)}}));
  net.interfaces.push_back(interface("S2", 6, 104, "b6_104", {{u(15, 25), 0.0}, {kInf, u(40, 120)}}));

  Generator nuc = generator("nuclear", 1, 120, 8, "nuclear");
  nuc.min_dispatch = 0.5;
  nuc.min_uptime = 6;
  nuc.cycling_cost = 5;
  nuc.initial_on = true;
  net.generators.push_back(nuc);
  net.generators.push_back(generator("hydro", 4, 150, u(12, 20), "hydro"));
  Generator hydro2 = generator("hydro2", 3, 100, u(25, 35), "hydro");
  hydro2.offers_flexibility = true;
  net.generators.push_back(hydro2);
  Generator thermal = generator("thermal", 6, 120, u(45, 70), "thermal");
  thermal.min_dispatch = 0.3;
  thermal.min_uptime = 3;
  thermal.cycling_cost = 3;
  thermal.initial_on = false;
  thermal.offers_flexibility = true;
  net.generators.push_back(thermal);
  Generator wind = generator("wind", 8, 80, 0, "wind");
  wind.is_res = true;
  wind.offers_flexibility = true;
  double w = u(0.3, 0.6);
  for (int h = 0; h < hours; ++h) {
    w = std::clamp(w + u(-0.08, 0.08), 0.1, 0.9);
    wind.profile.push_back(w);
  }
  net.generators.push_back(wind);
  Generator solar = generator("solar", 103, 15, 0, "solar");
  solar.is_res = true;
  for (int h = 0; h < hours; ++h) solar.profile.push_back(solar_shape(h));
  net.generators.push_back(solar);

  Fsp dr_t = fsp("dr_t", u.pick(1, 8), FspKind::DR, u(5, 15), u(40, 90));
  dr_t.dr_max_hours = 4;
  net.fsps.push_back(dr_t);
  Fsp ess_t = fsp("ess_t", u.pick(1, 8), FspKind::ESS, 20, u(15, 30));
  ess_t.energy = 60;
  ess_t.efficiency = 0.9;
  net.fsps.push_back(ess_t);
  Fsp dr_d = fsp("dr_d", 102, FspKind::DR, u(3, 6), u(20, 80));
  dr_d.dr_max_hours = 4;
  net.fsps.push_back(dr_d);
  const double ess_cap = u(3, 6);
  Fsp ess_d = fsp("ess_d", 105, FspKind::ESS, ess_cap, u(10, 40));
  ess_d.energy = 2 * ess_cap;
  ess_d.efficiency = 0.9;
  net.fsps.push_back(ess_d);
  net.fsps.push_back(fsp("gen_d", 106, FspKind::GENERIC, u(4, 8), u(30, 70)));
  Fsp pv = fsp("pv_d", 103, FspKind::RES, 0, u(5, 15));
  pv.cap_up.clear();
  pv.cap_down.clear();
  pv.generator = "solar";
  pv.max_flex_up = 0.0;
  pv.max_flex_down = 1.0;
  net.fsps.push_back(pv);
  return net;
}

Network subscription_relief(double fsp_mw) {
  Network net = skeleton("subscription-relief", 24);
  net.nodes = {node(1, "T", 0, 24, false), node(2, "T", 0, 24, false), node(11, "D", 25, 24, false),
               node(12, "D", 20, 24, false), node(13, "D", 15, 24, false)};
  net.lines = {line("t1_2", 1, 2, 0.1, 400), line("b2_11", 2, 11, 0.05, 200), line("d11_12", 11, 12, 0.1, 100),
               line("d12_13", 12, 13, 0.1, 100), line("d13_11", 13, 11, 0.1, 100)};
  net.interfaces = {interface("S1", 2, 11, "b2_11", {{50, 0.0}, {kInf, 100}})};
  net.generators = {generator("hydro", 1, 300, 20, "hydro")};
  if (fsp_mw > 0.0) net.fsps = {fsp("cheap", 13, FspKind::GENERIC, fsp_mw, 10)};
  return net;
}

Network congestible_dso() {
  Network net = skeleton("congestible-dso", 24);
  net.nodes = {node(1, "T", 0, 24), node(2, "T", 0, 24), node(21, "D", 0, 24), node(22, "D", 5, 24),
               node(23, "D", 6, 24), node(24, "D", 5, 24)};
  net.lines = {line("t1_2", 1, 2, 0.1, 400),    line("b2_21", 2, 21, 0.05, 200), line("d21_22", 21, 22, 0.1, 10),
               line("d22_23", 22, 23, 0.1, 10), line("d23_24", 23, 24, 0.1, 10), line("d24_21", 24, 21, 0.1, 10)};
  net.interfaces = {interface("S1", 2, 21, "b2_21", {})};
  net.generators = {generator("hydro", 1, 300, 20, "hydro")};
  net.fsps = {fsp("f22", 22, FspKind::GENERIC, 2, 30), fsp("f23", 23, FspKind::GENERIC, 3, 35),
              fsp("f24", 24, FspKind::GENERIC, 2, 30)};
  return net;
}

Network replication_base() {
  Network net = skeleton("replication-base", 24);
  net.nodes = {node(1, "T", 20, 24), node(2, "T", 30, 24), node(3, "T", 20, 24), node(31, "D", 12, 24),
               node(32, "D", 10, 24), node(33, "D", 12, 24), node(34, "D", 10, 24)};
  net.lines = {line("t1_2", 1, 2, 0.1, 300),     line("t2_3", 2, 3, 0.1, 300),     line("t3_1", 3, 1, 0.1, 60),
               line("b3_31", 3, 31, 0.05, 120),  line("d31_32", 31, 32, 0.1, 60),  line("d32_33", 32, 33, 0.1, 60),
               line("d33_34", 33, 34, 0.1, 60),  line("d34_31", 34, 31, 0.1, 60)};
  net.interfaces = {interface("S1", 3, 31, "b3_31", {{30, 0.0}, {kInf, 80}})};
  net.generators = {generator("hydro", 1, 250, 15, "hydro"), generator("thermal", 2, 120, 50, "thermal")};
  net.generators[1].offers_flexibility = true;
  Fsp dr = fsp("dr33", 33, FspKind::DR, 4, 40);
  dr.dr_max_hours = 6;
  net.fsps = {dr, fsp("flex2", 2, FspKind::GENERIC, 20, 25)};
  return net;
}

Replication replication_wind_farms() {
  Replication r;
  for (const auto& [id, node, phase] : std::vector<std::tuple<std::string, int, double>>{{"wind_a", 32, 0.0}, {"wind_b", 34, 1.5}}) {
    Generator g = generator(id, node, 12, 0, "wind");
    g.is_res = true;
    for (int h = 0; h < 24; ++h) g.profile.push_back(0.45 + 0.25 * std::sin(2 * kPi * h / 24.0 + phase));
    r.generators.push_back(g);
  }
  return r;
}

DemandData synthetic_year(const Network& net, int year, std::uint64_t seed) {
  namespace chr = std::chrono;
  Draw u(seed);
  DemandData data;
  data.first_year = year;
  const chr::sys_days start{chr::year{year} / chr::January / 1};
  const auto days = (chr::sys_days{chr::year{year + 1} / chr::January / 1} - start).count();
  for (const auto& n : net.nodes) {
    data.nodes.push_back(n.id);
    const double base = n.demand.empty() ? 0.0 : std::accumulate(n.demand.begin(), n.demand.end(), 0.0) / n.demand.size();
    Series row;
    for (long d = 0; d < days; ++d) {
      const chr::sys_days day = start + chr::days{d};
      const auto month = static_cast<unsigned>(chr::year_month_day{day}.month());
      const Season s = season_of_month(static_cast<int>(month));
      const double season = s == Season::Winter ? 1.25 : s == Season::Spring ? 1.0 : s == Season::Summer ? 0.85 : 1.05;
      const auto wd = chr::weekday{day}.c_encoding();
      const double daytype = wd == 0 || wd == 6 ? 0.85 : 1.0;
      for (int h = 0; h < 24; ++h) row.push_back(base * season * daytype * load_shape(h) * u(0.97, 1.03));
    }
    data.mw.push_back(std::move(row));
  }
  return data;
}

namespace {

Network radial_chain() {
  Network net = skeleton("radial-chain", 24);
  net.operators = {{"T", OperatorType::TSO}};
  net.nodes = {node(1, "T", 0, 24), node(2, "T", 10, 24), node(3, "T", 55, 24)};
  net.lines = {line("l1_2", 1, 2, 0.1, 100), line("l2_3", 2, 3, 0.1, 50)};
  net.generators = {generator("hydro", 1, 120, 10, "hydro")};
  net.fsps = {fsp("down1", 1, FspKind::GENERIC, 20, 5), fsp("up3", 3, FspKind::GENERIC, 20, 7)};
  net.fsps[0].cap_up = {0};
  net.fsps[1].cap_down = {0};
  return net;
}

Network meshed_pair() {
  Network net = skeleton("meshed-pair", 24);
  net.nodes = {node(1, "T", 20, 24),  node(2, "T", 25, 24),  node(3, "T", 20, 24),  node(4, "T", 25, 24),
               node(11, "D", 10, 24), node(12, "D", 12, 24), node(13, "D", 10, 24), node(14, "D", 8, 24)};
  net.lines = {line("t1_2", 1, 2, 0.1, 200),     line("t2_3", 2, 3, 0.08, 200),    line("t3_4", 3, 4, 0.1, 200),
               line("t4_1", 4, 1, 0.12, 200),    line("d11_12", 11, 12, 0.2, 30),  line("d12_13", 12, 13, 0.2, 30),
               line("d13_14", 13, 14, 0.2, 30),  line("d14_11", 14, 11, 0.2, 30),  line("b2_11", 2, 11, 0.05, 80),
               line("b4_13", 4, 13, 0.07, 80)};
  net.interfaces = {interface("S1", 2, 11, "b2_11", {{20, 0.0}, {kInf, 60}}),
                    interface("S2", 4, 13, "b4_13", {{20, 0.0}, {kInf, 60}})};
  net.generators = {generator("hydro", 1, 200, 15, "hydro"), generator("thermal", 3, 100, 55, "thermal")};
  net.generators[1].offers_flexibility = true;
  Fsp ess = fsp("ess12", 12, FspKind::ESS, 4, 20);
  ess.energy = 8;
  ess.efficiency = 0.9;
  net.fsps = {ess, fsp("flex14", 14, FspKind::GENERIC, 5, 35)};
  return net;
}

}  // namespace

std::vector<NamedNetwork> bundled() {
  return {{"radial_chain", radial_chain()},
          {"meshed_pair", meshed_pair()},
          {"subscription_relief", subscription_relief()},
          {"congestible_dso", congestible_dso()},
          {"replication_base", replication_base()},
          {"desk_1", desk_instance(1)}};
}

}  // namespace gridflex::worlds
