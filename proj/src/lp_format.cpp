#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "gridflex/mpbuilder.hpp"

namespace gridflex::mp {
namespace {

// LP-format identifiers may not start with a digit or contain operators.
std::string sanitize(const std::string& name, const char* prefix, std::size_t index) {
  if (name.empty()) return prefix + std::to_string(index);
  std::string out;
  for (char ch : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') out.insert(0, "_");
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_terms(std::ostream& out, const std::vector<std::pair<std::string, double>>& terms) {
  if (terms.empty()) {
    out << " 0";
    return;
  }
  std::size_t on_line = 0;
  for (const auto& [name, coef] : terms) {
    out << (coef < 0.0 ? " - " : " + ") << num(std::abs(coef)) << ' ' << name;
    if (++on_line % 8 == 0) out << "\n  ";
  }
}

}  // namespace

void write_lp_format(const MathProgram& prog, std::ostream& out) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < prog.num_variables(); ++j) names.push_back(sanitize(prog.variables()[j].name, "x", j));

  out << "\\ gridflex model\nMinimize\n obj:";
  std::vector<std::pair<std::string, double>> obj;
  for (std::size_t j = 0; j < prog.num_variables(); ++j)
    if (prog.objective()[j] != 0.0) obj.emplace_back(names[j], prog.objective()[j]);
  write_terms(out, obj);
  if (prog.objective_offset() != 0.0) out << (prog.objective_offset() < 0 ? " - " : " + ") << num(std::abs(prog.objective_offset()));
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < prog.num_constraints(); ++r) {
    const auto& row = prog.constraints()[r];
    std::vector<std::pair<std::string, double>> terms;
    for (const auto& t : row.terms) terms.emplace_back(names[t.var.index], t.coef);
    out << ' ' << sanitize(row.name, "c", r) << ':';
    write_terms(out, terms);
    switch (row.sense) {
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::Equal: out << " = "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
    }
    out << num(row.rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < prog.num_variables(); ++j) {
    const auto& v = prog.variables()[j];
    if (v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0) continue;
    if (v.lower == v.upper) {
      out << ' ' << names[j] << " = " << num(v.lower) << '\n';
    } else if (v.lower == -kInf && v.upper == kInf) {
      out << ' ' << names[j] << " free\n";
    } else {
      out << ' ' << (v.lower == -kInf ? std::string("-inf") : num(v.lower)) << " <= " << names[j]
          << " <= " << (v.upper == kInf ? std::string("+inf") : num(v.upper)) << '\n';
    }
  }
  bool header = false;
  for (std::size_t j = 0; j < prog.num_variables(); ++j) {
    if (prog.variables()[j].kind != VarKind::Binary) continue;
    if (!header) {
      out << "Binaries\n";
      header = true;
    }
    out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

}  // namespace gridflex::mp
