#include "evcoord/conic/program.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace evcoord::conic {

LinExpr LinExpr::compacted() const {
  LinExpr out;
  out.constant_ = constant_;
  if (terms_.empty()) return out;
  std::map<int, double> acc;
  for (const auto& [v, c] : terms_) acc[v] += c;
  out.terms_.reserve(acc.size());
  for (const auto& [v, c] : acc)
    if (c != 0.0) out.terms_.emplace_back(v, c);
  return out;
}

double LinExpr::evaluate(const std::vector<double>& values) const {
  double s = constant_;
  for (const auto& [v, c] : terms_) s += c * values.at(static_cast<size_t>(v));
  return s;
}

VariableRef ConicProgram::add_variable(std::string name, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper))
    throw std::invalid_argument("add_variable: NaN bound on " + name);
  if (lower > upper)
    throw std::invalid_argument("add_variable: lower > upper on " + name);
  vars_.push_back(Variable{std::move(name), lower, upper});
  return VariableRef{static_cast<int>(vars_.size()) - 1};
}

void ConicProgram::check_expr(const LinExpr& e, const char* where) const {
  for (const auto& [v, c] : e.terms()) {
    if (v < 0 || v >= num_variables())
      throw std::invalid_argument(std::string(where) + ": expression references undeclared variable");
    if (!std::isfinite(c))
      throw std::invalid_argument(std::string(where) + ": non-finite coefficient");
  }
  if (!std::isfinite(e.constant()))
    throw std::invalid_argument(std::string(where) + ": non-finite constant");
}

void ConicProgram::add_linear_cost(const LinExpr& e) {
  check_expr(e, "add_linear_cost");
  const LinExpr c = e.compacted();
  obj_linear_.insert(obj_linear_.end(), c.terms().begin(), c.terms().end());
  obj_constant_ += c.constant();
}

void ConicProgram::add_quadratic_cost(double weight, const LinExpr& expr) {
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("add_quadratic_cost: weight must be finite and >= 0 (objective must stay PSD)");
  check_expr(expr, "add_quadratic_cost");
  if (weight == 0.0) return;
  obj_quad_.push_back(QuadCost{weight, expr.compacted()});
}

EqRef ConicProgram::add_equality(const LinExpr& lhs, const LinExpr& rhs) {
  check_expr(lhs, "add_equality");
  check_expr(rhs, "add_equality");
  const LinExpr d = (lhs - rhs).compacted();
  eqs_.push_back(LinearRow{d.terms(), -d.constant()});
  return EqRef{static_cast<int>(eqs_.size()) - 1};
}

void ConicProgram::add_inequality(const LinExpr& lhs, const LinExpr& rhs) {
  check_expr(lhs, "add_inequality");
  check_expr(rhs, "add_inequality");
  const LinExpr d = (lhs - rhs).compacted();
  ineqs_.push_back(LinearRow{d.terms(), -d.constant()});
}

void ConicProgram::add_rotated_cone(LinExpr t, LinExpr u, std::vector<LinExpr> w) {
  check_expr(t, "add_rotated_cone");
  check_expr(u, "add_rotated_cone");
  for (const auto& e : w) check_expr(e, "add_rotated_cone");
  cones_.push_back(RotatedCone{t.compacted(), u.compacted(), std::move(w)});
}

double ConicProgram::objective_at(const std::vector<double>& values) const {
  double obj = obj_constant_;
  for (const auto& [v, c] : obj_linear_) obj += c * values.at(static_cast<size_t>(v));
  for (const auto& q : obj_quad_) {
    const double e = q.expr.evaluate(values);
    obj += q.weight * e * e;
  }
  return obj;
}

namespace {
void print_row(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
               const std::vector<ConicProgram::Variable>& vars) {
  bool first = true;
  for (const auto& [v, c] : terms) {
    if (!first) os << (c >= 0 ? " + " : " - ");
    else if (c < 0) os << "-";
    const double a = std::abs(c);
    const auto& name = vars[static_cast<size_t>(v)].name;
    if (a != 1.0) os << a << "*";
    os << (name.empty() ? "x" + std::to_string(v) : name);
    first = false;
  }
  if (first) os << "0";
}

void print_expr(std::ostream& os, const LinExpr& e,
                const std::vector<ConicProgram::Variable>& vars) {
  const LinExpr c = e.compacted();
  print_row(os, c.terms(), vars);
  if (c.constant() != 0.0) os << " + " << c.constant();
}
}  // namespace

void ConicProgram::dump(std::ostream& os) const {
  os << "minimize\n  linear: ";
  print_row(os, obj_linear_, vars_);
  if (obj_constant_ != 0.0) os << " + " << obj_constant_;
  os << "\n";
  for (const auto& q : obj_quad_) {
    os << "  + " << q.weight << " * (";
    print_expr(os, q.expr, vars_);
    os << ")^2\n";
  }
  os << "subject to\n";
  for (const auto& r : eqs_) {
    os << "  ";
    print_row(os, r.terms, vars_);
    os << " == " << r.rhs << "\n";
  }
  for (const auto& r : ineqs_) {
    os << "  ";
    print_row(os, r.terms, vars_);
    os << " <= " << r.rhs << "\n";
  }
  for (const auto& c : cones_) {
    os << "  (";
    print_expr(os, c.t, vars_);
    os << ") * (";
    print_expr(os, c.u, vars_);
    os << ") >= ||(";
    for (size_t i = 0; i < c.w.size(); ++i) {
      if (i) os << ", ";
      print_expr(os, c.w[i], vars_);
    }
    os << ")||^2\n";
  }
  for (size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    if (v.lower == -kInf && v.upper == kInf) continue;
    os << "  " << v.lower << " <= " << (v.name.empty() ? "x" + std::to_string(j) : v.name)
       << " <= " << v.upper << "\n";
  }
}

}  // namespace evcoord::conic
