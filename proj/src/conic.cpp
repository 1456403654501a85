#include "errplan/conic.hpp"

#include "errplan/errors.hpp"

#include <algorithm>
#include <cmath>

namespace errplan {

namespace {

nlohmann::json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("expected number or +/-inf, got '" + s + "'");
  }
  return j.get<double>();
}

nlohmann::json expr_to_json(const AffineExpr& e) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : e.terms) terms.push_back({t.var, t.coef});
  return {{"terms", terms}, {"constant", e.constant}};
}

AffineExpr expr_from_json(const nlohmann::json& j) {
  AffineExpr e;
  for (const auto& t : j.at("terms")) e.terms.push_back({t.at(0).get<int>(), t.at(1).get<double>()});
  e.constant = j.value("constant", 0.0);
  return e;
}

const char* kind_name(Integrality k) {
  switch (k) {
    case Integrality::binary: return "binary";
    case Integrality::integer: return "integer";
    default: return "continuous";
  }
}

Integrality kind_from(const std::string& s) {
  if (s == "binary") return Integrality::binary;
  if (s == "integer") return Integrality::integer;
  if (s == "continuous") return Integrality::continuous;
  throw ParseError("unknown integrality '" + s + "'");
}

const char* sense_name(Sense s) {
  switch (s) {
    case Sense::le: return "<=";
    case Sense::ge: return ">=";
    default: return "=";
  }
}

Sense sense_from(const std::string& s) {
  if (s == "<=") return Sense::le;
  if (s == ">=") return Sense::ge;
  if (s == "=") return Sense::eq;
  throw ParseError("unknown sense '" + s + "'");
}

}  // namespace

int ConicProgram::add_variable(std::string name, double lower, double upper, Integrality kind,
                               BranchClass cls) {
  if (kind == Integrality::binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  vars_.push_back({std::move(name), lower, upper, kind, cls});
  c_.conservativeResize(static_cast<Eigen::Index>(vars_.size()));
  c_(c_.size() - 1) = 0.0;
  return static_cast<int>(vars_.size()) - 1;
}

void ConicProgram::set_objective(int var, double coef) { c_(var) = coef; }
void ConicProgram::add_objective(int var, double coef) { c_(var) += coef; }

int ConicProgram::add_linear(AffineExpr expr, Sense sense, double rhs, std::string name) {
  rhs -= expr.constant;
  expr.constant = 0.0;
  linear_.push_back({std::move(expr), sense, rhs, std::move(name)});
  return static_cast<int>(linear_.size()) - 1;
}

int ConicProgram::add_soc(std::vector<AffineExpr> rows, AffineExpr radius, std::string name) {
  soc_.push_back({std::move(rows), std::move(radius), std::move(name)});
  return static_cast<int>(soc_.size()) - 1;
}

int ConicProgram::num_integer() const {
  return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const VariableSpec& v) {
    return v.kind != Integrality::continuous;
  }));
}

int ConicProgram::count_kind(Integrality kind) const {
  return static_cast<int>(
      std::count_if(vars_.begin(), vars_.end(), [kind](const VariableSpec& v) { return v.kind == kind; }));
}

double ConicProgram::max_linear_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const auto& row : linear_) {
    const double lhs = row.expr.eval(x);
    double viol = 0.0;
    switch (row.sense) {
      case Sense::le: viol = lhs - row.rhs; break;
      case Sense::ge: viol = row.rhs - lhs; break;
      case Sense::eq: viol = std::abs(lhs - row.rhs); break;
    }
    worst = std::max(worst, viol);
  }
  return worst;
}

double ConicProgram::max_soc_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (const auto& cone : soc_) {
    double sq = 0.0;
    for (const auto& r : cone.rows) {
      const double v = r.eval(x);
      sq += v * v;
    }
    worst = std::max(worst, std::sqrt(sq) - cone.radius.eval(x));
  }
  return worst;
}

double ConicProgram::max_bound_violation(const Eigen::VectorXd& x) const {
  double worst = 0.0;
  for (size_t i = 0; i < vars_.size(); ++i) {
    const auto xi = x(static_cast<Eigen::Index>(i));
    worst = std::max({worst, vars_[i].lower - xi, xi - vars_[i].upper});
  }
  return worst;
}

double ConicProgram::max_violation(const Eigen::VectorXd& x) const {
  return std::max({max_linear_violation(x), max_soc_violation(x), max_bound_violation(x)});
}

void ConicProgram::validate() const {
  const int n = num_variables();
  auto check_expr = [n](const AffineExpr& e, const std::string& where) {
    for (const auto& t : e.terms) {
      if (t.var < 0 || t.var >= n)
        throw ValidationError(where + ": reference to unknown variable " + std::to_string(t.var));
      if (!std::isfinite(t.coef)) throw ValidationError(where + ": non-finite coefficient");
    }
  };
  for (int i = 0; i < n; ++i) {
    const auto& v = vars_[static_cast<size_t>(i)];
    if (v.lower > v.upper)
      throw ValidationError("variable '" + v.name + "': lower bound exceeds upper bound");
    if (v.kind == Integrality::binary && (v.lower < 0.0 || v.upper > 1.0))
      throw ValidationError("variable '" + v.name + "': binary bounds must lie in [0,1]");
  }
  for (size_t k = 0; k < linear_.size(); ++k)
    check_expr(linear_[k].expr, "linear row " + std::to_string(k) + " '" + linear_[k].name + "'");
  for (size_t k = 0; k < soc_.size(); ++k) {
    const std::string where = "cone " + std::to_string(k) + " '" + soc_[k].name + "'";
    if (soc_[k].rows.empty()) throw ValidationError(where + ": empty cone");
    for (const auto& r : soc_[k].rows) check_expr(r, where);
    check_expr(soc_[k].radius, where);
  }
}

int ConicProgram::find_variable(const std::string& name) const {
  for (size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

nlohmann::json ConicProgram::to_json() const {
  nlohmann::json vars = nlohmann::json::array();
  for (size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    vars.push_back({{"id", i},
                    {"name", v.name},
                    {"lower", number_to_json(v.lower)},
                    {"upper", number_to_json(v.upper)},
                    {"integrality", kind_name(v.kind)},
                    {"branch_class", static_cast<int>(v.branch_class)}});
  }
  nlohmann::json objective = nlohmann::json::array();
  for (Eigen::Index i = 0; i < c_.size(); ++i)
    if (c_(i) != 0.0) objective.push_back({i, c_(i)});
  nlohmann::json lin = nlohmann::json::array();
  for (const auto& row : linear_)
    lin.push_back({{"name", row.name},
                   {"coeffs", expr_to_json(row.expr)["terms"]},
                   {"sense", sense_name(row.sense)},
                   {"rhs", row.rhs}});
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& cone : soc_) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cone.rows) rows.push_back(expr_to_json(r));
    cones.push_back({{"name", cone.name}, {"rows", rows}, {"radius", expr_to_json(cone.radius)}});
  }
  return {{"format", "errplan-conic-program/1"},
          {"variables", vars},
          {"objective", {{"coeffs", objective}, {"offset", offset_}}},
          {"linear_constraints", lin},
          {"soc_constraints", cones}};
}

ConicProgram ConicProgram::from_json(const nlohmann::json& j) {
  ConicProgram p;
  try {
    for (const auto& v : j.at("variables")) {
      p.add_variable(v.at("name").get<std::string>(), number_from_json(v.at("lower")),
                     number_from_json(v.at("upper")), kind_from(v.at("integrality").get<std::string>()),
                     static_cast<BranchClass>(v.value("branch_class", 3)));
    }
    for (const auto& t : j.at("objective").at("coeffs")) p.set_objective(t.at(0).get<int>(), t.at(1).get<double>());
    p.set_objective_offset(j.at("objective").value("offset", 0.0));
    for (const auto& row : j.at("linear_constraints")) {
      AffineExpr e = expr_from_json({{"terms", row.at("coeffs")}});
      p.add_linear(std::move(e), sense_from(row.at("sense").get<std::string>()), row.at("rhs").get<double>(),
                   row.value("name", std::string{}));
    }
    for (const auto& cone : j.at("soc_constraints")) {
      std::vector<AffineExpr> rows;
      for (const auto& r : cone.at("rows")) rows.push_back(expr_from_json(r));
      p.add_soc(std::move(rows), expr_from_json(cone.at("radius")), cone.value("name", std::string{}));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed conic program: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace errplan
