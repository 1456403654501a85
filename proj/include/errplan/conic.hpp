#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace errplan {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Integrality { continuous, binary, integer };

enum class Sense { le, eq, ge };

// Tie-break class used by the branching rule: when two candidates are equally
// fractional, crew variables are branched before line status, line status
// before resource-allocation integers, and everything else last.
enum class BranchClass { crew = 0, line = 1, mer = 2, other = 3 };

struct Term {
  int var = 0;
  double coef = 0.0;
};

// Sparse affine expression sum(coef * x[var]) + constant.
struct AffineExpr {
  std::vector<Term> terms;
  double constant = 0.0;

  AffineExpr() = default;
  AffineExpr(std::vector<Term> t, double c = 0.0) : terms(std::move(t)), constant(c) {}

  AffineExpr& add(int var, double coef) {
    if (coef != 0.0) terms.push_back({var, coef});
    return *this;
  }

  template <typename Derived>
  double eval(const Eigen::MatrixBase<Derived>& x) const {
    double v = constant;
    for (const auto& t : terms) v += t.coef * x(t.var);
    return v;
  }
};

struct VariableSpec {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  Integrality kind = Integrality::continuous;
  BranchClass branch_class = BranchClass::other;
};

// expr (sense) rhs; any constant inside expr is moved to the right side.
struct LinearConstraint {
  AffineExpr expr;
  Sense sense = Sense::le;
  double rhs = 0.0;
  std::string name;
};

// || (rows[0](z), ..., rows[k-1](z)) ||_2 <= radius(z)
struct SocConstraint {
  std::vector<AffineExpr> rows;
  AffineExpr radius;
  std::string name;
};

// Mixed-integer second-order cone program: minimize c'x + offset subject to
// linear rows, cones and variable bounds.
class ConicProgram {
 public:
  int add_variable(std::string name, double lower, double upper,
                   Integrality kind = Integrality::continuous,
                   BranchClass cls = BranchClass::other);

  void set_objective(int var, double coef);
  void add_objective(int var, double coef);
  void set_objective_offset(double offset) { offset_ = offset; }

  int add_linear(AffineExpr expr, Sense sense, double rhs, std::string name = {});
  int add_soc(std::vector<AffineExpr> rows, AffineExpr radius, std::string name = {});

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_linear() const { return static_cast<int>(linear_.size()); }
  int num_soc() const { return static_cast<int>(soc_.size()); }
  int num_integer() const;
  int count_kind(Integrality kind) const;

  const VariableSpec& variable(int i) const { return vars_.at(static_cast<size_t>(i)); }
  VariableSpec& variable(int i) { return vars_.at(static_cast<size_t>(i)); }
  const std::vector<VariableSpec>& variables() const { return vars_; }
  const std::vector<LinearConstraint>& linear() const { return linear_; }
  const std::vector<SocConstraint>& soc() const { return soc_; }
  const Eigen::VectorXd& objective() const { return c_; }
  double objective_offset() const { return offset_; }

  double evaluate_objective(const Eigen::VectorXd& x) const { return c_.dot(x) + offset_; }

  // Largest positive violation of linear rows / cones / bounds at x.
  double max_linear_violation(const Eigen::VectorXd& x) const;
  double max_soc_violation(const Eigen::VectorXd& x) const;
  double max_bound_violation(const Eigen::VectorXd& x) const;
  double max_violation(const Eigen::VectorXd& x) const;

  // Throws ValidationError when a reference or bound is inconsistent.
  void validate() const;

  int find_variable(const std::string& name) const;  // -1 when absent

  nlohmann::json to_json() const;
  static ConicProgram from_json(const nlohmann::json& j);

 private:
  std::vector<VariableSpec> vars_;
  std::vector<LinearConstraint> linear_;
  std::vector<SocConstraint> soc_;
  Eigen::VectorXd c_;
  double offset_ = 0.0;
};

}  // namespace errplan
