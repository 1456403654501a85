#pragma once

// Best-bound branch-and-bound over the integer variables of a ConicProgram,
// with continuous second-order cone relaxations solved by a ContinuousBackend.

#include "errplan/backend.hpp"
#include "errplan/conic.hpp"

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <string>

namespace errplan {

enum class BranchingRule {
  most_fractional,  // largest distance to the nearest integer, class then id on ties
  class_priority,   // crew before line before mer before other, then most fractional
  status_first,     // mer before line before crew before other, then most fractional
};

enum class MipStatus { optimal, feasible, infeasible, unbounded, limit };

const char* to_string(MipStatus s);
const char* to_string(BranchingRule r);
BranchingRule branching_rule_from(const std::string& s);

struct BnBConfig {
  double gap = 1e-3;
  long node_limit = 1000000;
  double time_limit = 0.0;  // seconds, <= 0 means none
  BranchingRule branching = BranchingRule::most_fractional;
  double integrality_tol = 1e-6;
  double tie_tol = 1e-3;
  int threads = 1;
  // Written when a node subproblem makes the backend fail.
  std::string dump_node_path;
  // Optional integer assignment tried as the first incumbent.
  std::optional<Eigen::VectorXd> hint;
  // Called with (nodes, incumbent, bound) every `log_every` nodes when set.
  std::function<void(long, double, double)> progress;
  long log_every = 100;
};

struct MipSolution {
  MipStatus status = MipStatus::infeasible;
  Eigen::VectorXd x;
  double objective = kInf;
  double bound = -kInf;
  double gap = kInf;
  long node_count = 0;
  double seconds = 0.0;
};

// (incumbent - bound) / max(1, |incumbent|)
double relative_gap(double incumbent, double bound);

MipSolution solve_michp(const ConicProgram& program, const BnBConfig& config = {},
                        ContinuousBackend* backend = nullptr);

// Fixes every integer variable of `x` (rounded) and re-solves the continuous
// part. Returns nullopt when the fixed program is infeasible.
std::optional<RelaxResult> repair_integer_point(const ConicProgram& program, const Eigen::VectorXd& x,
                                                ContinuousBackend* backend = nullptr);

}  // namespace errplan
