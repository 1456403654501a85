#pragma once

// Continuous relaxation interface used by branch-and-bound. A backend solves
// the program with integrality ignored and with per-variable bounds supplied
// by the caller (the node's bounds), returning a point in the original
// variable space.

#include "errplan/conic.hpp"
#include "errplan/socp.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

namespace errplan {

enum class RelaxStatus { optimal, infeasible, unbounded };

inline const char* to_string(RelaxStatus s) {
  switch (s) {
    case RelaxStatus::optimal: return "optimal";
    case RelaxStatus::infeasible: return "infeasible";
    default: return "unbounded";
  }
}

struct RelaxResult {
  RelaxStatus status = RelaxStatus::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  bool reduced_accuracy = false;
};

class ContinuousBackend {
 public:
  virtual ~ContinuousBackend() = default;

  // Throws NumericalFailure when the backend cannot reach a verdict.
  virtual RelaxResult solve(const ConicProgram& program, const std::vector<double>& lower,
                            const std::vector<double>& upper, const Eigen::VectorXd* hint = nullptr) = 0;

  virtual std::string name() const = 0;
};

// In-house homogeneous self-dual interior-point backend. Variables whose
// bounds coincide are substituted out before the cone program is formed.
class IpmBackend final : public ContinuousBackend {
 public:
  explicit IpmBackend(IpmSettings settings = {}) : settings_(settings) {}

  RelaxResult solve(const ConicProgram& program, const std::vector<double>& lower, const std::vector<double>& upper,
                    const Eigen::VectorXd* hint = nullptr) override;

  std::string name() const override { return "errplan-ipm"; }

  IpmSettings& settings() { return settings_; }

 private:
  IpmSettings settings_;
};

// Solves the program with integrality relaxed and its own bounds.
RelaxResult solve_continuous(const ConicProgram& program, ContinuousBackend* backend = nullptr);

}  // namespace errplan
