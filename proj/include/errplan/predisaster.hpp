#pragma once

// Minimum-cost mobile resource fleet covering a forecast shortage together
// with the predicted surviving DERs (no network constraints).

#include "errplan/bnb.hpp"
#include "errplan/conic.hpp"
#include "errplan/netmodel.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <vector>

namespace errplan {

enum class ResourceClass { MDG = 0, MES, MPV, DG, ES, PV };
inline constexpr int kResourceClasses = 6;
const char* to_string(ResourceClass c);

struct MerMixDecision {
  std::vector<MerSpec> catalog;
  std::vector<int> counts;  // aligned with catalog
  double total_cost = 0.0;

  int count(MerKind kind, int size_index) const;
  nlohmann::json to_json() const;
  static MerMixDecision from_json(const nlohmann::json& j);
};

struct SizingPeriod {
  double p_load = 0.0, q_load = 0.0;
  std::array<double, kResourceClasses> p{}, q{};
};

struct SizingSolution {
  MerMixDecision mix;
  std::vector<SizingPeriod> dispatch;  // p.u.
  long node_count = 0;
  double gap = 0.0;
  Eigen::VectorXd x;  // full model point
};

struct SizingModel {
  ConicProgram program;
  ShortageForecast forecast;
  std::vector<MerSpec> catalog;
  std::vector<int> n_var;  // per catalog item
  std::vector<int> pl_var, ql_var;
  // [t][class] -> variables of every unit in that class
  std::vector<std::array<std::vector<int>, kResourceClasses>> p_vars, q_vars;
  std::vector<int> n_upper;
};

SizingModel build_sizing_model(const ShortageForecast& forecast, const std::vector<MerSpec>& catalog,
                               const StudyHorizon& horizon);

struct SizingConfig {
  BnBConfig bnb;
  SizingConfig() { bnb.gap = 1e-4; }
};

SizingSolution solve_sizing(const SizingModel& model, const SizingConfig& config = {});

// Dispatch-only feasibility for a fixed mix; nullopt when infeasible.
std::optional<SizingSolution> dispatch_for_mix(const SizingModel& model, const std::vector<int>& counts);

// Largest violation of the sizing constraints by a solution (p.u.).
double sizing_residual(const SizingModel& model, const SizingSolution& sol);

nlohmann::json sizing_to_json(const SizingModel& model, const SizingSolution& sol);

}  // namespace errplan
