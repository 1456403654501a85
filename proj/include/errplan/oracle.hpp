#pragma once

// Brute-force references for small instances: crew schedule enumeration,
// exact-equation residuals of relaxed plans, and mix enumeration for sizing.

#include "errplan/netmodel.hpp"
#include "errplan/postdisaster.hpp"
#include "errplan/predisaster.hpp"
#include "errplan/supernode.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace errplan {

struct OracleLimits {
  int max_lines = 4;
  int max_crews = 2;
  int max_periods = 12;
};

struct ScheduleOracleResult {
  double best_objective = 0.0;  // MWh
  std::vector<std::vector<int>> crew_order;  // per crew, damaged-line indices
  std::vector<int> start;                    // per line, 1-based first work period, 0 if never
  std::vector<int> energized;                // per line, 1-based, 0 if never
  std::vector<std::pair<std::string, int>> placement;  // (label@node, count)
  long sequences = 0;       // crew sequences enumerated
  long profiles = 0;        // distinct energization profiles
  long dispatch_solves = 0;

  nlohmann::json to_json() const;
};

// Every assignment of damaged lines to crews and every order per crew,
// each line repaired without interruption as early as travel allows, times
// every placement of the mobile units; the dispatch of each combination is
// solved with all integers fixed. Throws TooLarge beyond `limits`.
ScheduleOracleResult enumerate_schedules(const SuperNodeGraph& graph, const MerMixDecision& mix,
                                         const DamageScenario& scenario, const StudyHorizon& horizon,
                                         int threads = 1, const OracleLimits& limits = {});

struct Residual {
  std::string owner;  // line id or unit label
  int period = 0;     // 1-based
  double value = 0.0;
};

struct FeasibilityReport {
  std::vector<Residual> flow;  // |p^2 + q^2 - l v|
  std::vector<Residual> storage;  // |r_e p^2 + r_ct q^2 - p_loss v|
  double max_residual = 0.0;
  bool repaired_feasible = true;
  std::vector<std::string> repair_violations;
  double plan_objective = 0.0;      // MWh
  double repaired_objective = 0.0;  // MWh
  double relaxation_gap_estimate = 0.0;  // repaired - plan, MWh

  nlohmann::json to_json() const;
};

// Residuals of the exact loss equations at the plan's point, then a repaired
// point: l and p_loss lifted to their exact values, voltages re-propagated over
// closed lines, and the extra line loss taken out of the receiving-end load.
// Bounds broken by the repair are listed.
FeasibilityReport check_nonconvex_feasibility(const RestorationPlan& plan, const SuperNodeGraph& graph);

struct MixOracleResult {
  double best_cost = 0.0;
  std::vector<int> counts;  // aligned with the catalog
  long mixes_checked = 0;
  bool found = false;
};

// Cheapest mix with at most `max_per_kind` units of each kind whose dispatch
// is feasible, by checking mixes in order of cost.
MixOracleResult enumerate_mixes(const ShortageForecast& forecast, const std::vector<MerSpec>& catalog,
                                const StudyHorizon& horizon, int max_per_kind = 4);

}  // namespace errplan
