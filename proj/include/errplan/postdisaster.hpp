#pragma once

// Restoration model over a super-node graph: MER placement, branch flow with
// line switching, storage dispatch with losses and repair-crew scheduling.
// Power is p.u. on the graph's MVA base, time in periods of horizon.dt hours.

#include "errplan/bnb.hpp"
#include "errplan/chr.hpp"
#include "errplan/conic.hpp"
#include "errplan/predisaster.hpp"
#include "errplan/supernode.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace errplan {

enum class Relaxation {
  hull,   // loss equations replaced by their cone hulls; solvable
  exact,  // loss equations recorded as nonconvex terms, for evaluation only
};

struct RestorationOptions {
  Relaxation relax = Relaxation::hull;
  // Served load is bounded below by this fraction of the critical load.
  double critical_floor = 0.0;
  // MPV availability per period; half-sine over the horizon when empty.
  std::vector<double> mpv_profile;
  std::uint64_t hull_seed = 1;
};

// Variables of one resource (or one aggregate of mobile units) at a node.
struct ResourceVars {
  ResourceClass cls = ResourceClass::DG;
  int node = 0;
  std::string label;
  std::vector<int> p, q;
  std::vector<int> loss;  // storage only
  // Storage energy: starts at e0 and stays in [0, e_cap]. For MESS both
  // are affine in the allocation integers and kept in `energy`.
  double e0 = 0.0, e_cap = 0.0;
  AffineExpr energy;
  double r_e = 0.0, r_ct = 0.0;
};

struct EdgeVars {
  std::vector<int> p, q, l;
  int line = -1;  // index into RestorationModel::lines, -1 for intact edges
};

// p^2 + q^2 = dep * v (flow) or r_e p^2 + r_ct q^2 = dep * v (storage).
struct ExactTerm {
  bool storage = false;
  int p = 0, q = 0, dep = 0, v = 0;
  double r_e = 1.0, r_ct = 1.0;
  int owner = 0;  // edge or resource index
  int period = 0;
};

struct Placement {
  int item = 0;  // catalog index
  int node = 0;
  int var = 0;
};

struct RestorationModel {
  ConicProgram program;
  SuperNodeGraph graph;
  MerMixDecision mix;
  StudyHorizon horizon;
  RestorationOptions options;
  int n_crews = 0;
  std::vector<std::string> lines;  // damaged lines, scenario order
  std::vector<int> repair_time;
  std::vector<std::vector<int>> travel;
  std::vector<int> initial_travel;

  std::vector<std::vector<int>> u;                   // [line][t]
  std::vector<std::vector<std::vector<int>>> alpha;  // [crew][line][t]
  std::vector<std::vector<std::vector<int>>> beta;   // [crew][line][t]
  std::vector<Placement> placements;
  std::vector<std::vector<int>> pl, ql, v;           // [node][t]
  std::vector<std::vector<int>> pg, qg;              // [node][t], -1 without grid supply
  std::vector<ResourceVars> resources;
  std::vector<EdgeVars> edges;                       // aligned with graph.edges
  std::vector<ExactTerm> exact_terms;
  std::vector<StorageHull> storage_hulls;            // per storage resource, build order
  double demand_energy = 0.0;                        // sum of p_total * dt

  int n_periods() const { return horizon.n_periods; }
  int binary_count() const { return program.count_kind(Integrality::binary); }
};

RestorationModel build_restoration_model(const SuperNodeGraph& graph, const MerMixDecision& mix,
                                         const DamageScenario& scenario, const StudyHorizon& horizon,
                                         const RestorationOptions& options = {});

struct NodeDispatch {
  double p_demand = 0.0, q_demand = 0.0, p_load = 0.0, q_load = 0.0, v = 0.0;
  double p_grid = 0.0, q_grid = 0.0;
  std::array<double, kResourceClasses> p{}, q{};
  double storage_loss = 0.0;
};

// Per-unit trajectories; storage units also carry loss and energy data.
struct UnitDispatch {
  std::string label;
  ResourceClass cls = ResourceClass::DG;
  int node = 0;
  std::vector<double> p, q, loss;
  double r_e = 0.0, r_ct = 0.0, e0 = 0.0, e_cap = 0.0;
};

struct EdgeDispatch {
  double p = 0.0, q = 0.0, l = 0.0;
};

struct MerPlacement {
  std::string kind;
  int size_index = 0;
  std::string label;
  std::string node;
  int count = 0;
};

struct RestorationPlan {
  std::string status;  // optimal, limit, fixed
  double objective = 0.0;  // unserved energy, MWh
  double bound = 0.0;  // MWh
  double gap = 0.0;
  long node_count = 0;
  double seconds = 0.0;
  double s_base = 1.0;
  double dt = 1.0;
  int n_periods = 0;

  std::vector<std::string> nodes;
  std::vector<std::string> edges;  // line ids of graph edges
  std::vector<std::string> lines;  // damaged lines
  std::vector<int> repair_time;
  std::vector<std::vector<int>> travel;
  std::vector<int> initial_travel;
  std::vector<std::string> mix_labels;
  std::vector<int> mix_counts;

  std::vector<MerPlacement> mer_placement;
  std::vector<std::vector<int>> line_status;               // [line][t]
  std::vector<std::vector<std::vector<int>>> crew_visit;   // [crew][line][t]
  std::vector<std::vector<std::vector<int>>> crew_work;    // [crew][line][t]
  std::vector<std::vector<NodeDispatch>> dispatch;         // [t][node]
  std::vector<std::vector<EdgeDispatch>> flows;            // [t][edge]
  std::vector<UnitDispatch> units;
  Eigen::VectorXd x;

  // First period (1-based) with u = 1, 0 when never energized.
  std::vector<int> energized_period() const;
  nlohmann::json to_json() const;
  static RestorationPlan from_json(const nlohmann::json& j);
};

struct RestorationConfig {
  BnBConfig bnb;
  RestorationConfig() { bnb.branching = BranchingRule::status_first; }
  bool use_hint = true;
  int hint_budget = 60;  // continuous solves spent on the starting schedule
  std::uint64_t seed = 1;
};

// Throws Infeasible, SolverFailure, or TimeLimit when a limit is reached
// without any feasible plan. A plan returned at a limit has status "limit"
// and its gap set.
RestorationPlan solve_restoration(const RestorationModel& model, const RestorationConfig& config = {});

// Plan for a point of the model (integers already integral).
RestorationPlan extract_plan(const RestorationModel& model, const Eigen::VectorXd& x);

// Fixes the given integer values (u, alpha, beta, N) and solves the dispatch.
std::optional<RestorationPlan> dispatch_for_schedule(const RestorationModel& model, const Eigen::VectorXd& integers);

struct EnergySeries {
  std::vector<double> ter, tes;  // MWh per period

  double unserved() const;
};

EnergySeries extract_energy_series(const RestorationPlan& plan);

struct InvariantCheck {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  double max_balance_residual = 0.0;

  bool ok() const;
  nlohmann::json to_json() const;
};

InvariantReport check_plan_invariants(const RestorationPlan& plan, const SuperNodeGraph& graph,
                                      double balance_tol = 1e-6);

// Non-preemptive crew timetable: each crew repairs its lines in order, each
// line over repair_time consecutive periods, starting as early as travel
// allows. Used for the starting incumbent.
struct CrewTimetable {
  std::vector<std::vector<int>> order;         // per crew, line indices
  std::vector<int> start;                      // per line, 0-based period, -1 unassigned
  std::vector<int> crew;                       // per line
};

CrewTimetable list_schedule(const RestorationModel& model, const std::vector<int>& priority);

// Integer assignment (u, alpha, beta, N) for a timetable and allocation.
Eigen::VectorXd integer_point(const RestorationModel& model, const CrewTimetable& tt, const std::vector<int>& alloc);

}  // namespace errplan
