#pragma once

// Island detection over intact lines and contraction of each island into a
// single aggregated node.

#include "errplan/netmodel.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace errplan {

struct IslandSet {
  std::vector<std::vector<std::string>> islands;  // each sorted, islands ordered by smallest member
  std::vector<int> island_of;                      // indexed like feeder.buses

  int size() const { return static_cast<int>(islands.size()); }
};

struct SuperNode {
  int id = 0;
  std::string name;
  std::vector<std::string> members;
  LoadProfile load;  // summed over members, bus = name
  std::vector<DerUnit> ders;
  double vmin = 0.95;
  double vmax = 1.05;
  GridSupply grid;  // summed grid availability, zero when absent
};

struct SuperEdge {
  std::string line_id;
  int from = 0;
  int to = 0;
  double r = 0, x = 0, i2max = 0, smax = 0;
  bool damaged = true;  // intact edges only appear in the uncontracted graph
};

struct SuperNodeGraph {
  std::vector<SuperNode> nodes;
  std::vector<SuperEdge> edges;
  // Damaged lines with both ends in one island: repair work, no flow edge.
  std::vector<std::string> repair_only;
  StudyHorizon horizon;
  Bases bases;

  int node_of_member(const std::string& bus) const;  // -1 when absent
  double total_p(int t) const;

  nlohmann::json to_json() const;
  static SuperNodeGraph from_json(const nlohmann::json& j);
};

IslandSet detect_islands(const FeederModel& feeder, const DamageScenario& scenario);

SuperNodeGraph aggregate(const FeederModel& feeder, const IslandSet& islands, const DamageScenario& scenario);

// One node per bus, every line kept (intact lines are always available).
// Used to solve the restoration problem without contraction.
SuperNodeGraph full_network_graph(const FeederModel& feeder, const DamageScenario& scenario);

// Reverse view: super-nodes as buses, edges as lines, edges all damaged.
std::pair<FeederModel, DamageScenario> graph_as_feeder(const SuperNodeGraph& graph, const DamageScenario& scenario);

// Minimal feeder carrying the graph's member buses, edge and repair-only line
// ids, bases and horizon; enough to read a damage scenario against a graph.
FeederModel graph_skeleton(const SuperNodeGraph& graph);

struct IslandDrop {
  int island = 0;
  std::vector<std::string> path;  // bus sequence of the worst path
  double dv_squared = 0.0;        // drop of squared voltage along the path (p.u.)
  double dv_pu = 0.0;             // magnitude drop assuming 1 p.u. at the sending end
  double dv_kv = 0.0;
  bool exceeds = false;
};

struct ReductionReport {
  double threshold = 0.05;
  std::vector<IslandDrop> islands;
  nlohmann::json to_json() const;
};

// Worst-case intra-island drop under the lossless linear branch-flow model,
// pushing the island's peak total load over its largest-drop internal path.
ReductionReport justify_reduction(const FeederModel& feeder, const IslandSet& islands, double threshold = 0.05);

}  // namespace errplan
