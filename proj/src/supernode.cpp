#include "errplan/supernode.hpp"

#include "errplan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace errplan {

using nlohmann::json;

namespace {

// Union-find with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int a) {
    while (parent_[static_cast<size_t>(a)] != a) {
      parent_[static_cast<size_t>(a)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(a)])];
      a = parent_[static_cast<size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

void add_series(std::vector<double>& acc, const std::vector<double>& v) {
  if (acc.size() < v.size()) acc.resize(v.size(), 0.0);
  for (size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

SuperNode make_node(int id, std::vector<std::string> members, const FeederModel& feeder,
                    const DamageScenario& scenario) {
  SuperNode sn;
  sn.id = id;
  sn.members = std::move(members);
  sn.name = sn.members.size() == 1 ? sn.members.front() : "SN" + std::to_string(id + 1);
  const size_t n = static_cast<size_t>(feeder.horizon.n_periods);
  sn.load.bus = sn.name;
  sn.load.p_total.assign(n, 0.0);
  sn.load.p_critical.assign(n, 0.0);
  sn.load.q_total.assign(n, 0.0);
  sn.load.q_critical.assign(n, 0.0);
  sn.grid.p.assign(n, 0.0);
  sn.grid.q.assign(n, 0.0);
  sn.vmin = 0.0;
  sn.vmax = std::numeric_limits<double>::infinity();
  const std::set<std::string> member_set(sn.members.begin(), sn.members.end());
  for (const auto& b : feeder.buses)
    if (member_set.count(b.id)) {
      sn.vmin = std::max(sn.vmin, b.vmin);
      sn.vmax = std::min(sn.vmax, b.vmax);
    }
  for (const auto& l : feeder.loads)
    if (member_set.count(l.bus)) {
      add_series(sn.load.p_total, l.p_total);
      add_series(sn.load.p_critical, l.p_critical);
      add_series(sn.load.q_total, l.q_total);
      add_series(sn.load.q_critical, l.q_critical);
    }
  for (const auto& d : feeder.ders)
    if (member_set.count(d.bus)) sn.ders.push_back(d);
  for (const auto& [bus, g] : scenario.grid)
    if (member_set.count(bus)) {
      add_series(sn.grid.p, g.p);
      add_series(sn.grid.q, g.q);
    }
  if (!(sn.vmin < sn.vmax))
    throw InfeasibleBounds("island " + sn.name + ": member voltage bounds do not intersect");
  return sn;
}

json series_json(const std::vector<double>& v, double s) {
  json a = json::array();
  for (double x : v) a.push_back(x * s);
  return a;
}

std::vector<double> series_from(const json& j, double s) {
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>() / s);
  return v;
}

}  // namespace

IslandSet detect_islands(const FeederModel& feeder, const DamageScenario& scenario) {
  const int n = static_cast<int>(feeder.buses.size());
  DisjointSets ds(n);
  const std::set<std::string> damaged(scenario.damaged.begin(), scenario.damaged.end());
  for (const auto& l : feeder.lines)
    if (!damaged.count(l.id)) ds.unite(feeder.bus_index(l.from_bus), feeder.bus_index(l.to_bus));

  std::vector<std::vector<std::string>> groups(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) groups[static_cast<size_t>(ds.find(i))].push_back(feeder.buses[static_cast<size_t>(i)].id);
  IslandSet out;
  for (auto& g : groups) {
    if (g.empty()) continue;
    std::sort(g.begin(), g.end(), bus_id_less);
    out.islands.push_back(std::move(g));
  }
  std::sort(out.islands.begin(), out.islands.end(),
            [](const auto& a, const auto& b) { return bus_id_less(a.front(), b.front()); });
  out.island_of.assign(static_cast<size_t>(n), -1);
  for (size_t k = 0; k < out.islands.size(); ++k)
    for (const auto& id : out.islands[k]) out.island_of[static_cast<size_t>(feeder.bus_index(id))] = static_cast<int>(k);
  return out;
}

SuperNodeGraph aggregate(const FeederModel& feeder, const IslandSet& islands, const DamageScenario& scenario) {
  SuperNodeGraph g;
  g.horizon = feeder.horizon;
  g.bases = feeder.bases;
  for (size_t k = 0; k < islands.islands.size(); ++k)
    g.nodes.push_back(make_node(static_cast<int>(k), islands.islands[k], feeder, scenario));
  for (const auto& id : scenario.damaged) {
    const Line& l = feeder.lines[static_cast<size_t>(feeder.line_index(id))];
    const int a = islands.island_of[static_cast<size_t>(feeder.bus_index(l.from_bus))];
    const int b = islands.island_of[static_cast<size_t>(feeder.bus_index(l.to_bus))];
    if (a == b) {
      g.repair_only.push_back(id);
      continue;
    }
    g.edges.push_back({l.id, a, b, l.r, l.x, l.i2max, l.smax, true});
  }
  return g;
}

SuperNodeGraph full_network_graph(const FeederModel& feeder, const DamageScenario& scenario) {
  SuperNodeGraph g;
  g.horizon = feeder.horizon;
  g.bases = feeder.bases;
  std::vector<std::string> ids;
  for (const auto& b : feeder.buses) ids.push_back(b.id);
  std::sort(ids.begin(), ids.end(), bus_id_less);
  for (size_t k = 0; k < ids.size(); ++k) {
    SuperNode sn = make_node(static_cast<int>(k), {ids[k]}, feeder, scenario);
    g.nodes.push_back(std::move(sn));
  }
  auto node = [&](const std::string& bus) {
    return static_cast<int>(std::find(ids.begin(), ids.end(), bus) - ids.begin());
  };
  const std::set<std::string> damaged(scenario.damaged.begin(), scenario.damaged.end());
  for (const auto& l : feeder.lines)
    g.edges.push_back({l.id, node(l.from_bus), node(l.to_bus), l.r, l.x, l.i2max, l.smax, damaged.count(l.id) > 0});
  return g;
}

std::pair<FeederModel, DamageScenario> graph_as_feeder(const SuperNodeGraph& graph, const DamageScenario& scenario) {
  FeederModel f;
  f.bases = graph.bases;
  f.horizon = graph.horizon;
  for (const auto& n : graph.nodes) {
    f.buses.push_back({n.name, n.vmin, n.vmax});
    f.loads.push_back(n.load);
    for (auto d : n.ders) {
      d.bus = n.name;
      f.ders.push_back(d);
    }
  }
  DamageScenario sc;
  sc.n_crews = scenario.n_crews;
  for (const auto& e : graph.edges) {
    f.lines.push_back({e.line_id, graph.nodes[static_cast<size_t>(e.from)].name,
                       graph.nodes[static_cast<size_t>(e.to)].name, e.r, e.x, e.i2max, e.smax});
    if (!e.damaged) continue;
    sc.damaged.push_back(e.line_id);
    const int k = scenario.damaged_index(e.line_id);
    sc.repair_time.push_back(k >= 0 ? scenario.repair_time[static_cast<size_t>(k)] : 1);
    sc.initial_travel.push_back(k >= 0 ? scenario.initial_travel[static_cast<size_t>(k)] : 0);
  }
  const size_t n = sc.damaged.size();
  sc.travel.assign(n, std::vector<int>(n, 0));
  for (size_t a = 0; a < n; ++a)
    for (size_t b = 0; b < n; ++b) {
      const int ia = scenario.damaged_index(sc.damaged[a]);
      const int ib = scenario.damaged_index(sc.damaged[b]);
      if (ia >= 0 && ib >= 0) sc.travel[a][b] = scenario.travel[static_cast<size_t>(ia)][static_cast<size_t>(ib)];
    }
  return {f, sc};
}

FeederModel graph_skeleton(const SuperNodeGraph& graph) {
  FeederModel f;
  f.name = "graph";
  f.bases = graph.bases;
  f.horizon = graph.horizon;
  for (const auto& n : graph.nodes)
    for (const auto& b : n.members) f.buses.push_back({b, n.vmin, n.vmax});
  auto first = [&](int node) { return graph.nodes[static_cast<size_t>(node)].members.front(); };
  for (const auto& e : graph.edges) f.lines.push_back({e.line_id, first(e.from), first(e.to), e.r, e.x, e.i2max, e.smax});
  for (const auto& id : graph.repair_only) {
    const std::string b = graph.nodes.empty() ? std::string() : graph.nodes.front().members.front();
    f.lines.push_back({id, b, b, 0.0, 0.0, 0.0, 0.0});
  }
  return f;
}

int SuperNodeGraph::node_of_member(const std::string& bus) const {
  for (const auto& n : nodes)
    if (std::find(n.members.begin(), n.members.end(), bus) != n.members.end()) return n.id;
  return -1;
}

double SuperNodeGraph::total_p(int t) const {
  double s = 0.0;
  for (const auto& n : nodes) s += n.load.p_total.at(static_cast<size_t>(t));
  return s;
}

json SuperNodeGraph::to_json() const {
  const double s = bases.s_mva;
  json j;
  j["bases"] = {{"s_mva", bases.s_mva}, {"v_kv", bases.v_kv}};
  j["horizon"] = {{"n_periods", horizon.n_periods}, {"dt_hours", horizon.dt}};
  j["super_nodes"] = json::array();
  for (const auto& n : nodes) {
    FeederModel tmp;
    tmp.bases = bases;
    tmp.horizon = horizon;
    tmp.ders = n.ders;
    json ders = tmp.to_json()["ders"];
    j["super_nodes"].push_back({{"id", n.id},
                                {"name", n.name},
                                {"members", n.members},
                                {"vmin", n.vmin},
                                {"vmax", n.vmax},
                                {"p_total", series_json(n.load.p_total, s)},
                                {"p_crit", series_json(n.load.p_critical, s)},
                                {"q_total", series_json(n.load.q_total, s)},
                                {"q_crit", series_json(n.load.q_critical, s)},
                                {"grid_p", series_json(n.grid.p, s)},
                                {"grid_q", series_json(n.grid.q, s)},
                                {"ders", ders}});
  }
  j["edges"] = json::array();
  for (const auto& e : edges)
    j["edges"].push_back({{"line", e.line_id}, {"from", e.from}, {"to", e.to}, {"r", e.r}, {"x", e.x},
                          {"i2max", e.i2max}, {"smax", e.smax}, {"damaged", e.damaged}});
  j["repair_only"] = repair_only;
  return j;
}

SuperNodeGraph SuperNodeGraph::from_json(const json& j) {
  SuperNodeGraph g;
  try {
    g.bases.s_mva = j.at("bases").at("s_mva").get<double>();
    g.bases.v_kv = j.at("bases").at("v_kv").get<double>();
    g.horizon.n_periods = j.at("horizon").at("n_periods").get<int>();
    g.horizon.dt = j.at("horizon").at("dt_hours").get<double>();
    const double s = g.bases.s_mva;
    for (const auto& n : j.at("super_nodes")) {
      SuperNode sn;
      sn.id = n.at("id").get<int>();
      sn.name = n.at("name").get<std::string>();
      sn.members = n.at("members").get<std::vector<std::string>>();
      sn.vmin = n.at("vmin").get<double>();
      sn.vmax = n.at("vmax").get<double>();
      sn.load.bus = sn.name;
      sn.load.p_total = series_from(n.at("p_total"), s);
      sn.load.p_critical = series_from(n.at("p_crit"), s);
      sn.load.q_total = series_from(n.at("q_total"), s);
      sn.load.q_critical = series_from(n.at("q_crit"), s);
      sn.grid.p = series_from(n.at("grid_p"), s);
      sn.grid.q = series_from(n.at("grid_q"), s);
      // DERs keep their original member bus.
      json buses = json::array({{{"id", sn.name}}});
      for (const auto& b : sn.members)
        if (b != sn.name) buses.push_back({{"id", b}});
      json fj = {{"bases", j.at("bases")},
                 {"horizon", j.at("horizon")},
                 {"buses", buses},
                 {"lines", json::array()},
                 {"ders", n.value("ders", json::array())}};
      sn.ders = FeederModel::from_json(fj).ders;
      if (sn.id != static_cast<int>(g.nodes.size())) throw ValidationError("super-node ids must be 0..n-1 in order");
      g.nodes.push_back(std::move(sn));
    }
    for (const auto& e : j.at("edges")) {
      SuperEdge se{e.at("line").get<std::string>(), e.at("from").get<int>(), e.at("to").get<int>(),
                   e.at("r").get<double>(), e.at("x").get<double>(), e.at("i2max").get<double>(),
                   e.at("smax").get<double>(), e.value("damaged", true)};
      const int nn = static_cast<int>(g.nodes.size());
      if (se.from < 0 || se.to < 0 || se.from >= nn || se.to >= nn || se.from == se.to)
        throw ValidationError("edge " + se.line_id + ": endpoints must be distinct super-nodes");
      g.edges.push_back(se);
    }
    g.repair_only = j.value("repair_only", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("graph: ") + e.what());
  }
  return g;
}

// ------------------------------------------------------------ drop report ----

json ReductionReport::to_json() const {
  json j;
  j["threshold_pu"] = threshold;
  j["islands"] = json::array();
  for (const auto& d : islands)
    j["islands"].push_back({{"island", d.island},
                            {"path", d.path},
                            {"dv_squared_pu", d.dv_squared},
                            {"drop_pu", d.dv_pu},
                            {"drop_kv", d.dv_kv},
                            {"exceeds_threshold", d.exceeds}});
  return j;
}

ReductionReport justify_reduction(const FeederModel& feeder, const IslandSet& islands, double threshold) {
  ReductionReport rep;
  rep.threshold = threshold;
  const int nb = static_cast<int>(feeder.buses.size());
  // Adjacency over intact in-island lines.
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<size_t>(nb));
  for (size_t k = 0; k < feeder.lines.size(); ++k) {
    const auto& l = feeder.lines[k];
    const int a = feeder.bus_index(l.from_bus);
    const int b = feeder.bus_index(l.to_bus);
    if (islands.island_of[static_cast<size_t>(a)] != islands.island_of[static_cast<size_t>(b)]) continue;
    adj[static_cast<size_t>(a)].push_back({b, static_cast<int>(k)});
    adj[static_cast<size_t>(b)].push_back({a, static_cast<int>(k)});
  }
  for (size_t isl = 0; isl < islands.islands.size(); ++isl) {
    IslandDrop d;
    d.island = static_cast<int>(isl);
    double P = 0.0, Q = 0.0;
    for (int t = 0; t < feeder.horizon.n_periods; ++t) {
      double p = 0.0, q = 0.0;
      for (const auto& l : feeder.loads)
        if (islands.island_of[static_cast<size_t>(feeder.bus_index(l.bus))] == static_cast<int>(isl)) {
          p += l.p_total[static_cast<size_t>(t)];
          q += l.q_total[static_cast<size_t>(t)];
        }
      if (p > P) {
        P = p;
        Q = q;
      }
    }
    // Largest path weight sum 2 (r P + x Q) from every member (islands are small).
    std::vector<int> best_path;
    double best = 0.0;
    for (const auto& src_id : islands.islands[isl]) {
      const int src = feeder.bus_index(src_id);
      std::vector<double> dist(static_cast<size_t>(nb), -1.0);
      std::vector<int> prev(static_cast<size_t>(nb), -1);
      std::vector<int> stack{src};
      dist[static_cast<size_t>(src)] = 0.0;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (const auto& [v, li] : adj[static_cast<size_t>(u)]) {
          if (dist[static_cast<size_t>(v)] >= 0.0) continue;
          const auto& l = feeder.lines[static_cast<size_t>(li)];
          dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 2.0 * (l.r * P + l.x * Q);
          prev[static_cast<size_t>(v)] = u;
          stack.push_back(v);
        }
      }
      for (int v = 0; v < nb; ++v)
        if (dist[static_cast<size_t>(v)] > best) {
          best = dist[static_cast<size_t>(v)];
          best_path.clear();
          for (int w = v; w >= 0; w = prev[static_cast<size_t>(w)]) best_path.push_back(w);
          std::reverse(best_path.begin(), best_path.end());
        }
    }
    d.dv_squared = best;
    for (int b : best_path) d.path.push_back(feeder.buses[static_cast<size_t>(b)].id);
    if (d.path.empty()) d.path.push_back(islands.islands[isl].front());
    d.dv_pu = 1.0 - std::sqrt(std::max(0.0, 1.0 - best));
    d.dv_kv = d.dv_pu * feeder.bases.v_kv;
    d.exceeds = d.dv_pu > threshold;
    rep.islands.push_back(std::move(d));
  }
  return rep;
}

}  // namespace errplan
