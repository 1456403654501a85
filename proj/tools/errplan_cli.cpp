// errplan: fleet sizing, network reduction, restoration planning and checks.
//
// Exit codes: 0 ok, 1 validation or usage error, 2 infeasible, 3 search limit
// reached, 4 internal failure. Errors are also written to stderr as JSON.

#include "errplan/chr.hpp"
#include "errplan/errors.hpp"
#include "errplan/netmodel.hpp"
#include "errplan/oracle.hpp"
#include "errplan/postdisaster.hpp"
#include "errplan/predisaster.hpp"
#include "errplan/supernode.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace errplan;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, usage = 1, infeasible = 2, limit = 3, internal = 4 };

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  double gap = 1e-3;
  std::string time_limit = "300s";
};

double parse_seconds(const std::string& s) {
  std::string v = s;
  double scale = 1.0;
  if (!v.empty() && (v.back() == 's' || v.back() == 'm' || v.back() == 'h')) {
    scale = v.back() == 'm' ? 60.0 : v.back() == 'h' ? 3600.0 : 1.0;
    v.pop_back();
  }
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || x < 0) throw std::invalid_argument(s);
    return x * scale;
  } catch (const std::exception&) {
    throw ValidationError("bad duration '" + s + "' (expected e.g. 300, 300s, 5m)");
  }
}

// 64-bit FNV-1a over the file bytes.
std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)), t0_(std::chrono::steady_clock::now()) {}

  void input(const std::string& name, const std::string& path) {
    inputs_[name] = {{"path", path}, {"hash", file_hash(path)}};
  }
  json& params() { return params_; }
  json& extra() { return extra_; }

  void write(const std::string& out_path) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    json j = {{"command", command_},
              {"tool", "errplan"},
              {"version", kVersion},
              {"inputs", inputs_},
              {"parameters", params_},
              {"outputs", {out_path}},
              {"wall_seconds", wall}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    write_json_file(out_path + ".manifest.json", j);
  }

 private:
  std::string command_;
  std::chrono::steady_clock::time_point t0_;
  json inputs_ = json::object();
  json params_ = json::object();
  json extra_ = json::object();
};

void global_params(json& p, const Globals& g) {
  p["seed"] = g.seed;
  p["threads"] = g.threads;
  p["gap"] = g.gap;
  p["time_limit_seconds"] = parse_seconds(g.time_limit);
}

MerMixDecision read_mix(const std::string& path) {
  const json j = read_json_file(path);
  return MerMixDecision::from_json(j.contains("mix") ? j["mix"] : j);
}

// ----------------------------------------------------------------- plan ----

struct PlanArgs {
  std::string forecast, catalog, out;
};

int run_plan(const PlanArgs& a, const Globals& g) {
  Manifest man("plan");
  man.input("forecast", a.forecast);
  man.input("catalog", a.catalog);
  const ShortageForecast fc = load_forecast(a.forecast);
  const auto catalog = load_catalog(a.catalog);
  const SizingModel model = build_sizing_model(fc, catalog, fc.horizon);
  SizingConfig cfg;
  cfg.bnb.gap = g.gap;
  cfg.bnb.time_limit = parse_seconds(g.time_limit);
  cfg.bnb.threads = g.threads;
  const SizingSolution sol = solve_sizing(model, cfg);
  json out = sizing_to_json(model, sol);
  write_json_file(a.out, out);
  global_params(man.params(), g);
  man.params()["critical_fraction"] = fc.critical_fraction;
  man.params()["q_ratio"] = fc.q_ratio;
  man.params()["pv_profile"] = fc.pv_profile;
  man.params()["k1"] = fc.k1;
  man.params()["k2"] = fc.k2;
  man.params()["n_periods"] = fc.horizon.n_periods;
  man.params()["dt_hours"] = fc.horizon.dt;
  man.write(a.out);
  return sol.gap > g.gap ? limit : ok;
}

// --------------------------------------------------------------- reduce ----

struct ReduceArgs {
  std::string feeder, scenario, out, report;
  bool full = false;
  double threshold = 0.05;
};

int run_reduce(const ReduceArgs& a, const Globals& g) {
  Manifest man("reduce");
  man.input("feeder", a.feeder);
  man.input("scenario", a.scenario);
  const FeederModel feeder = load_feeder(a.feeder);
  const DamageScenario sc = load_scenario(a.scenario, feeder);
  const IslandSet islands = detect_islands(feeder, sc);
  const SuperNodeGraph graph = a.full ? full_network_graph(feeder, sc) : aggregate(feeder, islands, sc);
  write_json_file(a.out, graph.to_json());
  if (!a.report.empty()) write_json_file(a.report, justify_reduction(feeder, islands, a.threshold).to_json());
  global_params(man.params(), g);
  man.params()["full_network"] = a.full;
  man.params()["drop_threshold"] = a.threshold;
  man.params()["report"] = a.report;
  man.extra()["islands"] = islands.size();
  man.write(a.out);
  return ok;
}

// -------------------------------------------------------------- restore ----

struct RestoreArgs {
  std::string graph, mix, scenario, out;
  double critical_floor = 0.0;
  int hint_budget = 60;
  std::string branching = "status_first";
};

int run_restore(const RestoreArgs& a, const Globals& g) {
  Manifest man("restore");
  man.input("graph", a.graph);
  man.input("mix", a.mix);
  man.input("scenario", a.scenario);
  const SuperNodeGraph graph = SuperNodeGraph::from_json(read_json_file(a.graph));
  const DamageScenario sc = DamageScenario::from_json(read_json_file(a.scenario), graph_skeleton(graph));
  const MerMixDecision mix = read_mix(a.mix);
  RestorationOptions opt;
  opt.critical_floor = a.critical_floor;
  opt.hull_seed = g.seed;
  const RestorationModel model = build_restoration_model(graph, mix, sc, graph.horizon, opt);
  RestorationConfig cfg;
  cfg.bnb.gap = g.gap;
  cfg.bnb.time_limit = parse_seconds(g.time_limit);
  cfg.bnb.threads = g.threads;
  cfg.bnb.branching = branching_rule_from(a.branching);
  cfg.hint_budget = a.hint_budget;
  cfg.seed = g.seed;
  RestorationPlan plan = solve_restoration(model, cfg);
  json j = plan.to_json();
  // Wall time goes to the manifest so that the plan itself is reproducible.
  j.erase("seconds");
  write_json_file(a.out, j);
  global_params(man.params(), g);
  man.params()["critical_floor"] = a.critical_floor;
  man.params()["hint_budget"] = a.hint_budget;
  man.params()["branching"] = a.branching;
  man.params()["hull_seed"] = g.seed;
  man.extra()["solve_seconds"] = plan.seconds;
  man.extra()["status"] = plan.status;
  man.write(a.out);
  return plan.status == "optimal" ? ok : limit;
}

// ------------------------------------------------------------- validate ----

struct ValidateArgs {
  std::string check = "plan";
  std::string plan, graph, feeder, out;
  int samples = 10000;
};

int run_validate(const ValidateArgs& a, const Globals& g) {
  Manifest man("validate");
  json report;
  bool passed = true;
  if (a.check == "hull") {
    if (a.feeder.empty()) throw ValidationError("validate --check hull needs --feeder");
    man.input("feeder", a.feeder);
    const FeederModel feeder = load_feeder(a.feeder);
    json lines = json::array(), storage = json::array();
    for (const auto& ln : feeder.lines) {
      const Bus& bus = feeder.buses[static_cast<size_t>(feeder.bus_index(ln.from_bus))];
      ManifoldParams mp;
      mp.v = squared_bounds(bus.vmin, bus.vmax);
      mp.smax = ln.smax;
      mp.i2max = ln.i2max;
      const auto r = soundness_check(hull_line_flow(ln, bus), Manifold::branch_flow, mp, a.samples, g.seed);
      passed = passed && r.violating_points == 0;
      json e = r.to_json();
      e["line"] = ln.id;
      lines.push_back(e);
    }
    for (const auto& d : feeder.ders) {
      if (d.kind != DerKind::ESS) continue;
      const Bus& bus = feeder.buses[static_cast<size_t>(feeder.bus_index(d.bus))];
      ManifoldParams mp;
      mp.v = squared_bounds(bus.vmin, bus.vmax);
      mp.smax = d.s_cap;
      mp.r_e = d.r_e.value_or(0.0);
      mp.r_ct = d.r_ct.value_or(0.0);
      json e = {{"bus", d.bus}};
      for (StorageHull h : {StorageHull::unscaled, StorageHull::scaled}) {
        const auto r = soundness_check(hull_storage_loss(d, bus, h), Manifold::storage_loss, mp, a.samples, g.seed);
        e[to_string(h)] = r.to_json();
      }
      const StorageHull used = select_storage_hull(mp.r_e, mp.r_ct, mp.smax, mp.v, g.seed);
      e["selected"] = to_string(used);
      passed = passed && e[to_string(used)]["violating_points"] == 0;
      storage.push_back(e);
    }
    report = {{"check", "hull"}, {"samples", a.samples}, {"seed", g.seed}, {"lines", lines}, {"storage", storage},
              {"ok", passed}};
  } else if (a.check == "plan") {
    if (a.plan.empty() || a.graph.empty()) throw ValidationError("validate --check plan needs --plan and --graph");
    man.input("plan", a.plan);
    man.input("graph", a.graph);
    const RestorationPlan plan = RestorationPlan::from_json(read_json_file(a.plan));
    const SuperNodeGraph graph = SuperNodeGraph::from_json(read_json_file(a.graph));
    const InvariantReport inv = check_plan_invariants(plan, graph);
    const FeasibilityReport fr = check_nonconvex_feasibility(plan, graph);
    passed = inv.ok();
    report = {{"check", "plan"}, {"invariants", inv.to_json()}, {"nonconvex", fr.to_json()}, {"ok", passed}};
  } else {
    throw ValidationError("unknown check '" + a.check + "' (hull or plan)");
  }
  write_json_file(a.out, report);
  global_params(man.params(), g);
  man.params()["check"] = a.check;
  man.params()["samples"] = a.samples;
  man.write(a.out);
  return passed ? ok : usage;
}

// --------------------------------------------------------------- report ----

struct ReportArgs {
  std::string plan, out;
};

int run_report(const ReportArgs& a, const Globals& g) {
  Manifest man("report");
  man.input("plan", a.plan);
  const RestorationPlan plan = RestorationPlan::from_json(read_json_file(a.plan));
  const EnergySeries es = extract_energy_series(plan);
  std::ofstream out(a.out);
  if (!out) throw ValidationError("cannot write " + a.out);
  out << "period,ter_mwh,tes_mwh,unserved_mwh\n";
  out << std::setprecision(10);
  for (size_t t = 0; t < es.ter.size(); ++t)
    out << t + 1 << ',' << es.ter[t] << ',' << es.tes[t] << ',' << es.ter[t] - es.tes[t] << '\n';
  out.close();
  global_params(man.params(), g);
  man.extra()["unserved_mwh"] = es.unserved();
  man.extra()["plan_objective_mwh"] = plan.objective;
  man.write(a.out);
  return ok;
}

// ----------------------------------------------------------- gen-travel ----

struct TravelArgs {
  int n = 0;
  int max_periods = 2;
  std::string out;
};

int run_gen_travel(const TravelArgs& a, const Globals& g) {
  Manifest man("gen-travel");
  if (a.n < 0) throw ValidationError("--n must be nonnegative");
  if (a.max_periods < 1) throw ValidationError("--max-periods must be at least 1");
  write_json_file(a.out, {{"seed", g.seed}, {"max_periods", a.max_periods},
                          {"travel", gen_travel_matrix(a.n, g.seed, a.max_periods)}});
  global_params(man.params(), g);
  man.params()["n"] = a.n;
  man.params()["max_periods"] = a.max_periods;
  man.write(a.out);
  return ok;
}

int fail(int code, const std::string& kind, const std::string& msg, const std::string& diag = "") {
  json j = {{"error", kind}, {"message", msg}, {"exit_code", code}};
  if (!diag.empty()) j["diagnostics"] = diag.substr(0, 20000);
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emergency response resource planning: sizing, reduction, restoration, checks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--gap", g.gap, "Relative optimality gap")->capture_default_str()->check(CLI::NonNegativeNumber);
  app.add_option("--time-limit", g.time_limit, "Search time limit, e.g. 300s")->capture_default_str();

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "Minimum-cost mobile resource mix");
  plan->add_option("--forecast", pa.forecast)->required()->check(CLI::ExistingFile);
  plan->add_option("--catalog", pa.catalog)->required()->check(CLI::ExistingFile);
  plan->add_option("--out", pa.out)->required();

  ReduceArgs ra;
  auto* reduce = app.add_subcommand("reduce", "Contract islands into super-nodes");
  reduce->add_option("--feeder", ra.feeder)->required()->check(CLI::ExistingFile);
  reduce->add_option("--scenario", ra.scenario)->required()->check(CLI::ExistingFile);
  reduce->add_option("--out", ra.out)->required();
  reduce->add_option("--report", ra.report, "Write the intra-island voltage drop report here");
  reduce->add_option("--threshold", ra.threshold, "Drop threshold in p.u.")->capture_default_str();
  reduce->add_flag("--full", ra.full, "Keep every bus (no contraction)");

  RestoreArgs sa;
  auto* restore = app.add_subcommand("restore", "Joint MER placement, dispatch and crew schedule");
  restore->add_option("--graph", sa.graph)->required()->check(CLI::ExistingFile);
  restore->add_option("--mix", sa.mix)->required()->check(CLI::ExistingFile);
  restore->add_option("--scenario", sa.scenario)->required()->check(CLI::ExistingFile);
  restore->add_option("--out", sa.out)->required();
  restore->add_option("--critical-floor", sa.critical_floor, "Served fraction of critical load")->capture_default_str();
  restore->add_option("--hint-budget", sa.hint_budget, "Dispatch solves for the starting plan")->capture_default_str();
  restore->add_option("--branching", sa.branching)->capture_default_str()->check(
      CLI::IsMember({"most_fractional", "class_priority", "status_first"}));

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Hull soundness or plan checks");
  validate->add_option("--check", va.check, "hull or plan")->capture_default_str()->check(CLI::IsMember({"hull", "plan"}));
  validate->add_option("--plan", va.plan)->check(CLI::ExistingFile);
  validate->add_option("--graph", va.graph)->check(CLI::ExistingFile);
  validate->add_option("--feeder", va.feeder)->check(CLI::ExistingFile);
  validate->add_option("--samples", va.samples)->capture_default_str()->check(CLI::PositiveNumber);
  validate->add_option("--out", va.out)->required();

  ReportArgs pr;
  auto* report = app.add_subcommand("report", "Per-period energy CSV of a plan");
  report->add_option("--plan", pr.plan)->required()->check(CLI::ExistingFile);
  report->add_option("--out", pr.out)->required();

  TravelArgs ta;
  auto* travel = app.add_subcommand("gen-travel", "Seeded symmetric travel-time matrix");
  travel->add_option("--n", ta.n)->required();
  travel->add_option("--max-periods", ta.max_periods)->capture_default_str();
  travel->add_option("--out", ta.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\n";
    return fail(usage, "usage", e.what());
  }

  try {
    if (*plan) return run_plan(pa, g);
    if (*reduce) return run_reduce(ra, g);
    if (*restore) return run_restore(sa, g);
    if (*validate) return run_validate(va, g);
    if (*report) return run_report(pr, g);
    if (*travel) return run_gen_travel(ta, g);
  } catch (const ValidationError& e) {
    return fail(usage, "validation", e.what());
  } catch (const ParseError& e) {
    return fail(usage, "parse", e.what());
  } catch (const Infeasible& e) {
    return fail(infeasible, "infeasible", e.what());
  } catch (const TimeLimit& e) {
    return fail(limit, "limit", e.what());
  } catch (const NumericalFailure& e) {
    return fail(internal, "numerical", e.what(), e.diagnostics());
  } catch (const std::exception& e) {
    return fail(internal, "internal", e.what());
  }
  return usage;
}
