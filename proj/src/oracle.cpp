#include "errplan/oracle.hpp"

#include "errplan/backend.hpp"
#include "errplan/bnb.hpp"
#include "errplan/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <functional>
#include <thread>

namespace errplan {

using nlohmann::json;

json ScheduleOracleResult::to_json() const {
  json pl = json::array();
  for (const auto& [label, n] : placement) pl.push_back({{"unit", label}, {"count", n}});
  return {{"best_objective_mwh", best_objective},
          {"crew_order", crew_order},
          {"start", start},
          {"energized", energized},
          {"placement", pl},
          {"sequences", sequences},
          {"profiles", profiles},
          {"dispatch_solves", dispatch_solves}};
}

namespace {

struct Timing {
  std::vector<std::vector<int>> order;
  std::vector<int> start;  // 0-based, -1 when the line is not reached
  std::vector<int> crew;
};

// Earliest uninterrupted timing of fixed per-crew orders. A crew leaves the
// depot at period 0 and can work on its first line from period TT0 - 1; a
// line b after a line a (any earlier one of the same crew) starts at least
// max(TT_ab, 1) periods after the last work period of a.
Timing time_orders(const std::vector<std::vector<int>>& order, const DamageScenario& sc) {
  Timing tm;
  tm.order = order;
  tm.start.assign(sc.damaged.size(), -1);
  tm.crew.assign(sc.damaged.size(), -1);
  for (size_t c = 0; c < order.size(); ++c) {
    for (size_t k = 0; k < order[c].size(); ++k) {
      const auto b = static_cast<size_t>(order[c][k]);
      int s = std::max(0, sc.initial_travel[b] - 1);
      for (size_t j = 0; j < k; ++j) {
        const auto a = static_cast<size_t>(order[c][j]);
        const int last = tm.start[a] + sc.repair_time[a] - 1;
        s = std::max(s, last + std::max(1, sc.travel[a][b]));
      }
      tm.start[b] = s;
      tm.crew[b] = static_cast<int>(c);
    }
  }
  return tm;
}

// All allocations of each catalog item's units over the nodes with at most
// counts[j] units placed in total.
void for_each_allocation(const RestorationModel& m, const std::function<void(const std::vector<int>&)>& f) {
  const auto P = m.placements.size();
  std::vector<int> alloc(P, 0);
  std::vector<int> used(m.mix.catalog.size(), 0);
  std::function<void(size_t)> rec = [&](size_t k) {
    if (k == P) {
      f(alloc);
      return;
    }
    const auto item = static_cast<size_t>(m.placements[k].item);
    for (int n = 0; used[item] + n <= m.mix.counts[item]; ++n) {
      alloc[k] = n;
      used[item] += n;
      rec(k + 1);
      used[item] -= n;
    }
    alloc[k] = 0;
  };
  rec(0);
}

}  // namespace

ScheduleOracleResult enumerate_schedules(const SuperNodeGraph& graph, const MerMixDecision& mix,
                                         const DamageScenario& scenario, const StudyHorizon& horizon, int threads,
                                         const OracleLimits& limits) {
  const int L = static_cast<int>(scenario.damaged.size());
  const int C = scenario.n_crews;
  const int T = horizon.n_periods;
  if (L > limits.max_lines || C > limits.max_crews || T > limits.max_periods)
    throw TooLarge("schedule enumeration is limited to " + std::to_string(limits.max_lines) + " lines, " +
                   std::to_string(limits.max_crews) + " crews and " + std::to_string(limits.max_periods) +
                   " periods (got " + std::to_string(L) + ", " + std::to_string(C) + ", " + std::to_string(T) + ")");
  if (C < 1) throw ValidationError("at least one crew is required");

  const RestorationModel m = build_restoration_model(graph, mix, scenario, horizon);
  ScheduleOracleResult res;

  // Every assignment of lines to crews, every order within each crew. Only
  // the energization profile matters to the dispatch, so profiles are kept
  // once with the first sequence that produced them.
  std::map<std::vector<int>, Timing> profiles;
  std::vector<int> assign(static_cast<size_t>(L), 0);
  while (true) {
    std::vector<std::vector<int>> order(static_cast<size_t>(C));
    for (int l = 0; l < L; ++l) order[static_cast<size_t>(assign[static_cast<size_t>(l)])].push_back(l);
    std::function<void(size_t)> perm = [&](size_t c) {
      if (c == order.size()) {
        ++res.sequences;
        Timing tm = time_orders(order, scenario);
        std::vector<int> energ(static_cast<size_t>(L), 0);
        for (size_t l = 0; l < static_cast<size_t>(L); ++l) {
          const int done = tm.start[l] + scenario.repair_time[l];
          energ[l] = done < T ? done + 1 : 0;
        }
        profiles.emplace(energ, std::move(tm));
        return;
      }
      std::sort(order[c].begin(), order[c].end());
      do {
        perm(c + 1);
      } while (std::next_permutation(order[c].begin(), order[c].end()));
    };
    perm(0);
    int k = 0;
    while (k < L && ++assign[static_cast<size_t>(k)] == C) assign[static_cast<size_t>(k++)] = 0;
    if (k == L) break;
  }
  res.profiles = static_cast<long>(profiles.size());

  std::vector<std::vector<int>> allocs;
  for_each_allocation(m, [&](const std::vector<int>& a) { allocs.push_back(a); });

  struct Job {
    const Timing* tm;
    const std::vector<int>* energ;
    const std::vector<int>* alloc;
  };
  std::vector<Job> jobs;
  for (const auto& [energ, tm] : profiles)
    for (const auto& a : allocs) jobs.push_back({&tm, &energ, &a});
  res.dispatch_solves = static_cast<long>(jobs.size());

  std::atomic<size_t> next{0};
  std::mutex mu;
  double best = kInf;
  size_t best_job = jobs.size();
  auto worker = [&]() {
    IpmBackend backend;
    for (size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      Eigen::VectorXd x = Eigen::VectorXd::Zero(m.program.num_variables());
      for (size_t l = 0; l < static_cast<size_t>(L); ++l) {
        const int s0 = job.tm->start[l];
        const auto c = static_cast<size_t>(job.tm->crew[l]);
        for (int t = s0; t < std::min(T, s0 + scenario.repair_time[l]); ++t) {
          x(m.alpha[c][l][static_cast<size_t>(t)]) = 1.0;
          x(m.beta[c][l][static_cast<size_t>(t)]) = 1.0;
        }
        const int e = (*job.energ)[l];
        if (e > 0)
          for (int t = e - 1; t < T; ++t) x(m.u[l][static_cast<size_t>(t)]) = 1.0;
      }
      for (size_t k = 0; k < m.placements.size(); ++k) x(m.placements[k].var) = (*job.alloc)[k];
      std::optional<RelaxResult> r;
      try {
        r = repair_integer_point(m.program, x, &backend);
      } catch (const NumericalFailure&) {
        r.reset();
      }
      if (!r) continue;
      const double obj = m.program.evaluate_objective(r->x) * graph.bases.s_mva;
      std::lock_guard<std::mutex> lock(mu);
      if (obj < best - 1e-9 || (std::abs(obj - best) <= 1e-9 && j < best_job)) {
        best = obj;
        best_job = j;
      }
    }
  };
  const int n_threads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  if (best_job == jobs.size()) throw Infeasible("no enumerated schedule and placement has a feasible dispatch");
  const Job& bj = jobs[best_job];
  res.best_objective = best;
  res.crew_order = bj.tm->order;
  res.energized = *bj.energ;
  res.start.clear();
  for (int s : bj.tm->start) res.start.push_back(s >= 0 && s < T ? s + 1 : 0);
  for (size_t k = 0; k < m.placements.size(); ++k) {
    const int n = (*bj.alloc)[k];
    if (n <= 0) continue;
    const auto& pl = m.placements[k];
    res.placement.emplace_back(m.mix.catalog[static_cast<size_t>(pl.item)].label() + "@" +
                                   graph.nodes[static_cast<size_t>(pl.node)].name,
                               n);
  }
  return res;
}

// ---------------------------------------------------------------------------

json FeasibilityReport::to_json() const {
  auto list = [](const std::vector<Residual>& rs) {
    json a = json::array();
    for (const auto& r : rs) a.push_back({{"owner", r.owner}, {"period", r.period}, {"residual", r.value}});
    return a;
  };
  return {{"eq_flow_residuals", list(flow)},
          {"eq_storage_residuals", list(storage)},
          {"max_residual", max_residual},
          {"repaired_feasible", repaired_feasible},
          {"repair_violations", repair_violations},
          {"plan_objective_mwh", plan_objective},
          {"repaired_objective_mwh", repaired_objective},
          {"relaxation_gap_estimate_mwh", relaxation_gap_estimate}};
}

FeasibilityReport check_nonconvex_feasibility(const RestorationPlan& plan, const SuperNodeGraph& graph) {
  FeasibilityReport rep;
  const auto T = static_cast<size_t>(plan.n_periods);
  const auto N = graph.nodes.size();
  const auto E = graph.edges.size();
  if (plan.dispatch.size() != T || plan.flows.size() != T || plan.nodes.size() != N || plan.edges.size() != E)
    throw DimensionError("plan does not match the graph");
  constexpr double tol = 1e-6;
  auto fail = [&](const std::string& s) {
    rep.repaired_feasible = false;
    rep.repair_violations.push_back(s);
  };
  auto line_of = [&](size_t e) {
    if (!graph.edges[e].damaged) return -1;
    const auto it = std::find(plan.lines.begin(), plan.lines.end(), graph.edges[e].line_id);
    return it == plan.lines.end() ? -1 : static_cast<int>(it - plan.lines.begin());
  };
  auto closed = [&](size_t e, size_t t) {
    const int l = line_of(e);
    return l < 0 ? !graph.edges[e].damaged : plan.line_status[static_cast<size_t>(l)][t] == 1;
  };

  // Residuals at the plan's own point.
  for (size_t t = 0; t < T; ++t) {
    for (size_t e = 0; e < E; ++e) {
      if (!closed(e, t)) continue;
      const auto& f = plan.flows[t][e];
      const double v = plan.dispatch[t][static_cast<size_t>(graph.edges[e].from)].v;
      rep.flow.push_back({graph.edges[e].line_id, static_cast<int>(t) + 1, std::abs(f.p * f.p + f.q * f.q - f.l * v)});
    }
    for (const auto& u : plan.units) {
      if (u.loss.empty()) continue;
      const double v = plan.dispatch[t][static_cast<size_t>(u.node)].v;
      rep.storage.push_back(
          {u.label, static_cast<int>(t) + 1, std::abs(u.r_e * u.p[t] * u.p[t] + u.r_ct * u.q[t] * u.q[t] - u.loss[t] * v)});
    }
  }
  for (const auto& r : rep.flow) rep.max_residual = std::max(rep.max_residual, r.value);
  for (const auto& r : rep.storage) rep.max_residual = std::max(rep.max_residual, r.value);

  // Repair: sending-end flows and unit outputs kept, voltages propagated
  // from one node per closed component, losses lifted to at least their
  // exact values (never lowered).
  auto disp = plan.dispatch;
  auto flows = plan.flows;
  auto units = plan.units;
  for (size_t t = 0; t < T; ++t) {
    const std::string tag = " in period " + std::to_string(t + 1);
    std::vector<char> seen(N, 0);
    for (size_t root = 0; root < N; ++root) {
      if (seen[root]) continue;
      seen[root] = 1;
      std::vector<size_t> stack = {root};
      std::vector<char> used(E, 0);
      while (!stack.empty()) {
        const size_t a = stack.back();
        stack.pop_back();
        for (size_t e = 0; e < E; ++e) {
          if (used[e] || !closed(e, t)) continue;
          const auto& se = graph.edges[e];
          const auto from = static_cast<size_t>(se.from), to = static_cast<size_t>(se.to);
          if (from != a && to != a) continue;
          const size_t b = from == a ? to : from;
          auto& f = flows[t][e];
          const double s2 = f.p * f.p + f.q * f.q;
          const double z2 = se.r * se.r + se.x * se.x;
          const double drop = 2 * (se.r * f.p + se.x * f.q);
          if (seen[b]) {
            // Loop closure: the propagated voltages must agree.
            const double l = std::max(plan.flows[t][e].l, s2 / disp[t][from].v);
            const double r = disp[t][from].v - disp[t][to].v - drop + z2 * l;
            if (std::abs(r) > tol) fail("voltage loop mismatch on " + se.line_id + tag);
            used[e] = 1;
            continue;
          }
          used[e] = 1;
          seen[b] = 1;
          stack.push_back(b);
          const double l0 = plan.flows[t][e].l;
          if (from == a) {
            f.l = std::max(l0, s2 / disp[t][from].v);
            disp[t][to].v = disp[t][from].v - drop + z2 * f.l;
          } else {
            // v_from^2 - (v_to + drop) v_from + z2 s2 = 0, larger root,
            // unless the plan's current already exceeds the exact value.
            const double bq = disp[t][to].v + drop;
            const double disc = bq * bq - 4 * z2 * s2;
            if (disc < 0) {
              fail("no voltage solution upstream of " + se.line_id + tag);
              continue;
            }
            disp[t][from].v = 0.5 * (bq + std::sqrt(disc));
            f.l = s2 / disp[t][from].v;
            if (f.l < l0) {
              f.l = l0;
              disp[t][from].v = bq - z2 * l0;
            }
          }
        }
      }
    }
    for (auto& u : units)
      if (!u.loss.empty()) {
        const double v = disp[t][static_cast<size_t>(u.node)].v;
        u.loss[t] = std::max(u.loss[t], (u.r_e * u.p[t] * u.p[t] + u.r_ct * u.q[t] * u.q[t]) / v);
      }

    // Changed line losses move the power arriving at each receiving end.
    std::vector<double> dp(N, 0.0), dq(N, 0.0);
    for (size_t e = 0; e < E; ++e) {
      const double dl = flows[t][e].l - plan.flows[t][e].l;
      const auto to = static_cast<size_t>(graph.edges[e].to);
      dp[to] -= graph.edges[e].r * dl;
      dq[to] -= graph.edges[e].x * dl;
    }
    for (size_t i = 0; i < N; ++i) {
      NodeDispatch& d = disp[t][i];
      const std::string at = " at " + graph.nodes[i].name + tag;
      // Active surplus: serve more load, then reduce generation, storage
      // discharge and grid import. A deficit sheds load.
      double s = dp[i];
      if (s > 0) {
        const double more = std::min(s, d.p_demand - d.p_load);
        d.p_load += more;
        s -= more;
        for (auto& u : units) {
          if (s <= 0) break;
          if (u.node != static_cast<int>(i) || u.p[t] <= 0) continue;
          const double cut = std::min(s, u.p[t]);
          u.p[t] -= cut;
          d.p[static_cast<size_t>(u.cls)] -= cut;
          s -= cut;
        }
        const double g = std::min(s, d.p_grid);
        d.p_grid -= g;
        s -= g;
        if (s > tol) fail("active surplus " + std::to_string(s) + " p.u. cannot be absorbed" + at);
      } else if (s < 0) {
        const double shed = std::min(-s, d.p_load);
        d.p_load -= shed;
        s += shed;
        if (s < -tol) fail("active deficit " + std::to_string(-s) + " p.u. cannot be covered" + at);
      }
      double r = dq[i];
      if (r > 0) {
        const double more = std::min(r, d.q_demand - d.q_load);
        d.q_load += more;
        r -= more;
      } else if (r < 0) {
        const double shed = std::min(-r, d.q_load);
        d.q_load -= shed;
        r += shed;
      }
      if (std::abs(r) > tol) {
        // Remaining reactive mismatch goes to grid import, then to a storage converter.
        const auto& g = graph.nodes[i].grid.q;
        const double gq = t < g.size() ? g[t] : 0.0;
        const double take = std::clamp(d.q_grid + r, -gq, gq) - d.q_grid;
        if (gq > 0) {
          d.q_grid += take;
          r -= take;
        }
        for (auto& u : units) {
          if (std::abs(r) <= tol) break;
          if (u.node != static_cast<int>(i) || u.loss.empty()) continue;
          u.q[t] -= r;
          d.q[static_cast<size_t>(u.cls)] -= r;
          r = 0.0;
        }
        if (std::abs(r) > tol) fail("reactive mismatch " + std::to_string(r) + " p.u. cannot be absorbed" + at);
      }
    }

    for (size_t i = 0; i < N; ++i) {
      const auto& n = graph.nodes[i];
      const double v = disp[t][i].v;
      if (v < n.vmin * n.vmin - tol || v > n.vmax * n.vmax + tol)
        fail("voltage " + std::to_string(std::sqrt(std::max(v, 0.0))) + " p.u. out of bounds at " + n.name + tag);
    }
    for (size_t e = 0; e < E; ++e)
      if (flows[t][e].l > graph.edges[e].i2max + tol)
        fail("current limit exceeded on " + graph.edges[e].line_id + tag);
  }
  // Storage energy with exact losses.
  for (const auto& u : units) {
    if (u.loss.empty()) continue;
    double e = u.e0;
    for (size_t t = 0; t < T; ++t) {
      e -= (u.p[t] + u.loss[t]) * plan.dt;
      if (e < -tol || e > u.e_cap + tol) {
        fail("energy of " + u.label + " leaves [0, capacity] in period " + std::to_string(t + 1));
        break;
      }
    }
  }

  double served_plan = 0.0, served_rep = 0.0, demand = 0.0;
  for (size_t t = 0; t < T; ++t)
    for (size_t i = 0; i < N; ++i) {
      demand += plan.dispatch[t][i].p_demand;
      served_plan += plan.dispatch[t][i].p_load;
      served_rep += disp[t][i].p_load;
    }
  rep.plan_objective = (demand - served_plan) * plan.dt * plan.s_base;
  rep.repaired_objective = (demand - served_rep) * plan.dt * plan.s_base;
  rep.relaxation_gap_estimate = rep.repaired_objective - rep.plan_objective;
  return rep;
}

// ---------------------------------------------------------------------------

MixOracleResult enumerate_mixes(const ShortageForecast& forecast, const std::vector<MerSpec>& catalog,
                                const StudyHorizon& horizon, int max_per_kind) {
  const SizingModel model = build_sizing_model(forecast, catalog, horizon);
  const size_t K = catalog.size();
  std::vector<int> hi(K);
  for (size_t j = 0; j < K; ++j) hi[j] = std::min(max_per_kind, model.n_upper[j]);

  std::vector<std::pair<double, std::vector<int>>> mixes;
  std::vector<int> c(K, 0);
  while (true) {
    double cost = 0.0;
    for (size_t j = 0; j < K; ++j) cost += c[j] * catalog[j].cost;
    mixes.emplace_back(cost, c);
    size_t k = 0;
    while (k < K && ++c[k] > hi[k]) c[k++] = 0;
    if (k == K) break;
  }
  std::stable_sort(mixes.begin(), mixes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  MixOracleResult res;
  for (const auto& [cost, counts] : mixes) {
    ++res.mixes_checked;
    if (dispatch_for_mix(model, counts)) {
      res.found = true;
      res.best_cost = cost;
      res.counts = counts;
      break;
    }
  }
  return res;
}

}  // namespace errplan
