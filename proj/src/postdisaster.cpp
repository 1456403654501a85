#include "errplan/postdisaster.hpp"

#include "errplan/backend.hpp"
#include "errplan/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace errplan {

using nlohmann::json;

namespace {

std::string tag(int t) { return "[" + std::to_string(t + 1) + "]"; }

void add_hull(ConicProgram& prog, const HullConstraintSet& h, const std::array<int, 4>& y, const std::string& name) {
  for (const auto& c : h.cones) {
    std::vector<AffineExpr> rows;
    AffineExpr radius({}, c.e);
    for (int k = 0; k < 4; ++k) {
      if (c.a(k) != 0.0) rows.push_back(AffineExpr({{y[static_cast<size_t>(k)], c.a(k)}}));
      radius.add(y[static_cast<size_t>(k)], c.b(k));
    }
    prog.add_soc(std::move(rows), radius, name);
  }
  for (const auto& c : h.cuts) {
    AffineExpr e;
    for (int k = 0; k < 4; ++k) e.add(y[static_cast<size_t>(k)], c.c(k));
    prog.add_linear(e, Sense::le, c.d, name + "_cut");
  }
}

ResourceClass class_of(MerKind k) {
  switch (k) {
    case MerKind::MESS: return ResourceClass::MES;
    case MerKind::MPV: return ResourceClass::MPV;
    default: return ResourceClass::MDG;
  }
}

}  // namespace

RestorationModel build_restoration_model(const SuperNodeGraph& graph, const MerMixDecision& mix,
                                         const DamageScenario& scenario, const StudyHorizon& horizon,
                                         const RestorationOptions& options) {
  const int T = horizon.n_periods;
  const double dt = horizon.dt;
  const auto n_nodes = graph.nodes.size();
  if (T <= 0) throw ModelError("horizon has no periods");
  if (graph.horizon.n_periods != T) throw ModelError("graph horizon differs from the study horizon");
  if (mix.counts.size() != mix.catalog.size()) throw ModelError("mix counts differ from its catalog");
  const auto L = scenario.damaged.size();
  if (scenario.repair_time.size() != L) throw ModelError("repair times differ from the damaged-line count");
  if (scenario.travel.size() != L) throw ModelError("travel matrix differs from the damaged-line count");
  for (const auto& row : scenario.travel)
    if (row.size() != L) throw ModelError("travel matrix is not square");
  if (!scenario.initial_travel.empty() && scenario.initial_travel.size() != L)
    throw ModelError("initial travel times differ from the damaged-line count");
  for (const auto& n : graph.nodes) {
    const auto& ld = n.load;
    for (const auto* s : {&ld.p_total, &ld.p_critical, &ld.q_total, &ld.q_critical})
      if (static_cast<int>(s->size()) != T) throw ModelError("node " + n.name + ": load series length differs");
    for (const auto& d : n.ders)
      if (d.p_cap.size() != 1 && static_cast<int>(d.p_cap.size()) != T)
        throw ModelError("node " + n.name + ": DER availability length differs");
  }
  std::vector<double> profile = options.mpv_profile.empty() ? half_sine_profile(T, dt) : options.mpv_profile;
  if (static_cast<int>(profile.size()) != T) throw ModelError("MPV profile length differs from the horizon");

  RestorationModel m;
  m.graph = graph;
  m.mix = mix;
  m.horizon = horizon;
  m.options = options;
  m.options.mpv_profile = profile;
  m.n_crews = scenario.n_crews;
  m.lines = scenario.damaged;
  m.repair_time = scenario.repair_time;
  m.travel = scenario.travel;
  m.initial_travel = scenario.initial_travel.empty() ? std::vector<int>(L, 0) : scenario.initial_travel;
  ConicProgram& prog = m.program;
  const bool hull = options.relax == Relaxation::hull;

  // Line status and crews.
  // A line cannot close before its first possible arrival plus its repair time.
  m.u.assign(L, {});
  for (size_t l = 0; l < L; ++l) {
    const int earliest = std::max(m.initial_travel[l] - 1, 0) + m.repair_time[l];
    for (int t = 0; t < T; ++t)
      m.u[l].push_back(prog.add_variable("u[" + m.lines[l] + "]" + tag(t), 0, t < earliest ? 0 : 1,
                                         Integrality::binary, BranchClass::line));
  }
  const auto M = static_cast<size_t>(m.n_crews);
  m.alpha.assign(M, std::vector<std::vector<int>>(L));
  m.beta.assign(M, std::vector<std::vector<int>>(L));
  for (size_t c = 0; c < M; ++c)
    for (size_t l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        const std::string s = "[" + std::to_string(c + 1) + "][" + m.lines[l] + "]" + tag(t);
        const double ub = t + 1 < m.initial_travel[l] ? 0.0 : 1.0;
        m.alpha[c][l].push_back(prog.add_variable("alpha" + s, 0, ub, Integrality::binary, BranchClass::crew));
        m.beta[c][l].push_back(prog.add_variable("beta" + s, 0, ub, Integrality::binary, BranchClass::crew));
      }
  for (size_t c = 0; c < M; ++c) {
    const std::string cs = "[" + std::to_string(c + 1) + "]";
    for (int t = 0; t < T; ++t) {
      if (L == 0) break;
      AffineExpr one;
      for (size_t l = 0; l < L; ++l) one.add(m.alpha[c][l][static_cast<size_t>(t)], 1.0);
      prog.add_linear(one, Sense::le, 1.0, "visit_one" + cs + tag(t));
    }
    for (size_t l = 0; l < L; ++l)
      for (int t = 0; t < T; ++t) {
        const auto tt = static_cast<size_t>(t);
        prog.add_linear(AffineExpr({{m.beta[c][l][tt], 1.0}, {m.alpha[c][l][tt], -1.0}}), Sense::le, 0.0,
                        "work_visit" + cs + "[" + m.lines[l] + "]" + tag(t));
      }
    for (size_t a = 0; a < L; ++a)
      for (size_t b = 0; b < L; ++b) {
        if (a == b) continue;
        for (int tau = 1; tau < m.travel[a][b]; ++tau)
          for (int t = 0; t + tau < T; ++t)
            prog.add_linear(AffineExpr({{m.alpha[c][a][static_cast<size_t>(t)], 1.0},
                                        {m.alpha[c][b][static_cast<size_t>(t + tau)], 1.0}}),
                            Sense::le, 1.0, "travel" + cs + "[" + m.lines[a] + "," + m.lines[b] + "]" + tag(t));
      }
  }
  for (size_t l = 0; l < L; ++l) {
    const std::string ls = "[" + m.lines[l] + "]";
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      if (M > 1) {
        AffineExpr w;
        for (size_t c = 0; c < M; ++c) w.add(m.beta[c][l][tt], 1.0);
        prog.add_linear(w, Sense::le, 1.0, "one_crew" + ls + tag(t));
      }
      if (t == 0) continue;
      prog.add_linear(AffineExpr({{m.u[l][tt - 1], 1.0}, {m.u[l][tt], -1.0}}), Sense::le, 0.0,
                      "u_monotone" + ls + tag(t));
      AffineExpr rep({{m.u[l][tt], static_cast<double>(m.repair_time[l])}});
      for (size_t c = 0; c < M; ++c)
        for (int s = 0; s < t; ++s) rep.add(m.beta[c][l][static_cast<size_t>(s)], -1.0);
      prog.add_linear(rep, Sense::le, 0.0, "repair" + ls + tag(t));
    }
  }

  // MER allocation.
  std::array<std::vector<int>, 3> items_of;  // by MerKind
  for (size_t j = 0; j < mix.catalog.size(); ++j) {
    if (mix.counts[j] <= 0) continue;
    items_of[static_cast<size_t>(mix.catalog[j].kind)].push_back(static_cast<int>(j));
    AffineExpr total;
    for (size_t i = 0; i < n_nodes; ++i) {
      const int v = prog.add_variable("N[" + mix.catalog[j].label() + "][" + graph.nodes[i].name + "]", 0,
                                      mix.counts[j], Integrality::integer, BranchClass::mer);
      m.placements.push_back({static_cast<int>(j), static_cast<int>(i), v});
      total.add(v, 1.0);
    }
    prog.add_linear(total, Sense::le, mix.counts[j], "mer_total[" + mix.catalog[j].label() + "]");
  }
  auto alloc_expr = [&](MerKind kind, int node, auto&& coef) {
    AffineExpr e;
    for (const auto& pl : m.placements)
      if (pl.node == node && mix.catalog[static_cast<size_t>(pl.item)].kind == kind)
        e.add(pl.var, coef(mix.catalog[static_cast<size_t>(pl.item)]));
    return e;
  };

  // Nodes.
  m.pl.assign(n_nodes, {});
  m.ql.assign(n_nodes, {});
  m.v.assign(n_nodes, {});
  m.pg.assign(n_nodes, std::vector<int>(static_cast<size_t>(T), -1));
  m.qg.assign(n_nodes, std::vector<int>(static_cast<size_t>(T), -1));
  double offset = 0.0;
  for (size_t i = 0; i < n_nodes; ++i) {
    const SuperNode& n = graph.nodes[i];
    const SquaredVoltage vb = squared_bounds(n.vmin, n.vmax);
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      const std::string s = "[" + n.name + "]" + tag(t);
      const double ptot = n.load.p_total[tt];
      const double qtot = n.load.q_total[tt];
      const double plo = std::min(options.critical_floor * n.load.p_critical[tt], ptot);
      const double qlo = std::min(options.critical_floor * n.load.q_critical[tt], qtot);
      m.pl[i].push_back(prog.add_variable("pL" + s, plo, ptot));
      m.ql[i].push_back(prog.add_variable("qL" + s, qlo, qtot));
      prog.set_objective(m.pl[i].back(), -dt);
      offset += ptot * dt;
      m.v[i].push_back(prog.add_variable("v" + s, vb.lo, vb.hi));
      const double gp = tt < n.grid.p.size() ? n.grid.p[tt] : 0.0;
      const double gq = tt < n.grid.q.size() ? n.grid.q[tt] : 0.0;
      if (gp > 0 || gq > 0) {
        m.pg[i][tt] = prog.add_variable("pG" + s, 0, gp);
        m.qg[i][tt] = prog.add_variable("qG" + s, -gq, gq);
      }
    }
  }
  prog.set_objective_offset(offset);
  m.demand_energy = offset;

  auto add_reactive_policy = [&](int vp, int vq, double k1, double k2, const std::string& s) {
    prog.add_linear(AffineExpr({{vq, 1.0}, {vp, -k1}}), Sense::ge, 0.0, "k1" + s);
    prog.add_linear(AffineExpr({{vq, 1.0}, {vp, -k2}}), Sense::le, 0.0, "k2" + s);
  };

  auto add_storage = [&](ResourceVars& r, double smax, const SquaredVoltage& vb, const AffineExpr& radius,
                         const std::string& s) {
    const double loss_max = r.r_e * smax * smax / vb.lo;
    const StorageHull variant = select_storage_hull(r.r_e, r.r_ct, smax, vb, options.hull_seed);
    m.storage_hulls.push_back(variant);
    const auto h = hull_storage_loss(r.r_e, r.r_ct, smax, vb, variant);
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      r.p.push_back(prog.add_variable("p_" + s + tag(t), -smax, smax));
      r.q.push_back(prog.add_variable("q_" + s + tag(t), -smax, smax));
      r.loss.push_back(prog.add_variable("ploss_" + s + tag(t), 0, loss_max));
      prog.add_soc({AffineExpr({{r.p.back(), 1.0}}), AffineExpr({{r.q.back(), 1.0}})}, radius, "mva_" + s + tag(t));
      const int vv = m.v[static_cast<size_t>(r.node)][tt];
      if (hull) {
        add_hull(prog, h, {r.p.back(), r.q.back(), r.loss.back(), vv}, "loss_" + s + tag(t));
      } else {
        ExactTerm e;
        e.storage = true;
        e.p = r.p.back();
        e.q = r.q.back();
        e.dep = r.loss.back();
        e.v = vv;
        e.r_e = r.r_e;
        e.r_ct = r.r_ct;
        e.owner = static_cast<int>(m.resources.size());
        e.period = t;
        m.exact_terms.push_back(e);
      }
    }
    // Used energy after each period lies in [e0 - e_cap, e0], both sides
    // shifted by the allocation-dependent `energy` term.
    for (int t = 0; t < T; ++t) {
      AffineExpr used;
      for (int s2 = 0; s2 <= t; ++s2) {
        used.add(r.p[static_cast<size_t>(s2)], dt);
        used.add(r.loss[static_cast<size_t>(s2)], dt);
      }
      AffineExpr upper = used;
      for (const auto& term : r.energy.terms) upper.add(term.var, -term.coef);
      prog.add_linear(upper, Sense::le, r.e0, "soc_lo_" + s + tag(t));
      // The allocation part of e0 and e_cap cancels here.
      prog.add_linear(used, Sense::ge, r.e0 - r.e_cap, "soc_hi_" + s + tag(t));
    }
  };

  for (size_t i = 0; i < n_nodes; ++i) {
    const SuperNode& n = graph.nodes[i];
    const SquaredVoltage vb = squared_bounds(n.vmin, n.vmax);
    const int node = static_cast<int>(i);
    for (MerKind kind : {MerKind::MDG, MerKind::MESS, MerKind::MPV}) {
      const auto& items = items_of[static_cast<size_t>(kind)];
      if (items.empty()) continue;
      const MerSpec& first = mix.catalog[static_cast<size_t>(items[0])];
      ResourceVars r;
      r.cls = class_of(kind);
      r.node = node;
      r.label = std::string(to_string(r.cls)) + "@" + n.name;
      if (kind == MerKind::MESS) {
        double smax = 0.0;
        for (int j : items) {
          const auto& c = mix.catalog[static_cast<size_t>(j)];
          if (c.r_e != first.r_e || c.r_ct != first.r_ct)
            throw ModelError("MESS sizes with different resistances are not supported");
          smax += mix.counts[static_cast<size_t>(j)] * c.s_size;
        }
        r.r_e = first.r_e;
        r.r_ct = first.r_ct;
        r.energy = alloc_expr(kind, node, [](const MerSpec& c) { return c.e_size; });
        // The energy cap equals the initial energy: E0 = e_cap = sum N E.
        r.e0 = 0.0;
        r.e_cap = 0.0;
        const AffineExpr radius = alloc_expr(kind, node, [](const MerSpec& c) { return c.s_size; });
        add_storage(r, smax, vb, radius, r.label);
      } else {
        double pmax = 0.0;
        for (int j : items)
          pmax += mix.counts[static_cast<size_t>(j)] * mix.catalog[static_cast<size_t>(j)].p_size;
        for (int t = 0; t < T; ++t) {
          const auto tt = static_cast<size_t>(t);
          const double scale = kind == MerKind::MPV ? profile[tt] : 1.0;
          r.p.push_back(prog.add_variable("p_" + r.label + tag(t), 0, pmax * scale));
          r.q.push_back(prog.add_variable("q_" + r.label + tag(t), 0, first.k2 * pmax * scale));
          AffineExpr cap = alloc_expr(kind, node, [&](const MerSpec& c) { return -c.p_size * scale; });
          cap.add(r.p.back(), 1.0);
          prog.add_linear(cap, Sense::le, 0.0, "cap_" + r.label + tag(t));
          add_reactive_policy(r.p.back(), r.q.back(), first.k1, first.k2, "_" + r.label + tag(t));
        }
      }
      m.resources.push_back(std::move(r));
    }
    for (size_t d = 0; d < n.ders.size(); ++d) {
      const DerUnit& u = n.ders[d];
      ResourceVars r;
      r.node = node;
      r.cls = u.kind == DerKind::ESS ? ResourceClass::ES : u.kind == DerKind::PV ? ResourceClass::PV : ResourceClass::DG;
      r.label = std::string(to_string(r.cls)) + std::to_string(d) + "@" + n.name;
      if (u.kind == DerKind::ESS) {
        if (!u.r_e || !u.r_ct) throw MissingParameter("storage at bus " + u.bus + ": r_e/r_ct not set");
        r.r_e = *u.r_e;
        r.r_ct = *u.r_ct;
        r.e0 = u.e_surplus;
        r.e_cap = u.e_cap;
        add_storage(r, u.s_cap, vb, AffineExpr({}, u.s_cap), r.label);
      } else {
        for (int t = 0; t < T; ++t) {
          r.p.push_back(prog.add_variable("p_" + r.label + tag(t), 0, u.p_max(t)));
          r.q.push_back(prog.add_variable("q_" + r.label + tag(t), 0, u.k2 * u.p_max(t)));
          add_reactive_policy(r.p.back(), r.q.back(), u.k1, u.k2, "_" + r.label + tag(t));
        }
      }
      m.resources.push_back(std::move(r));
    }
  }

  // Largest active/reactive output each node can ever produce, for flow bounds.
  std::vector<std::vector<double>> pcap(n_nodes, std::vector<double>(static_cast<size_t>(T), 0.0));
  std::vector<std::vector<double>> qcap = pcap;
  std::vector<double> mer_p(static_cast<size_t>(T), 0.0), mer_q(static_cast<size_t>(T), 0.0);
  for (size_t j = 0; j < mix.catalog.size(); ++j) {
    const MerSpec& c = mix.catalog[j];
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      const double n = mix.counts[j];
      const double p = c.kind == MerKind::MESS ? c.s_size : c.kind == MerKind::MPV ? c.p_size * profile[tt] : c.p_size;
      mer_p[tt] += n * p;
      mer_q[tt] += n * (c.kind == MerKind::MESS ? c.s_size : c.k2 * p);
    }
  }
  for (size_t i = 0; i < n_nodes; ++i) {
    const SuperNode& n = graph.nodes[i];
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      for (const auto& d : n.ders) {
        const double p = d.kind == DerKind::ESS ? d.s_cap : d.p_max(t);
        pcap[i][tt] += p;
        qcap[i][tt] += d.kind == DerKind::ESS ? d.s_cap : d.k2 * p;
      }
      if (tt < n.grid.p.size()) pcap[i][tt] += n.grid.p[tt];
      if (tt < n.grid.q.size()) qcap[i][tt] += std::abs(n.grid.q[tt]);
    }
  }
  // Nodes on the `from` side of each edge when the graph is a tree; empty otherwise.
  auto side_of = [&](size_t edge) {
    std::vector<char> seen(n_nodes, 0);
    std::vector<int> stack = {graph.edges[edge].from};
    seen[static_cast<size_t>(graph.edges[edge].from)] = 1;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (size_t f = 0; f < graph.edges.size(); ++f) {
        if (f == edge) continue;
        const auto& g = graph.edges[f];
        int b = -1;
        if (g.from == a) b = g.to;
        if (g.to == a) b = g.from;
        if (b < 0 || seen[static_cast<size_t>(b)]) continue;
        seen[static_cast<size_t>(b)] = 1;
        stack.push_back(b);
      }
    }
    if (seen[static_cast<size_t>(graph.edges[edge].to)]) seen.assign(n_nodes, 2);  // loop
    return seen;
  };

  // Flows.
  for (size_t e = 0; e < graph.edges.size(); ++e) {
    const SuperEdge& se = graph.edges[e];
    EdgeVars ev;
    if (se.damaged) {
      ev.line = scenario.damaged_index(se.line_id);
      if (ev.line < 0) throw ModelError("edge " + se.line_id + " is not in the damage scenario");
    }
    const auto& ni = graph.nodes[static_cast<size_t>(se.from)];
    const auto& nk = graph.nodes[static_cast<size_t>(se.to)];
    const SquaredVoltage vi = squared_bounds(ni.vmin, ni.vmax);
    const SquaredVoltage vk = squared_bounds(nk.vmin, nk.vmax);
    const double smax = se.smax;
    const double lmax = se.i2max;
    const double z2 = se.r * se.r + se.x * se.x;
    const double big_m = (std::max(vi.hi, vk.hi) - std::min(vi.lo, vk.lo)) + 2 * (se.r + se.x) * smax + z2 * lmax;
    const auto h = hull_line_flow(smax, vi);
    const auto side = side_of(e);
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      const std::string s = "[" + se.line_id + "]" + tag(t);
      // The sending end carries at most what the from-side can generate,
      // and the reverse flow at most what the to-side can generate.
      double p_hi = smax, p_lo = smax, q_hi = smax, q_lo = smax;
      if (side[0] != 2) {
        double pa = mer_p[tt], pb = mer_p[tt], qa = mer_q[tt], qb = mer_q[tt];
        for (size_t i = 0; i < n_nodes; ++i) {
          (side[i] ? pa : pb) += pcap[i][tt];
          (side[i] ? qa : qb) += qcap[i][tt];
        }
        p_hi = std::min(smax, pa);
        p_lo = std::min(smax, pb);
        q_hi = std::min(smax, qa);
        q_lo = std::min(smax, qb);
      }
      ev.p.push_back(prog.add_variable("p" + s, -p_lo, p_hi));
      ev.q.push_back(prog.add_variable("q" + s, -q_lo, q_hi));
      ev.l.push_back(prog.add_variable("l" + s, 0, lmax));
      const int vp = ev.p.back(), vq = ev.q.back(), vl = ev.l.back();
      const int vfrom = m.v[static_cast<size_t>(se.from)][tt];
      const int vto = m.v[static_cast<size_t>(se.to)][tt];
      prog.add_soc({AffineExpr({{vp, 1.0}}), AffineExpr({{vq, 1.0}})}, AffineExpr({}, smax), "smax" + s);
      AffineExpr drop({{vfrom, 1.0}, {vto, -1.0}, {vp, -2 * se.r}, {vq, -2 * se.x}, {vl, z2}});
      if (ev.line >= 0) {
        const int vu = m.u[static_cast<size_t>(ev.line)][tt];
        prog.add_linear(AffineExpr({{vp, 1.0}, {vu, -p_hi}}), Sense::le, 0.0, "open_hi" + s);
        prog.add_linear(AffineExpr({{vp, 1.0}, {vu, p_lo}}), Sense::ge, 0.0, "open_lo" + s);
        prog.add_linear(AffineExpr({{vq, 1.0}, {vu, -q_hi}}), Sense::le, 0.0, "open_qhi" + s);
        prog.add_linear(AffineExpr({{vq, 1.0}, {vu, q_lo}}), Sense::ge, 0.0, "open_qlo" + s);
        prog.add_linear(AffineExpr({{vl, 1.0}, {vu, -lmax}}), Sense::le, 0.0, "open_l" + s);
        AffineExpr hi = drop;
        hi.add(vu, big_m);
        prog.add_linear(hi, Sense::le, big_m, "vdrop_hi" + s);
        AffineExpr lo = drop;
        lo.add(vu, -big_m);
        prog.add_linear(lo, Sense::ge, -big_m, "vdrop_lo" + s);
      } else {
        prog.add_linear(drop, Sense::eq, 0.0, "vdrop" + s);
      }
      if (hull) {
        add_hull(prog, h, {vp, vq, vl, vfrom}, "flow" + s);
      } else {
        ExactTerm x;
        x.p = vp;
        x.q = vq;
        x.dep = vl;
        x.v = vfrom;
        x.owner = static_cast<int>(e);
        x.period = t;
        m.exact_terms.push_back(x);
      }
    }
    m.edges.push_back(std::move(ev));
  }

  // Nodal balance: injection = outgoing sending-end flow - incoming receiving-end flow.
  for (size_t i = 0; i < n_nodes; ++i) {
    for (int t = 0; t < T; ++t) {
      const auto tt = static_cast<size_t>(t);
      AffineExpr pb, qb;
      for (const auto& r : m.resources) {
        if (r.node != static_cast<int>(i)) continue;
        pb.add(r.p[tt], 1.0);
        qb.add(r.q[tt], 1.0);
      }
      if (m.pg[i][tt] >= 0) {
        pb.add(m.pg[i][tt], 1.0);
        qb.add(m.qg[i][tt], 1.0);
      }
      pb.add(m.pl[i][tt], -1.0);
      qb.add(m.ql[i][tt], -1.0);
      for (size_t e = 0; e < graph.edges.size(); ++e) {
        const SuperEdge& se = graph.edges[e];
        const EdgeVars& ev = m.edges[e];
        if (se.from == static_cast<int>(i)) {
          pb.add(ev.p[tt], -1.0);
          qb.add(ev.q[tt], -1.0);
        }
        if (se.to == static_cast<int>(i)) {
          pb.add(ev.p[tt], 1.0).add(ev.l[tt], -se.r);
          qb.add(ev.q[tt], 1.0).add(ev.l[tt], -se.x);
        }
      }
      const std::string s = "[" + graph.nodes[i].name + "]" + tag(t);
      prog.add_linear(pb, Sense::eq, 0.0, "p_balance" + s);
      prog.add_linear(qb, Sense::eq, 0.0, "q_balance" + s);
    }
  }
  prog.validate();
  return m;
}

// ---------------------------------------------------------------------------

std::vector<int> RestorationPlan::energized_period() const {
  std::vector<int> out;
  for (const auto& row : line_status) {
    int first = 0;
    for (size_t t = 0; t < row.size(); ++t)
      if (row[t] == 1) {
        first = static_cast<int>(t) + 1;
        break;
      }
    out.push_back(first);
  }
  return out;
}

namespace {

int bit(double v) { return v > 0.5 ? 1 : 0; }

}  // namespace

RestorationPlan extract_plan(const RestorationModel& m, const Eigen::VectorXd& x_in) {
  const int T = m.n_periods();
  const auto tsz = static_cast<size_t>(T);
  Eigen::VectorXd x = x_in;
  RestorationPlan plan;
  plan.s_base = m.graph.bases.s_mva;
  plan.dt = m.horizon.dt;
  plan.n_periods = T;
  for (const auto& n : m.graph.nodes) plan.nodes.push_back(n.name);
  for (const auto& e : m.graph.edges) plan.edges.push_back(e.line_id);
  plan.lines = m.lines;
  plan.repair_time = m.repair_time;
  plan.travel = m.travel;
  plan.initial_travel = m.initial_travel;
  for (size_t j = 0; j < m.mix.catalog.size(); ++j) {
    plan.mix_labels.push_back(m.mix.catalog[j].label());
    plan.mix_counts.push_back(m.mix.counts[j]);
  }

  // Integer parts are snapped first; flows on open lines are zeroed exactly.
  for (int i = 0; i < m.program.num_variables(); ++i)
    if (m.program.variable(i).kind != Integrality::continuous) x(i) = std::round(x(i));
  for (const auto& ev : m.edges) {
    if (ev.line < 0) continue;
    for (size_t t = 0; t < tsz; ++t)
      if (x(m.u[static_cast<size_t>(ev.line)][t]) < 0.5) x(ev.p[t]) = x(ev.q[t]) = x(ev.l[t]) = 0.0;
  }

  for (const auto& row : m.u) {
    std::vector<int> r;
    for (int v : row) r.push_back(bit(x(v)));
    plan.line_status.push_back(r);
  }
  for (size_t c = 0; c < m.alpha.size(); ++c) {
    std::vector<std::vector<int>> va, vb;
    for (size_t l = 0; l < m.lines.size(); ++l) {
      std::vector<int> ra, rb;
      for (size_t t = 0; t < tsz; ++t) {
        ra.push_back(bit(x(m.alpha[c][l][t])));
        rb.push_back(bit(x(m.beta[c][l][t])));
      }
      va.push_back(ra);
      vb.push_back(rb);
    }
    plan.crew_visit.push_back(va);
    plan.crew_work.push_back(vb);
  }
  for (const auto& pl : m.placements) {
    const int n = static_cast<int>(std::lround(x(pl.var)));
    if (n <= 0) continue;
    const MerSpec& c = m.mix.catalog[static_cast<size_t>(pl.item)];
    plan.mer_placement.push_back({to_string(c.kind), c.size_index, c.label(), m.graph.nodes[static_cast<size_t>(pl.node)].name, n});
  }
  plan.dispatch.assign(tsz, std::vector<NodeDispatch>(m.graph.nodes.size()));
  plan.flows.assign(tsz, std::vector<EdgeDispatch>(m.graph.edges.size()));
  for (size_t t = 0; t < tsz; ++t) {
    for (size_t i = 0; i < m.graph.nodes.size(); ++i) {
      NodeDispatch& d = plan.dispatch[t][i];
      d.p_demand = m.graph.nodes[i].load.p_total[t];
      d.q_demand = m.graph.nodes[i].load.q_total[t];
      d.p_load = x(m.pl[i][t]);
      d.q_load = x(m.ql[i][t]);
      d.v = x(m.v[i][t]);
      if (m.pg[i][t] >= 0) {
        d.p_grid = x(m.pg[i][t]);
        d.q_grid = x(m.qg[i][t]);
      }
    }
    for (const auto& r : m.resources) {
      NodeDispatch& d = plan.dispatch[t][static_cast<size_t>(r.node)];
      d.p[static_cast<size_t>(r.cls)] += x(r.p[t]);
      d.q[static_cast<size_t>(r.cls)] += x(r.q[t]);
      if (!r.loss.empty()) d.storage_loss += x(r.loss[t]);
    }
    for (size_t e = 0; e < m.edges.size(); ++e)
      plan.flows[t][e] = {x(m.edges[e].p[t]), x(m.edges[e].q[t]), x(m.edges[e].l[t])};
  }
  for (const auto& r : m.resources) {
    UnitDispatch u;
    u.label = r.label;
    u.cls = r.cls;
    u.node = r.node;
    for (size_t t = 0; t < tsz; ++t) {
      u.p.push_back(x(r.p[t]));
      u.q.push_back(x(r.q[t]));
      if (!r.loss.empty()) u.loss.push_back(x(r.loss[t]));
    }
    if (!r.loss.empty()) {
      const double extra = r.energy.eval(x);
      u.r_e = r.r_e;
      u.r_ct = r.r_ct;
      u.e0 = r.e0 + extra;
      u.e_cap = r.e_cap + extra;
    }
    plan.units.push_back(u);
  }
  double served = 0.0;
  for (size_t i = 0; i < m.pl.size(); ++i)
    for (size_t t = 0; t < tsz; ++t) served += x(m.pl[i][t]) * m.horizon.dt;
  plan.objective = (m.demand_energy - served) * plan.s_base;
  plan.x = x;
  return plan;
}

std::optional<RestorationPlan> dispatch_for_schedule(const RestorationModel& model, const Eigen::VectorXd& integers) {
  const auto r = repair_integer_point(model.program, integers);
  if (!r) return std::nullopt;
  RestorationPlan p = extract_plan(model, r->x);
  p.status = "fixed";
  return p;
}

// ---------------------------------------------------------------------------

CrewTimetable list_schedule(const RestorationModel& m, const std::vector<int>& priority) {
  const auto L = m.lines.size();
  const auto C = static_cast<size_t>(m.n_crews);
  CrewTimetable tt;
  tt.order.assign(C, {});
  tt.start.assign(L, -1);
  tt.crew.assign(L, -1);
  if (C == 0) return tt;
  std::vector<int> free_at(C, 0);
  for (int l : priority) {
    const auto lu = static_cast<size_t>(l);
    int best_c = -1, best_s = 0;
    for (size_t c = 0; c < C; ++c) {
      int s = std::max(free_at[c], m.initial_travel[lu] - 1);
      for (int a : tt.order[c]) {
        const int end = tt.start[static_cast<size_t>(a)] + m.repair_time[static_cast<size_t>(a)] - 1;
        s = std::max(s, end + std::max(1, m.travel[static_cast<size_t>(a)][lu]));
      }
      if (best_c < 0 || s < best_s) {
        best_c = static_cast<int>(c);
        best_s = s;
      }
    }
    const auto bc = static_cast<size_t>(best_c);
    tt.order[bc].push_back(l);
    tt.start[lu] = best_s;
    tt.crew[lu] = best_c;
    free_at[bc] = best_s + m.repair_time[lu];
  }
  return tt;
}

Eigen::VectorXd integer_point(const RestorationModel& m, const CrewTimetable& tt, const std::vector<int>& alloc) {
  const int T = m.n_periods();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m.program.num_variables());
  for (size_t l = 0; l < m.lines.size(); ++l) {
    if (tt.start[l] < 0) continue;
    const auto c = static_cast<size_t>(tt.crew[l]);
    const int s0 = tt.start[l];
    const int done = s0 + m.repair_time[l];
    for (int t = s0; t < std::min(done, T); ++t) {
      x(m.alpha[c][l][static_cast<size_t>(t)]) = 1.0;
      x(m.beta[c][l][static_cast<size_t>(t)]) = 1.0;
    }
    for (int t = done; t < T; ++t) x(m.u[l][static_cast<size_t>(t)]) = 1.0;
  }
  for (size_t k = 0; k < m.placements.size() && k < alloc.size(); ++k) x(m.placements[k].var) = alloc[k];
  return x;
}

namespace {

// Starting incumbent: coordinate search over unit placement and crew
// priority order, each candidate scored by its fixed-integer dispatch.
std::optional<Eigen::VectorXd> heuristic_start(const RestorationModel& m, int budget, std::uint64_t seed) {
  const auto L = m.lines.size();
  int used = 0;
  auto score = [&](const CrewTimetable& tt, const std::vector<int>& alloc) -> std::optional<double> {
    ++used;
    const auto r = repair_integer_point(m.program, integer_point(m, tt, alloc));
    if (!r) return std::nullopt;
    return m.program.evaluate_objective(r->x);
  };

  // Units of each catalog item start at the node with the largest demand.
  const auto n_nodes = m.graph.nodes.size();
  std::vector<double> demand(n_nodes, 0.0);
  for (size_t i = 0; i < n_nodes; ++i)
    for (double p : m.graph.nodes[i].load.p_total) demand[i] += p;
  const auto heavy = static_cast<int>(std::max_element(demand.begin(), demand.end()) - demand.begin());
  std::vector<int> alloc(m.placements.size(), 0);
  for (size_t k = 0; k < m.placements.size(); ++k)
    if (m.placements[k].node == heavy) alloc[k] = m.mix.counts[static_cast<size_t>(m.placements[k].item)];

  std::vector<int> prio(L);
  std::iota(prio.begin(), prio.end(), 0);
  std::stable_sort(prio.begin(), prio.end(),
                   [&](int a, int b) { return m.repair_time[static_cast<size_t>(a)] < m.repair_time[static_cast<size_t>(b)]; });

  CrewTimetable best_tt = list_schedule(m, prio);
  std::optional<double> best = score(best_tt, alloc);

  auto try_alloc = [&]() {
    // Move each unit group to every node, keep improvements.
    std::vector<int> items;
    for (const auto& p : m.placements)
      if (std::find(items.begin(), items.end(), p.item) == items.end()) items.push_back(p.item);
    for (int item : items) {
      const int count = m.mix.counts[static_cast<size_t>(item)];
      for (int unit = 0; unit < count; ++unit) {
        for (size_t node = 0; node < n_nodes && used < budget; ++node) {
          std::vector<int> cand = alloc;
          // Take one unit of this item from wherever it sits and place it on `node`.
          size_t from = m.placements.size();
          for (size_t k = 0; k < m.placements.size(); ++k)
            if (m.placements[k].item == item && cand[k] > 0 && m.placements[k].node != static_cast<int>(node)) {
              from = k;
              break;
            }
          if (from == m.placements.size()) continue;
          cand[from] -= 1;
          for (size_t k = 0; k < m.placements.size(); ++k)
            if (m.placements[k].item == item && m.placements[k].node == static_cast<int>(node)) cand[k] += 1;
          const auto s = score(best_tt, cand);
          if (s && (!best || *s < *best - 1e-9)) {
            best = s;
            alloc = cand;
          }
        }
      }
    }
  };
  try_alloc();

  std::mt19937_64 rng(seed);
  auto try_order = [&](const std::vector<int>& order) {
    const CrewTimetable tt = list_schedule(m, order);
    const auto s = score(tt, alloc);
    if (s && (!best || *s < *best - 1e-9)) {
      best = s;
      best_tt = tt;
      prio = order;
      return true;
    }
    return false;
  };
  if (L > 1) {
    // Pairwise swaps of the priority list, then random restarts.
    bool improved = true;
    while (improved && used < budget) {
      improved = false;
      for (size_t a = 0; a + 1 < L && used < budget; ++a)
        for (size_t b = a + 1; b < L && used < budget; ++b) {
          std::vector<int> cand = prio;
          std::swap(cand[a], cand[b]);
          if (try_order(cand)) improved = true;
        }
    }
    while (used < budget) {
      std::vector<int> cand = prio;
      std::shuffle(cand.begin(), cand.end(), rng);
      try_order(cand);
    }
    try_alloc();
  }
  if (!best) return std::nullopt;
  return integer_point(m, best_tt, alloc);
}

}  // namespace

RestorationPlan solve_restoration(const RestorationModel& model, const RestorationConfig& config) {
  if (model.options.relax != Relaxation::hull) throw ModelError("only the hull relaxation can be solved");
  const auto t0 = std::chrono::steady_clock::now();
  BnBConfig bnb = config.bnb;
  if (config.use_hint && !bnb.hint) bnb.hint = heuristic_start(model, config.hint_budget, config.seed);
  const MipSolution r = solve_michp(model.program, bnb);
  if (r.status == MipStatus::infeasible) throw Infeasible("restoration model is infeasible");
  if (r.status == MipStatus::unbounded) throw SolverFailure("restoration relaxation is unbounded");
  if (r.x.size() == 0) throw TimeLimit("search limit reached without a feasible restoration plan");
  RestorationPlan plan = extract_plan(model, r.x);
  plan.status = r.status == MipStatus::optimal ? "optimal" : "limit";
  plan.bound = r.bound * plan.s_base;
  plan.gap = r.gap;
  plan.node_count = r.node_count;
  plan.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return plan;
}

// ---------------------------------------------------------------------------

double EnergySeries::unserved() const {
  double s = 0.0;
  for (size_t t = 0; t < ter.size(); ++t) s += ter[t] - tes[t];
  return s;
}

EnergySeries extract_energy_series(const RestorationPlan& plan) {
  EnergySeries es;
  for (const auto& row : plan.dispatch) {
    double ter = 0.0, tes = 0.0;
    for (const auto& d : row) {
      ter += d.p_demand * plan.dt * plan.s_base;
      tes += d.p_load * plan.dt * plan.s_base;
    }
    es.ter.push_back(ter);
    es.tes.push_back(tes);
  }
  return es;
}

bool InvariantReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.ok; });
}

json InvariantReport::to_json() const {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  return {{"ok", ok()}, {"checks", arr}, {"max_balance_residual", max_balance_residual}};
}

InvariantReport check_plan_invariants(const RestorationPlan& plan, const SuperNodeGraph& graph, double balance_tol) {
  InvariantReport rep;
  const auto L = plan.lines.size();
  const auto T = static_cast<size_t>(plan.n_periods);
  const auto C = plan.crew_visit.size();
  auto add = [&](const std::string& name, const std::string& failure) {
    rep.checks.push_back({name, failure.empty(), failure});
  };
  auto at = [](const std::string& what, const std::string& line, size_t t) {
    return what + " at line " + line + " period " + std::to_string(t + 1);
  };

  std::string f;
  for (size_t l = 0; l < L && f.empty(); ++l)
    for (size_t t = 1; t < T; ++t)
      if (plan.line_status[l][t] < plan.line_status[l][t - 1]) {
        f = at("u decreases", plan.lines[l], t);
        break;
      }
  add("u_monotone", f);

  f.clear();
  for (size_t c = 0; c < C && f.empty(); ++c)
    for (size_t t = 0; t < T && f.empty(); ++t) {
      int n = 0;
      for (size_t l = 0; l < L; ++l) n += plan.crew_visit[c][l][t];
      if (n > 1) f = "crew " + std::to_string(c + 1) + " visits " + std::to_string(n) + " lines in period " + std::to_string(t + 1);
    }
  add("one_line_per_crew", f);

  f.clear();
  for (size_t c = 0; c < C && f.empty(); ++c)
    for (size_t l = 0; l < L && f.empty(); ++l)
      for (size_t t = 0; t < T; ++t)
        if (plan.crew_work[c][l][t] > plan.crew_visit[c][l][t]) {
          f = at("work without visit", plan.lines[l], t);
          break;
        }
  add("work_implies_visit", f);

  f.clear();
  for (size_t l = 0; l < L && f.empty(); ++l)
    for (size_t t = 0; t < T; ++t) {
      int n = 0;
      for (size_t c = 0; c < C; ++c) n += plan.crew_work[c][l][t];
      if (n > 1) {
        f = at("several crews working", plan.lines[l], t);
        break;
      }
    }
  add("one_crew_per_line", f);

  f.clear();
  for (size_t c = 0; c < C && f.empty(); ++c)
    for (size_t a = 0; a < L && f.empty(); ++a)
      for (size_t b = 0; b < L && f.empty(); ++b) {
        if (a == b) continue;
        for (size_t t = 0; t < T && f.empty(); ++t) {
          if (!plan.crew_visit[c][a][t]) continue;
          for (int tau = 1; tau < plan.travel[a][b] && t + static_cast<size_t>(tau) < T; ++tau)
            if (plan.crew_visit[c][b][t + static_cast<size_t>(tau)])
              f = "crew " + std::to_string(c + 1) + " reaches " + plan.lines[b] + " from " + plan.lines[a] + " in " +
                  std::to_string(tau) + " periods";
        }
      }
  for (size_t c = 0; c < C && f.empty(); ++c)
    for (size_t l = 0; l < L && f.empty(); ++l)
      for (size_t t = 0; t + 1 < static_cast<size_t>(std::max(plan.initial_travel[l], 0)) && t < T; ++t)
        if (plan.crew_visit[c][l][t]) f = at("visit before arrival from depot", plan.lines[l], t);
  add("travel_time", f);

  f.clear();
  for (size_t l = 0; l < L && f.empty(); ++l) {
    int work = 0;
    for (size_t t = 0; t < T; ++t) {
      if (plan.line_status[l][t] == 1 && work < plan.repair_time[l]) {
        f = at("energized after " + std::to_string(work) + " work periods", plan.lines[l], t);
        break;
      }
      for (size_t c = 0; c < C; ++c) work += plan.crew_work[c][l][t];
    }
  }
  add("repair_precedence", f);

  f.clear();
  if (plan.edges.size() != graph.edges.size()) f = "plan edges differ from the graph";
  for (size_t e = 0; e < graph.edges.size() && f.empty(); ++e) {
    if (plan.edges[e] != graph.edges[e].line_id) {
      f = "plan edge " + plan.edges[e] + " differs from graph edge " + graph.edges[e].line_id;
      break;
    }
    if (!graph.edges[e].damaged) continue;
    const auto it = std::find(plan.lines.begin(), plan.lines.end(), graph.edges[e].line_id);
    if (it == plan.lines.end()) {
      f = "edge " + graph.edges[e].line_id + " has no status";
      break;
    }
    const auto l = static_cast<size_t>(it - plan.lines.begin());
    for (size_t t = 0; t < T; ++t) {
      const auto& fl = plan.flows[t][e];
      if (plan.line_status[l][t] == 0 && (fl.p != 0.0 || fl.q != 0.0)) {
        f = at("flow on open line", plan.lines[l], t);
        break;
      }
    }
  }
  add("open_line_zero_flow", f);

  f.clear();
  if (f.empty() && plan.edges.size() == graph.edges.size()) {
    for (size_t t = 0; t < T; ++t)
      for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& d = plan.dispatch[t][i];
        double pb = d.p_grid - d.p_load, qb = d.q_grid - d.q_load;
        for (int c = 0; c < kResourceClasses; ++c) {
          pb += d.p[static_cast<size_t>(c)];
          qb += d.q[static_cast<size_t>(c)];
        }
        for (size_t e = 0; e < graph.edges.size(); ++e) {
          const auto& se = graph.edges[e];
          const auto& fl = plan.flows[t][e];
          if (se.from == static_cast<int>(i)) {
            pb -= fl.p;
            qb -= fl.q;
          }
          if (se.to == static_cast<int>(i)) {
            pb += fl.p - se.r * fl.l;
            qb += fl.q - se.x * fl.l;
          }
        }
        rep.max_balance_residual = std::max({rep.max_balance_residual, std::abs(pb), std::abs(qb)});
      }
    if (rep.max_balance_residual > balance_tol)
      f = "largest residual " + std::to_string(rep.max_balance_residual) + " p.u.";
  }
  add("nodal_balance", f);

  f.clear();
  for (size_t j = 0; j < plan.mix_labels.size(); ++j) {
    int placed = 0;
    for (const auto& p : plan.mer_placement)
      if (p.label == plan.mix_labels[j]) placed += p.count;
    if (placed > plan.mix_counts[j]) {
      f = plan.mix_labels[j] + ": " + std::to_string(placed) + " placed, " + std::to_string(plan.mix_counts[j]) + " available";
      break;
    }
  }
  add("mer_conservation", f);

  f.clear();
  const EnergySeries es = extract_energy_series(plan);
  for (size_t t = 0; t < es.ter.size() && f.empty(); ++t)
    if (es.tes[t] < -balance_tol || es.tes[t] > es.ter[t] + balance_tol) f = "TES outside [0, TER] in period " + std::to_string(t + 1);
  if (f.empty() && std::abs(es.unserved() - plan.objective) > 1e-6)
    f = "sum(TER - TES) = " + std::to_string(es.unserved()) + ", objective = " + std::to_string(plan.objective);
  add("objective_identity", f);
  return rep;
}

// ---------------------------------------------------------------------------

json RestorationPlan::to_json() const {
  json j;
  j["status"] = status;
  j["objective_mwh"] = objective;
  j["bound_mwh"] = bound;
  j["gap"] = gap;
  j["node_count"] = node_count;
  j["seconds"] = seconds;
  j["s_base_mva"] = s_base;
  j["dt_hours"] = dt;
  j["n_periods"] = n_periods;
  j["nodes"] = nodes;
  j["edges"] = edges;
  j["lines"] = lines;
  j["repair_time"] = repair_time;
  j["travel"] = travel;
  j["initial_travel"] = initial_travel;
  j["mix"] = json::object();
  for (size_t k = 0; k < mix_labels.size(); ++k) j["mix"][mix_labels[k]] = mix_counts[k];
  json mp = json::array();
  for (const auto& p : mer_placement)
    mp.push_back({{"kind", p.kind}, {"size_index", p.size_index}, {"label", p.label}, {"node", p.node}, {"count", p.count}});
  j["mer_placement"] = mp;
  j["line_status"] = line_status;
  j["energized_period"] = energized_period();
  j["crew_visit"] = crew_visit;
  j["crew_work"] = crew_work;
  json disp = json::array();
  for (size_t t = 0; t < dispatch.size(); ++t) {
    json nodes_j = json::array();
    for (const auto& d : dispatch[t]) {
      json r = {{"p_demand", d.p_demand}, {"q_demand", d.q_demand}, {"p_load", d.p_load}, {"q_load", d.q_load}, {"v", d.v},
                {"p_grid", d.p_grid},     {"q_grid", d.q_grid}, {"storage_loss", d.storage_loss}};
      for (int c = 0; c < kResourceClasses; ++c) {
        r[std::string("p_") + to_string(static_cast<ResourceClass>(c))] = d.p[static_cast<size_t>(c)];
        r[std::string("q_") + to_string(static_cast<ResourceClass>(c))] = d.q[static_cast<size_t>(c)];
      }
      nodes_j.push_back(r);
    }
    json fl = json::array();
    for (const auto& e : flows[t]) fl.push_back({{"p", e.p}, {"q", e.q}, {"l", e.l}});
    disp.push_back({{"period", t + 1}, {"nodes", nodes_j}, {"flows", fl}});
  }
  j["dispatch"] = disp;
  json units_j = json::array();
  for (const auto& u : units) {
    json r = {{"label", u.label}, {"class", to_string(u.cls)}, {"node", u.node}, {"p", u.p}, {"q", u.q}};
    if (!u.loss.empty()) {
      r["loss"] = u.loss;
      r["r_e"] = u.r_e;
      r["r_ct"] = u.r_ct;
      r["e0"] = u.e0;
      r["e_cap"] = u.e_cap;
    }
    units_j.push_back(r);
  }
  j["units"] = units_j;
  j["unit_convention"] = "power p.u. on s_base_mva, energy MWh";
  return j;
}

RestorationPlan RestorationPlan::from_json(const json& j) {
  RestorationPlan p;
  try {
    p.status = j.at("status").get<std::string>();
    p.objective = j.at("objective_mwh").get<double>();
    p.bound = j.value("bound_mwh", 0.0);
    p.gap = j.value("gap", 0.0);
    p.node_count = j.value("node_count", 0L);
    p.seconds = j.value("seconds", 0.0);
    p.s_base = j.at("s_base_mva").get<double>();
    p.dt = j.at("dt_hours").get<double>();
    p.n_periods = j.at("n_periods").get<int>();
    p.nodes = j.at("nodes").get<std::vector<std::string>>();
    p.edges = j.at("edges").get<std::vector<std::string>>();
    p.lines = j.at("lines").get<std::vector<std::string>>();
    p.repair_time = j.at("repair_time").get<std::vector<int>>();
    p.travel = j.at("travel").get<std::vector<std::vector<int>>>();
    p.initial_travel = j.at("initial_travel").get<std::vector<int>>();
    for (const auto& [k, v] : j.at("mix").items()) {
      p.mix_labels.push_back(k);
      p.mix_counts.push_back(v.get<int>());
    }
    for (const auto& m : j.at("mer_placement"))
      p.mer_placement.push_back({m.at("kind").get<std::string>(), m.at("size_index").get<int>(),
                                 m.at("label").get<std::string>(), m.at("node").get<std::string>(),
                                 m.at("count").get<int>()});
    p.line_status = j.at("line_status").get<std::vector<std::vector<int>>>();
    p.crew_visit = j.at("crew_visit").get<std::vector<std::vector<std::vector<int>>>>();
    p.crew_work = j.at("crew_work").get<std::vector<std::vector<std::vector<int>>>>();
    for (const auto& per : j.at("dispatch")) {
      std::vector<NodeDispatch> row;
      for (const auto& r : per.at("nodes")) {
        NodeDispatch d;
        d.p_demand = r.at("p_demand").get<double>();
        d.q_demand = r.value("q_demand", 0.0);
        d.p_load = r.at("p_load").get<double>();
        d.q_load = r.at("q_load").get<double>();
        d.v = r.at("v").get<double>();
        d.p_grid = r.value("p_grid", 0.0);
        d.q_grid = r.value("q_grid", 0.0);
        d.storage_loss = r.value("storage_loss", 0.0);
        for (int c = 0; c < kResourceClasses; ++c) {
          d.p[static_cast<size_t>(c)] = r.value(std::string("p_") + to_string(static_cast<ResourceClass>(c)), 0.0);
          d.q[static_cast<size_t>(c)] = r.value(std::string("q_") + to_string(static_cast<ResourceClass>(c)), 0.0);
        }
        row.push_back(d);
      }
      p.dispatch.push_back(row);
      std::vector<EdgeDispatch> fl;
      for (const auto& e : per.at("flows")) fl.push_back({e.at("p").get<double>(), e.at("q").get<double>(), e.at("l").get<double>()});
      p.flows.push_back(fl);
    }
    for (const auto& r : j.value("units", json::array())) {
      UnitDispatch u;
      u.label = r.at("label").get<std::string>();
      const std::string cls = r.at("class").get<std::string>();
      bool known = false;
      for (int c = 0; c < kResourceClasses; ++c)
        if (cls == to_string(static_cast<ResourceClass>(c))) {
          u.cls = static_cast<ResourceClass>(c);
          known = true;
        }
      if (!known) throw ValidationError("plan: unknown resource class '" + cls + "'");
      u.node = r.at("node").get<int>();
      u.p = r.at("p").get<std::vector<double>>();
      u.q = r.at("q").get<std::vector<double>>();
      u.loss = r.value("loss", std::vector<double>{});
      u.r_e = r.value("r_e", 0.0);
      u.r_ct = r.value("r_ct", 0.0);
      u.e0 = r.value("e0", 0.0);
      u.e_cap = r.value("e_cap", 0.0);
      p.units.push_back(u);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
  const auto T = static_cast<size_t>(p.n_periods);
  if (p.dispatch.size() != T || p.flows.size() != T) throw DimensionError("plan: dispatch length differs from n_periods");
  if (p.line_status.size() != p.lines.size() || p.repair_time.size() != p.lines.size() ||
      p.travel.size() != p.lines.size() || p.initial_travel.size() != p.lines.size())
    throw DimensionError("plan: line arrays differ from the damaged-line count");
  for (const auto& row : p.line_status)
    if (row.size() != T) throw DimensionError("plan: line status length differs from n_periods");
  for (const auto* crews : {&p.crew_visit, &p.crew_work})
    for (const auto& c : *crews) {
      if (c.size() != p.lines.size()) throw DimensionError("plan: crew arrays differ from the damaged-line count");
      for (const auto& row : c)
        if (row.size() != T) throw DimensionError("plan: crew schedule length differs from n_periods");
    }
  if (p.crew_visit.size() != p.crew_work.size()) throw DimensionError("plan: visit and work crew counts differ");
  return p;
}

}  // namespace errplan
