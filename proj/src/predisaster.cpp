#include "errplan/predisaster.hpp"

#include "errplan/backend.hpp"
#include "errplan/errors.hpp"

#include <algorithm>
#include <cmath>

namespace errplan {

using nlohmann::json;

const char* to_string(ResourceClass c) {
  static const char* names[] = {"MDG", "MESS", "MPV", "DG", "ESS", "PV"};
  return names[static_cast<int>(c)];
}

int MerMixDecision::count(MerKind kind, int size_index) const {
  int n = 0;
  for (size_t i = 0; i < catalog.size(); ++i)
    if (catalog[i].kind == kind && catalog[i].size_index == size_index) n += counts[i];
  return n;
}

json MerMixDecision::to_json() const {
  json items = json::array();
  json summary = json::object();
  for (size_t i = 0; i < catalog.size(); ++i) {
    json it = catalog_to_json({catalog[i]})["items"][0];
    it["count"] = counts[i];
    items.push_back(it);
    if (counts[i] > 0) summary[to_string(catalog[i].kind)][catalog[i].label()] = counts[i];
  }
  return {{"items", items}, {"summary", summary}, {"total_cost", total_cost}};
}

MerMixDecision MerMixDecision::from_json(const json& j) {
  MerMixDecision m;
  try {
    m.catalog = catalog_from_json(j.at("items"));
    for (const auto& it : j.at("items")) {
      const int c = it.value("count", 0);
      if (c < 0) throw ValidationError("mix: counts must be nonnegative");
      m.counts.push_back(c);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("mix: ") + e.what());
  }
  for (size_t i = 0; i < m.catalog.size(); ++i) m.total_cost += m.counts[i] * m.catalog[i].cost;
  return m;
}

namespace {

ResourceClass class_of(MerKind k) {
  switch (k) {
    case MerKind::MESS: return ResourceClass::MES;
    case MerKind::MPV: return ResourceClass::MPV;
    default: return ResourceClass::MDG;
  }
}

ResourceClass class_of(DerKind k) {
  switch (k) {
    case DerKind::ESS: return ResourceClass::ES;
    case DerKind::PV: return ResourceClass::PV;
    default: return ResourceClass::DG;
  }
}

}  // namespace

SizingModel build_sizing_model(const ShortageForecast& forecast, const std::vector<MerSpec>& catalog,
                               const StudyHorizon& horizon) {
  const int T = horizon.n_periods;
  if (static_cast<int>(forecast.p_total.size()) != T) throw ModelError("forecast length differs from the horizon");
  if (static_cast<int>(forecast.pv_profile.size()) != T)
    throw ModelError("PV profile has " + std::to_string(forecast.pv_profile.size()) + " periods, horizon has " +
                     std::to_string(T));
  for (const auto& d : forecast.ders)
    if (d.kind == DerKind::PV && static_cast<int>(d.p_cap.size()) != T)
      throw ModelError("PV availability series length differs from the horizon");

  SizingModel m;
  m.forecast = forecast;
  m.catalog = catalog;
  ConicProgram& p = m.program;
  const double dt = horizon.dt;
  const double k1 = forecast.k1;
  const double k2 = forecast.k2;

  const double peak_crit = *std::max_element(forecast.p_critical.begin(), forecast.p_critical.end());
  for (size_t j = 0; j < catalog.size(); ++j) {
    const auto& c = catalog[j];
    const double unit = c.kind == MerKind::MESS ? c.s_size : c.p_size;
    const int ub = static_cast<int>(std::ceil(peak_crit / unit - 1e-9)) + 1;
    m.n_upper.push_back(ub);
    const int v = p.add_variable("N[" + c.label() + "]", 0, ub, Integrality::integer, BranchClass::mer);
    p.set_objective(v, c.cost);
    m.n_var.push_back(v);
  }

  m.p_vars.resize(static_cast<size_t>(T));
  m.q_vars.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    const auto ts = "[" + std::to_string(t + 1) + "]";
    const auto tt = static_cast<size_t>(t);
    m.pl_var.push_back(p.add_variable("pL" + ts, forecast.p_critical[tt], forecast.p_total[tt]));
    m.ql_var.push_back(p.add_variable("qL" + ts, forecast.q_critical[tt], forecast.q_total[tt]));
    auto& pv = m.p_vars[tt];
    auto& qv = m.q_vars[tt];

    // Mobile resources, one aggregate per kind.
    for (MerKind kind : {MerKind::MDG, MerKind::MESS, MerKind::MPV}) {
      const ResourceClass rc = class_of(kind);
      const bool any = std::any_of(catalog.begin(), catalog.end(), [&](const MerSpec& c) { return c.kind == kind; });
      if (!any) continue;
      const std::string nm = to_string(rc);
      const int vp = p.add_variable("p_" + nm + ts, 0, kInf);
      const int vq = p.add_variable("q_" + nm + ts, kind == MerKind::MESS ? -kInf : 0, kInf);
      pv[static_cast<size_t>(rc)].push_back(vp);
      qv[static_cast<size_t>(rc)].push_back(vq);
      AffineExpr cap;
      cap.add(vp, 1.0);
      AffineExpr radius;
      for (size_t j = 0; j < catalog.size(); ++j) {
        if (catalog[j].kind != kind) continue;
        if (kind == MerKind::MDG) cap.add(m.n_var[j], -catalog[j].p_size);
        if (kind == MerKind::MPV) cap.add(m.n_var[j], -catalog[j].p_size * forecast.pv_profile[tt]);
        if (kind == MerKind::MESS) radius.add(m.n_var[j], catalog[j].s_size);
      }
      if (kind == MerKind::MESS) {
        p.add_soc({AffineExpr({{vp, 1.0}}), AffineExpr({{vq, 1.0}})}, radius, "mess_mva" + ts);
      } else {
        p.add_linear(cap, Sense::le, 0.0, "cap_" + nm + ts);
        p.add_linear(AffineExpr({{vq, 1.0}, {vp, -k1}}), Sense::ge, 0.0, "k1_" + nm + ts);
        p.add_linear(AffineExpr({{vq, 1.0}, {vp, -k2}}), Sense::le, 0.0, "k2_" + nm + ts);
      }
    }
    // Surviving DERs, one set of variables per unit.
    for (size_t d = 0; d < forecast.ders.size(); ++d) {
      const DerUnit& u = forecast.ders[d];
      const ResourceClass rc = class_of(u.kind);
      const std::string nm = std::string(to_string(rc)) + std::to_string(d);
      if (u.kind == DerKind::ESS) {
        const int vp = p.add_variable("p_" + nm + ts, 0, kInf);
        const int vq = p.add_variable("q_" + nm + ts, -kInf, kInf);
        p.add_soc({AffineExpr({{vp, 1.0}}), AffineExpr({{vq, 1.0}})}, AffineExpr({}, u.s_cap), "ess_mva_" + nm + ts);
        pv[static_cast<size_t>(rc)].push_back(vp);
        qv[static_cast<size_t>(rc)].push_back(vq);
      } else {
        const int vp = p.add_variable("p_" + nm + ts, 0, u.p_max(t));
        const int vq = p.add_variable("q_" + nm + ts, 0, kInf);
        p.add_linear(AffineExpr({{vq, 1.0}, {vp, -k1}}), Sense::ge, 0.0, "k1_" + nm + ts);
        p.add_linear(AffineExpr({{vq, 1.0}, {vp, -k2}}), Sense::le, 0.0, "k2_" + nm + ts);
        pv[static_cast<size_t>(rc)].push_back(vp);
        qv[static_cast<size_t>(rc)].push_back(vq);
      }
    }
    AffineExpr pb, qb;
    for (int c = 0; c < kResourceClasses; ++c) {
      for (int v : pv[static_cast<size_t>(c)]) pb.add(v, 1.0);
      for (int v : qv[static_cast<size_t>(c)]) qb.add(v, 1.0);
    }
    pb.add(m.pl_var.back(), -1.0);
    qb.add(m.ql_var.back(), -1.0);
    p.add_linear(pb, Sense::eq, 0.0, "p_balance" + ts);
    p.add_linear(qb, Sense::eq, 0.0, "q_balance" + ts);
  }

  // Remaining energy stays within [0, E]: storage starts full and only
  // discharges, so only the lower side binds.
  const auto mes = static_cast<size_t>(ResourceClass::MES);
  const auto es = static_cast<size_t>(ResourceClass::ES);
  for (int t = 0; t < T; ++t) {
    const auto ts = "[" + std::to_string(t + 1) + "]";
    if (!m.p_vars[0][mes].empty()) {
      AffineExpr e;
      for (int s = 0; s <= t; ++s) e.add(m.p_vars[static_cast<size_t>(s)][mes][0], dt);
      for (size_t j = 0; j < catalog.size(); ++j)
        if (catalog[j].kind == MerKind::MESS) e.add(m.n_var[j], -catalog[j].e_size);
      p.add_linear(e, Sense::le, 0.0, "mess_soc" + ts);
    }
    int unit = 0;
    for (size_t d = 0; d < forecast.ders.size(); ++d) {
      if (forecast.ders[d].kind != DerKind::ESS) continue;
      AffineExpr e;
      for (int s = 0; s <= t; ++s) e.add(m.p_vars[static_cast<size_t>(s)][es][static_cast<size_t>(unit)], dt);
      p.add_linear(e, Sense::le, forecast.ders[d].e_surplus, "ess_soc" + std::to_string(d) + ts);
      ++unit;
    }
  }
  p.validate();
  return m;
}

namespace {

SizingSolution extract(const SizingModel& m, const Eigen::VectorXd& x) {
  SizingSolution s;
  s.mix.catalog = m.catalog;
  for (size_t j = 0; j < m.catalog.size(); ++j) {
    const int c = static_cast<int>(std::lround(x(m.n_var[j])));
    s.mix.counts.push_back(c);
    s.mix.total_cost += c * m.catalog[j].cost;
  }
  for (size_t t = 0; t < m.pl_var.size(); ++t) {
    SizingPeriod per;
    per.p_load = x(m.pl_var[t]);
    per.q_load = x(m.ql_var[t]);
    for (int c = 0; c < kResourceClasses; ++c) {
      for (int v : m.p_vars[t][static_cast<size_t>(c)]) per.p[static_cast<size_t>(c)] += x(v);
      for (int v : m.q_vars[t][static_cast<size_t>(c)]) per.q[static_cast<size_t>(c)] += x(v);
    }
    s.dispatch.push_back(per);
  }
  return s;
}

}  // namespace

SizingSolution solve_sizing(const SizingModel& model, const SizingConfig& config) {
  const MipSolution r = solve_michp(model.program, config.bnb);
  if (r.status == MipStatus::infeasible) throw Infeasible("shortage cannot be covered by the catalog and DERs");
  if (r.status == MipStatus::unbounded) throw SolverFailure("sizing relaxation is unbounded");
  if (r.status == MipStatus::limit) throw SolverFailure("sizing search hit its limits without a feasible mix");
  SizingSolution s = extract(model, r.x);
  s.node_count = r.node_count;
  s.gap = r.gap;
  s.x = r.x;
  return s;
}

std::optional<SizingSolution> dispatch_for_mix(const SizingModel& model, const std::vector<int>& counts) {
  std::vector<double> lo, up;
  for (const auto& v : model.program.variables()) {
    lo.push_back(v.lower);
    up.push_back(v.upper);
  }
  for (size_t j = 0; j < model.n_var.size(); ++j) {
    lo[static_cast<size_t>(model.n_var[j])] = counts[j];
    up[static_cast<size_t>(model.n_var[j])] = counts[j];
  }
  IpmBackend be;
  const RelaxResult r = be.solve(model.program, lo, up);
  if (r.status != RelaxStatus::optimal) return std::nullopt;
  SizingSolution s = extract(model, r.x);
  s.x = r.x;
  return s;
}

double sizing_residual(const SizingModel& model, const SizingSolution& sol) {
  return model.program.max_violation(sol.x);
}

json sizing_to_json(const SizingModel& model, const SizingSolution& sol) {
  const double s = model.forecast.s_base;
  json disp = json::array();
  for (size_t t = 0; t < sol.dispatch.size(); ++t) {
    const auto& d = sol.dispatch[t];
    json row = {{"period", t + 1}, {"p_load_mw", d.p_load * s}, {"q_load_mvar", d.q_load * s}};
    for (int c = 0; c < kResourceClasses; ++c) {
      row[std::string("p_") + to_string(static_cast<ResourceClass>(c)) + "_mw"] = d.p[static_cast<size_t>(c)] * s;
      row[std::string("q_") + to_string(static_cast<ResourceClass>(c)) + "_mvar"] = d.q[static_cast<size_t>(c)] * s;
    }
    disp.push_back(row);
  }
  return {{"mix", sol.mix.to_json()},
          {"dispatch", disp},
          {"parameters",
           {{"critical_fraction", model.forecast.critical_fraction},
            {"q_ratio", model.forecast.q_ratio},
            {"pv_profile", model.forecast.pv_profile},
            {"k1", model.forecast.k1},
            {"k2", model.forecast.k2},
            {"integer_upper_bounds", model.n_upper}}},
          {"node_count", sol.node_count},
          {"gap", sol.gap}};
}

}  // namespace errplan
