#include "errplan/netmodel.hpp"

#include "errplan/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace errplan {

using nlohmann::json;

const char* to_string(DerKind k) {
  switch (k) {
    case DerKind::ESS: return "ESS";
    case DerKind::PV: return "PV";
    default: return "DG";
  }
}

DerKind der_kind_from(const std::string& s) {
  if (s == "DG") return DerKind::DG;
  if (s == "ESS") return DerKind::ESS;
  if (s == "PV") return DerKind::PV;
  throw ValidationError("unknown DER kind '" + s + "'");
}

const char* to_string(MerKind k) {
  switch (k) {
    case MerKind::MESS: return "MESS";
    case MerKind::MPV: return "MPV";
    default: return "MDG";
  }
}

MerKind mer_kind_from(const std::string& s) {
  if (s == "MDG") return MerKind::MDG;
  if (s == "MESS") return MerKind::MESS;
  if (s == "MPV") return MerKind::MPV;
  throw ValidationError("unknown MER kind '" + s + "'");
}

std::string MerSpec::label() const {
  std::ostringstream os;
  os << to_string(kind) << "_";
  if (kind == MerKind::MESS)
    os << e_size << "MWh_" << s_size << "MVA";
  else
    os << p_size << "MW";
  return os.str();
}

bool bus_id_less(const std::string& a, const std::string& b) {
  long long ia = 0, ib = 0;
  const auto ra = std::from_chars(a.data(), a.data() + a.size(), ia);
  const auto rb = std::from_chars(b.data(), b.data() + b.size(), ib);
  const bool na = ra.ec == std::errc() && ra.ptr == a.data() + a.size();
  const bool nb = rb.ec == std::errc() && rb.ptr == b.data() + b.size();
  if (na && nb) return ia < ib;
  if (na != nb) return na;  // numeric ids sort first
  return a < b;
}

namespace {

std::string id_of(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ParseError("identifier must be a string or integer, got " + j.dump());
}

std::vector<double> series(const json& j, double scale) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>() / scale);
    return out;
  }
  for (const auto& v : j) out.push_back(v.get<double>() / scale);
  return out;
}

json scaled(const std::vector<double>& v, double scale) {
  json a = json::array();
  for (double x : v) a.push_back(x * scale);
  return a;
}

DerUnit der_from_json(const json& d, double s, int n_periods) {
  DerUnit u;
  u.bus = id_of(d.at("bus"));
  u.kind = der_kind_from(d.at("kind").get<std::string>());
  if (d.contains("p_cap")) u.p_cap = series(d.at("p_cap"), s);
  if (u.kind == DerKind::PV && d.contains("profile")) {
    const double cap = u.p_cap.empty() ? 0.0 : u.p_cap[0];
    u.p_cap.clear();
    for (const auto& f : d.at("profile")) u.p_cap.push_back(cap * f.get<double>());
  }
  if (u.kind == DerKind::PV && u.p_cap.size() == 1 && n_periods > 1) u.p_cap.assign(static_cast<size_t>(n_periods), u.p_cap[0]);
  u.k1 = d.value("k1", 0.2);
  u.k2 = d.value("k2", 0.6);
  u.e_cap = d.value("e_cap", 0.0) / s;
  u.s_cap = d.value("s_cap", 0.0) / s;
  u.e_surplus = d.contains("e_surplus") ? d.at("e_surplus").get<double>() / s : u.e_cap;
  if (d.contains("r_e")) u.r_e = d.at("r_e").get<double>();
  if (d.contains("r_ct")) u.r_ct = d.at("r_ct").get<double>();
  if (u.kind == DerKind::ESS && u.p_cap.empty()) u.p_cap.push_back(u.s_cap);
  return u;
}

json der_to_json(const DerUnit& u, double s) {
  json d = {{"bus", u.bus}, {"kind", to_string(u.kind)}, {"k1", u.k1}, {"k2", u.k2}};
  if (u.kind == DerKind::PV)
    d["p_cap"] = scaled(u.p_cap, s);
  else if (u.kind == DerKind::DG)
    d["p_cap"] = u.p_cap.empty() ? 0.0 : u.p_cap[0] * s;
  if (u.kind == DerKind::ESS) {
    d["e_cap"] = u.e_cap * s;
    d["s_cap"] = u.s_cap * s;
    d["e_surplus"] = u.e_surplus * s;
  }
  if (u.r_e) d["r_e"] = *u.r_e;
  if (u.r_ct) d["r_ct"] = *u.r_ct;
  return d;
}

void validate_der(const DerUnit& u, const std::string& where, int n_periods) {
  if (u.k1 < 0 || u.k1 > u.k2 || u.k2 > 1)
    throw ValidationError(where + ": reactive policy requires 0 <= k1 <= k2 <= 1");
  for (double p : u.p_cap)
    if (p < 0) throw ValidationError(where + ": p_cap must be nonnegative");
  if (u.kind == DerKind::PV && static_cast<int>(u.p_cap.size()) != n_periods)
    throw ValidationError(where + ": PV availability series length differs from the horizon");
  if (u.kind != DerKind::PV && u.p_cap.size() != 1) throw ValidationError(where + ": p_cap must be a scalar");
  if (u.kind == DerKind::ESS) {
    if (u.e_cap < 0 || u.s_cap < 0) throw ValidationError(where + ": storage capacities must be nonnegative");
    if (u.e_surplus < 0 || u.e_surplus > u.e_cap + 1e-12)
      throw ValidationError(where + ": e_surplus must lie in [0, e_cap]");
    if (u.r_e && u.r_ct && *u.r_ct > *u.r_e) throw ValidationError(where + ": r_ct must not exceed r_e");
    if ((u.r_e && *u.r_e < 0) || (u.r_ct && *u.r_ct < 0))
      throw ValidationError(where + ": resistances must be nonnegative");
  }
}

}  // namespace

// ---------------------------------------------------------------- feeder ----

int FeederModel::bus_index(const std::string& id) const {
  for (size_t i = 0; i < buses.size(); ++i)
    if (buses[i].id == id) return static_cast<int>(i);
  return -1;
}

int FeederModel::line_index(const std::string& id) const {
  for (size_t i = 0; i < lines.size(); ++i)
    if (lines[i].id == id) return static_cast<int>(i);
  return -1;
}

double FeederModel::total_p(int t) const {
  double s = 0;
  for (const auto& l : loads) s += l.p_total.at(static_cast<size_t>(t));
  return s;
}

FeederModel FeederModel::from_json(const json& j) {
  FeederModel f;
  try {
    f.name = j.value("name", "");
    f.bases.s_mva = j.at("bases").at("s_mva").get<double>();
    f.bases.v_kv = j.at("bases").at("v_kv").get<double>();
    if (!(f.bases.s_mva > 0) || !(f.bases.v_kv > 0)) throw ValidationError("bases: s_mva and v_kv must be positive");
    f.horizon.n_periods = j.at("horizon").at("n_periods").get<int>();
    f.horizon.dt = j.at("horizon").at("dt_hours").get<double>();
    const double s = f.bases.s_mva;
    for (const auto& b : j.at("buses")) f.buses.push_back({id_of(b.at("id")), b.value("vmin", 0.95), b.value("vmax", 1.05)});
    for (const auto& l : j.at("lines"))
      f.lines.push_back({id_of(l.at("id")), id_of(l.at("from")), id_of(l.at("to")), l.at("r").get<double>(),
                         l.at("x").get<double>(), l.at("i2max").get<double>(), l.at("smax").get<double>()});
    for (const auto& l : j.value("loads", json::array())) {
      LoadProfile lp;
      lp.bus = id_of(l.at("bus"));
      lp.p_total = series(l.at("p_total"), s);
      lp.p_critical = series(l.at("p_crit"), s);
      lp.q_total = series(l.at("q_total"), s);
      lp.q_critical = series(l.at("q_crit"), s);
      f.loads.push_back(std::move(lp));
    }
    for (const auto& d : j.value("ders", json::array())) f.ders.push_back(der_from_json(d, s, f.horizon.n_periods));
  } catch (const json::exception& e) {
    throw ParseError(std::string("feeder: ") + e.what());
  }
  f.validate();
  return f;
}

json FeederModel::to_json() const {
  const double s = bases.s_mva;
  json j;
  if (!name.empty()) j["name"] = name;
  j["bases"] = {{"s_mva", bases.s_mva}, {"v_kv", bases.v_kv}};
  j["horizon"] = {{"n_periods", horizon.n_periods}, {"dt_hours", horizon.dt}};
  j["buses"] = json::array();
  for (const auto& b : buses) j["buses"].push_back({{"id", b.id}, {"vmin", b.vmin}, {"vmax", b.vmax}});
  j["lines"] = json::array();
  for (const auto& l : lines)
    j["lines"].push_back({{"id", l.id}, {"from", l.from_bus}, {"to", l.to_bus}, {"r", l.r}, {"x", l.x},
                          {"i2max", l.i2max}, {"smax", l.smax}});
  j["loads"] = json::array();
  for (const auto& l : loads)
    j["loads"].push_back({{"bus", l.bus}, {"p_total", scaled(l.p_total, s)}, {"p_crit", scaled(l.p_critical, s)},
                          {"q_total", scaled(l.q_total, s)}, {"q_crit", scaled(l.q_critical, s)}});
  j["ders"] = json::array();
  for (const auto& d : ders) j["ders"].push_back(der_to_json(d, s));
  return j;
}

void FeederModel::validate() const {
  if (horizon.n_periods < 1) throw ValidationError("horizon: n_periods must be at least 1");
  if (!(horizon.dt > 0)) throw ValidationError("horizon: dt_hours must be positive");
  std::set<std::string> seen;
  for (const auto& b : buses) {
    if (!seen.insert(b.id).second) throw ValidationError("bus " + b.id + ": duplicate id");
    if (!(b.vmin > 0 && b.vmin < b.vmax)) throw ValidationError("bus " + b.id + ": requires 0 < vmin < vmax");
  }
  std::set<std::string> line_ids;
  for (const auto& l : lines) {
    const std::string w = "line " + l.id;
    if (!line_ids.insert(l.id).second) throw ValidationError(w + ": duplicate id");
    if (l.from_bus == l.to_bus) throw ValidationError(w + ": from_bus equals to_bus");
    if (!seen.count(l.from_bus) || !seen.count(l.to_bus)) throw ValidationError(w + ": references an unknown bus");
    if (l.r < 0 || l.x < 0 || (l.r == 0 && l.x == 0)) throw ValidationError(w + ": requires r, x >= 0, not both zero");
    if (!(l.i2max > 0)) throw ValidationError(w + ": i2max must be positive");
    if (!(l.smax > 0)) throw ValidationError(w + ": smax must be positive");
  }
  const auto n = static_cast<size_t>(horizon.n_periods);
  for (const auto& l : loads) {
    const std::string w = "load at bus " + l.bus;
    if (!seen.count(l.bus)) throw ValidationError(w + ": unknown bus");
    if (l.p_total.size() != n || l.p_critical.size() != n || l.q_total.size() != n || l.q_critical.size() != n)
      throw ValidationError(w + ": series length differs from the horizon");
    for (size_t t = 0; t < n; ++t) {
      if (l.p_critical[t] < 0 || l.p_critical[t] > l.p_total[t] + 1e-12)
        throw ValidationError(w + ": requires 0 <= p_crit <= p_total at period " + std::to_string(t + 1));
      if (l.q_critical[t] < 0 || l.q_critical[t] > l.q_total[t] + 1e-12)
        throw ValidationError(w + ": requires 0 <= q_crit <= q_total at period " + std::to_string(t + 1));
    }
  }
  for (size_t i = 0; i < ders.size(); ++i) {
    const std::string w = "der " + std::to_string(i) + " (" + to_string(ders[i].kind) + " at bus " + ders[i].bus + ")";
    if (!seen.count(ders[i].bus)) throw ValidationError(w + ": unknown bus");
    validate_der(ders[i], w, horizon.n_periods);
  }
}

// -------------------------------------------------------------- scenario ----

int DamageScenario::damaged_index(const std::string& line) const {
  for (size_t i = 0; i < damaged.size(); ++i)
    if (damaged[i] == line) return static_cast<int>(i);
  return -1;
}

DamageScenario DamageScenario::from_json(const json& j, const FeederModel& feeder) {
  DamageScenario sc;
  const double dt = feeder.horizon.dt;
  auto to_periods = [dt](double hours) { return static_cast<int>(std::ceil(hours / dt - 1e-9)); };
  try {
    sc.name = j.value("name", "");
    for (const auto& d : j.value("damaged", json::array())) sc.damaged.push_back(id_of(d));
    for (const auto& id : sc.damaged)
      if (feeder.line_index(id) < 0) throw UnknownLine("damaged line '" + id + "' is not in the feeder");
    const size_t n = sc.damaged.size();
    sc.repair_time.assign(n, 0);
    for (size_t k = 0; k < n; ++k) {
      const std::string& id = sc.damaged[k];
      if (j.contains("repair_time") && j["repair_time"].contains(id))
        sc.repair_time[k] = j["repair_time"][id].get<int>();
      else if (j.contains("repair_time_hours") && j["repair_time_hours"].contains(id))
        sc.repair_time[k] = to_periods(j["repair_time_hours"][id].get<double>());
      else
        throw MissingParameter("repair time missing for damaged line '" + id + "'");
    }
    const bool hours = !j.contains("travel") && j.contains("travel_hours");
    json travel = hours ? j["travel_hours"] : j.value("travel", json::array());
    if (travel.is_object()) {
      // {"seed": s, "max_periods": m} -> generated, seed recorded
      sc.travel_seed = travel.at("seed").get<std::uint64_t>();
      travel = n == 0 ? json::array() : json(gen_travel_matrix(static_cast<int>(n), *sc.travel_seed,
                                                                  travel.at("max_periods").get<int>()));
    }
    if (travel.size() != n) throw DimensionError("travel matrix has " + std::to_string(travel.size()) +
                                                 " rows, expected " + std::to_string(n));
    for (const auto& row : travel) {
      if (row.size() != n) throw DimensionError("travel matrix row has " + std::to_string(row.size()) +
                                                " entries, expected " + std::to_string(n));
      std::vector<int> r;
      for (const auto& v : row) r.push_back(hours ? to_periods(v.get<double>()) : v.get<int>());
      sc.travel.push_back(std::move(r));
    }
    sc.initial_travel.assign(n, 0);
    if (j.contains("initial_travel"))
      for (size_t k = 0; k < n; ++k)
        if (j["initial_travel"].contains(sc.damaged[k])) sc.initial_travel[k] = j["initial_travel"][sc.damaged[k]].get<int>();
    sc.n_crews = j.value("n_crews", 1);
    if (j.contains("travel_seed")) sc.travel_seed = j["travel_seed"].get<std::uint64_t>();
    if (j.contains("grid"))
      for (const auto& [bus, g] : j["grid"].items()) {
        GridSupply gs;
        gs.p = series(g.at("p"), feeder.bases.s_mva);
        gs.q = series(g.at("q"), feeder.bases.s_mva);
        sc.grid[bus] = std::move(gs);
      }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  sc.validate(feeder);
  return sc;
}

json DamageScenario::to_json(const FeederModel& feeder) const {
  json j;
  if (!name.empty()) j["name"] = name;
  j["damaged"] = damaged;
  j["repair_time"] = json::object();
  for (size_t k = 0; k < damaged.size(); ++k) j["repair_time"][damaged[k]] = repair_time[k];
  j["travel"] = travel;
  j["initial_travel"] = json::object();
  for (size_t k = 0; k < damaged.size(); ++k) j["initial_travel"][damaged[k]] = initial_travel[k];
  j["n_crews"] = n_crews;
  if (travel_seed) j["travel_seed"] = *travel_seed;
  if (!grid.empty()) {
    j["grid"] = json::object();
    for (const auto& [bus, g] : grid)
      j["grid"][bus] = {{"p", scaled(g.p, feeder.bases.s_mva)}, {"q", scaled(g.q, feeder.bases.s_mva)}};
  }
  return j;
}

void DamageScenario::validate(const FeederModel& feeder) const {
  const size_t n = damaged.size();
  std::set<std::string> seen;
  for (const auto& id : damaged) {
    if (feeder.line_index(id) < 0) throw UnknownLine("damaged line '" + id + "' is not in the feeder");
    if (!seen.insert(id).second) throw ValidationError("damaged line '" + id + "' listed twice");
  }
  if (repair_time.size() != n) throw DimensionError("repair_time size differs from the damaged-line count");
  for (size_t k = 0; k < n; ++k)
    if (repair_time[k] <= 0) throw ValidationError("line " + damaged[k] + ": repair_time must be positive");
  if (travel.size() != n) throw DimensionError("travel matrix size differs from the damaged-line count");
  for (size_t a = 0; a < n; ++a) {
    if (travel[a].size() != n) throw DimensionError("travel matrix is not square");
    for (size_t b = 0; b < n; ++b) {
      if (travel[a][b] < 0) throw ValidationError("travel time must be nonnegative");
      if (a == b && travel[a][b] != 0) throw ValidationError("travel matrix diagonal must be zero");
    }
  }
  if (initial_travel.size() != n) throw DimensionError("initial_travel size differs from the damaged-line count");
  for (int v : initial_travel)
    if (v < 0) throw ValidationError("initial travel time must be nonnegative");
  if (n_crews < 0) throw ValidationError("n_crews must be nonnegative");
  const auto np = static_cast<size_t>(feeder.horizon.n_periods);
  for (const auto& [bus, g] : grid) {
    if (feeder.bus_index(bus) < 0) throw ValidationError("grid supply at unknown bus '" + bus + "'");
    if (g.p.size() != np || g.q.size() != np) throw DimensionError("grid supply at bus " + bus + ": wrong series length");
  }
}

// -------------------------------------------------------------- forecast ----

std::vector<double> half_sine_profile(int n, double dt, double start_hour, double sunrise, double sunset) {
  // Closed-form average of sin(pi (h - sunrise)/(sunset - sunrise)) over each
  // daylight sub-interval of a period; zero at night.
  std::vector<double> out;
  const double len = sunset - sunrise;
  for (int t = 0; t < n; ++t) {
    const double a = start_hour + dt * t;
    const double b = a + dt;
    double acc = 0.0;
    // Walk day by day across [a, b].
    for (double day = std::floor(a / 24.0) * 24.0; day < b; day += 24.0) {
      const double lo = std::max(a, day + sunrise);
      const double hi = std::min(b, day + sunset);
      if (hi <= lo) continue;
      const double k = M_PI / len;
      acc += (std::cos(k * (lo - day - sunrise)) - std::cos(k * (hi - day - sunrise))) / k;
    }
    out.push_back(acc / dt);
  }
  return out;
}

ShortageForecast ShortageForecast::from_json(const json& j) {
  ShortageForecast f;
  try {
    f.name = j.value("name", "");
    f.horizon.n_periods = j.at("horizon").at("n_periods").get<int>();
    f.horizon.dt = j.at("horizon").at("dt_hours").get<double>();
    f.s_base = j.value("s_mva", 1.0);
    const double s = f.s_base;
    f.critical_fraction = j.value("critical_fraction", 0.6);
    f.k1 = j.value("k1", 0.2);
    f.k2 = j.value("k2", 0.6);
    f.p_total = series(j.at("p_total"), s);
    if (j.contains("p_crit")) {
      f.p_critical = series(j["p_crit"], s);
    } else {
      for (double p : f.p_total) f.p_critical.push_back(f.critical_fraction * p);
    }
    f.q_ratio = j.value("q_ratio", 0.0);
    if (j.contains("q_total")) {
      f.q_total = series(j["q_total"], s);
    } else {
      for (double p : f.p_total) f.q_total.push_back(f.q_ratio * p);
    }
    if (j.contains("q_crit")) {
      f.q_critical = series(j["q_crit"], s);
    } else {
      const double qf = j.value("q_critical_fraction", f.critical_fraction);
      for (double q : f.q_total) f.q_critical.push_back(qf * q);
    }
    if (j.contains("pv_profile")) {
      for (const auto& v : j["pv_profile"]) f.pv_profile.push_back(v.get<double>());
    } else {
      const auto& ps = j.value("pv_sun", json::object());
      f.pv_profile = half_sine_profile(f.horizon.n_periods, f.horizon.dt, ps.value("start_hour", 8.0),
                                       ps.value("sunrise", 6.0), ps.value("sunset", 18.0));
    }
    for (const auto& d : j.value("ders", json::array())) {
      json dd = d;
      if (dd.value("kind", "") == "PV" && !dd.contains("profile") && dd.contains("p_cap") && dd["p_cap"].is_number())
        dd["profile"] = f.pv_profile;
      if (!dd.contains("k1")) dd["k1"] = f.k1;
      if (!dd.contains("k2")) dd["k2"] = f.k2;
      if (!dd.contains("bus")) dd["bus"] = "forecast";
      f.ders.push_back(der_from_json(dd, s, f.horizon.n_periods));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("forecast: ") + e.what());
  }
  f.validate();
  return f;
}

json ShortageForecast::to_json() const {
  json j;
  if (!name.empty()) j["name"] = name;
  j["horizon"] = {{"n_periods", horizon.n_periods}, {"dt_hours", horizon.dt}};
  j["s_mva"] = s_base;
  j["p_total"] = scaled(p_total, s_base);
  j["p_crit"] = scaled(p_critical, s_base);
  j["q_total"] = scaled(q_total, s_base);
  j["q_crit"] = scaled(q_critical, s_base);
  j["critical_fraction"] = critical_fraction;
  j["q_ratio"] = q_ratio;
  j["pv_profile"] = pv_profile;
  j["k1"] = k1;
  j["k2"] = k2;
  j["ders"] = json::array();
  for (const auto& d : ders) j["ders"].push_back(der_to_json(d, s_base));
  return j;
}

void ShortageForecast::validate() const {
  const auto n = static_cast<size_t>(horizon.n_periods);
  if (horizon.n_periods < 1 || !(horizon.dt > 0)) throw ValidationError("forecast: invalid horizon");
  if (p_total.size() != n || p_critical.size() != n || q_total.size() != n || q_critical.size() != n)
    throw ValidationError("forecast: shortage series length differs from the horizon");
  for (size_t t = 0; t < n; ++t) {
    if (p_critical[t] < 0 || p_critical[t] > p_total[t] + 1e-12)
      throw ValidationError("forecast: requires 0 <= p_crit <= p_total at period " + std::to_string(t + 1));
    if (q_critical[t] < 0 || q_critical[t] > q_total[t] + 1e-12)
      throw ValidationError("forecast: requires 0 <= q_crit <= q_total at period " + std::to_string(t + 1));
  }
  if (k1 < 0 || k1 > k2 || k2 > 1) throw ValidationError("forecast: requires 0 <= k1 <= k2 <= 1");
  for (size_t i = 0; i < ders.size(); ++i)
    validate_der(ders[i], "forecast der " + std::to_string(i), horizon.n_periods);
}

// --------------------------------------------------------------- catalog ----

std::vector<MerSpec> catalog_from_json(const json& j) {
  std::vector<MerSpec> out;
  try {
    const json& items = j.is_object() ? j.at("items") : j;
    for (const auto& it : items) {
      MerSpec m;
      m.kind = mer_kind_from(it.at("kind").get<std::string>());
      m.size_index = it.value("size_index", 0);
      m.p_size = it.value("p_size", 0.0);
      m.e_size = it.value("e_size", 0.0);
      m.s_size = it.value("s_size", 0.0);
      m.cost = it.at("cost").get<double>();
      m.k1 = it.value("k1", 0.2);
      m.k2 = it.value("k2", 0.6);
      m.r_e = it.value("r_e", 0.05);
      m.r_ct = it.value("r_ct", 0.02);
      const std::string w = "catalog item " + m.label();
      if (!(m.cost > 0)) throw ValidationError(w + ": cost must be positive");
      if (m.kind == MerKind::MESS) {
        if (!(m.e_size > 0 && m.s_size > 0) || m.p_size != 0)
          throw ValidationError(w + ": MESS needs e_size and s_size and no p_size");
        if (m.r_ct > m.r_e || m.r_ct < 0) throw ValidationError(w + ": requires 0 <= r_ct <= r_e");
      } else if (!(m.p_size > 0) || m.e_size != 0 || m.s_size != 0) {
        throw ValidationError(w + ": MDG/MPV need p_size only");
      }
      if (m.k1 < 0 || m.k1 > m.k2 || m.k2 > 1) throw ValidationError(w + ": requires 0 <= k1 <= k2 <= 1");
      out.push_back(m);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("catalog: ") + e.what());
  }
  return out;
}

json catalog_to_json(const std::vector<MerSpec>& catalog) {
  json items = json::array();
  for (const auto& m : catalog) {
    json it = {{"kind", to_string(m.kind)}, {"size_index", m.size_index}, {"cost", m.cost}, {"k1", m.k1}, {"k2", m.k2}};
    if (m.kind == MerKind::MESS) {
      it["e_size"] = m.e_size;
      it["s_size"] = m.s_size;
      it["r_e"] = m.r_e;
      it["r_ct"] = m.r_ct;
    } else {
      it["p_size"] = m.p_size;
    }
    items.push_back(it);
  }
  return {{"items", items}};
}

// ------------------------------------------------------------------ files ----

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

FeederModel load_feeder(const std::string& path) { return FeederModel::from_json(read_json_file(path)); }

DamageScenario load_scenario(const std::string& path, const FeederModel& feeder) {
  return DamageScenario::from_json(read_json_file(path), feeder);
}

ShortageForecast load_forecast(const std::string& path) { return ShortageForecast::from_json(read_json_file(path)); }

std::vector<MerSpec> load_catalog(const std::string& path) { return catalog_from_json(read_json_file(path)); }

std::vector<std::vector<int>> gen_travel_matrix(int n, std::uint64_t seed, int max_periods) {
  if (n < 1 || max_periods < 1) throw ValidationError("gen_travel_matrix: requires n >= 1 and max_periods >= 1");
  // mt19937_64 output is fixed by the standard; the modulo map keeps the
  // result independent of library-specific distributions.
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> m(static_cast<size_t>(n), std::vector<int>(static_cast<size_t>(n), 0));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const int v = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_periods));
      m[static_cast<size_t>(a)][static_cast<size_t>(b)] = v;
      m[static_cast<size_t>(b)][static_cast<size_t>(a)] = v;
    }
  return m;
}

}  // namespace errplan
