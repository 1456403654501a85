#pragma once

// Feeder, damage scenario, forecast and catalog data with validated JSON
// ingestion. Power and energy are stored in per-unit on the feeder's MVA base
// (MW, MVAr and MWh are divided by s_mva on the way in).

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace errplan {

struct Bus {
  std::string id;
  double vmin = 0.95;
  double vmax = 1.05;
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double r = 0.0;
  double x = 0.0;
  double i2max = 0.0;
  double smax = 0.0;
};

struct LoadProfile {
  std::string bus;
  std::vector<double> p_total, p_critical, q_total, q_critical;
};

enum class DerKind { DG, ESS, PV };

const char* to_string(DerKind k);
DerKind der_kind_from(const std::string& s);

struct DerUnit {
  std::string bus;
  DerKind kind = DerKind::DG;
  std::vector<double> p_cap;  // one entry for DG, per-period availability for PV
  double k1 = 0.2;
  double k2 = 0.6;
  double e_cap = 0.0;
  double s_cap = 0.0;
  double e_surplus = 0.0;
  std::optional<double> r_e;
  std::optional<double> r_ct;

  double p_max(int t) const { return p_cap.size() == 1 ? p_cap[0] : p_cap.at(static_cast<size_t>(t)); }
};

enum class MerKind { MDG, MESS, MPV };

const char* to_string(MerKind k);
MerKind mer_kind_from(const std::string& s);

struct MerSpec {
  MerKind kind = MerKind::MDG;
  int size_index = 0;
  double p_size = 0.0;  // MDG, MPV
  double e_size = 0.0;  // MESS
  double s_size = 0.0;  // MESS
  double cost = 0.0;
  double k1 = 0.2;
  double k2 = 0.6;
  double r_e = 0.05;   // MESS internal resistance
  double r_ct = 0.02;  // MESS converter resistance

  std::string label() const;
};

struct StudyHorizon {
  int n_periods = 1;
  double dt = 1.0;  // hours
};

struct Bases {
  double s_mva = 1.0;
  double v_kv = 1.0;
};

struct FeederModel {
  std::string name;
  Bases bases;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<LoadProfile> loads;
  std::vector<DerUnit> ders;
  StudyHorizon horizon;

  int bus_index(const std::string& id) const;   // -1 when absent
  int line_index(const std::string& id) const;  // -1 when absent
  double total_p(int t) const;

  nlohmann::json to_json() const;
  static FeederModel from_json(const nlohmann::json& j);
  void validate() const;
};

struct GridSupply {
  std::vector<double> p, q;
};

struct DamageScenario {
  std::string name;
  std::vector<std::string> damaged;
  std::vector<int> repair_time;                // periods, aligned with damaged
  std::vector<std::vector<int>> travel;        // periods, damaged x damaged
  std::vector<int> initial_travel;             // periods from depot, aligned with damaged
  int n_crews = 1;
  std::map<std::string, GridSupply> grid;      // per bus, p.u.
  std::optional<std::uint64_t> travel_seed;    // recorded when travel was generated

  int damaged_index(const std::string& line) const;  // -1 when absent
  nlohmann::json to_json(const FeederModel& feeder) const;
  static DamageScenario from_json(const nlohmann::json& j, const FeederModel& feeder);
  void validate(const FeederModel& feeder) const;
};

struct ShortageForecast {
  std::string name;
  StudyHorizon horizon;
  double s_base = 1.0;
  std::vector<double> p_total, p_critical, q_total, q_critical;  // p.u.
  std::vector<DerUnit> ders;
  // Parameters that were defaulted or supplied, recorded for output metadata.
  double critical_fraction = 0.6;
  double q_ratio = 0.0;
  std::vector<double> pv_profile;
  double k1 = 0.2;
  double k2 = 0.6;

  nlohmann::json to_json() const;
  static ShortageForecast from_json(const nlohmann::json& j);
  void validate() const;
};

// Half-sine daylight profile: n periods of dt hours starting at start_hour,
// sunrise/sunset in hours, value = average of the half-sine over each period.
std::vector<double> half_sine_profile(int n, double dt, double start_hour = 8.0, double sunrise = 6.0,
                                      double sunset = 18.0);

std::vector<MerSpec> catalog_from_json(const nlohmann::json& j);
nlohmann::json catalog_to_json(const std::vector<MerSpec>& catalog);

FeederModel load_feeder(const std::string& path);
DamageScenario load_scenario(const std::string& path, const FeederModel& feeder);
ShortageForecast load_forecast(const std::string& path);
std::vector<MerSpec> load_catalog(const std::string& path);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// Symmetric n x n matrix with zero diagonal and off-diagonal entries uniform
// in [1, max_periods]; a pure function of its arguments.
std::vector<std::vector<int>> gen_travel_matrix(int n, std::uint64_t seed, int max_periods);

// Orders bus ids numerically when both parse as integers, otherwise lexically.
bool bus_id_less(const std::string& a, const std::string& b);

}  // namespace errplan
