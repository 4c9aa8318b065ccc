/*
 Copyright 2026 The mmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "mmpc/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmpc/cascade.hpp"

namespace mmpc {

namespace {

using Json = nlohmann::ordered_json;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double to_double(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const std::string at = where + "." + key;
  const Json& v = j.at(key);
  if constexpr (std::is_same_v<T, double>) {
    out = to_double(v, at);
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError(at + ": expected a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(at + ": expected a string");
    out = v.get<std::string>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(at + ": expected an integer");
    if (std::is_unsigned_v<T> && v.get<long long>() < 0) throw ConfigError(at + ": expected a nonnegative integer");
    out = v.get<T>();
  } else {
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != out.size()) {
      throw ConfigError(at + ": expected an array of " + std::to_string(out.size()) + " numbers");
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = to_double(v[static_cast<std::size_t>(i)], at);
  }
}

/// Like read() for vectors, with null standing for sign * infinity.
template <class V>
void read_bound(const Json& j, const char* key, V& out, double sign, const std::string& where) {
  if (!j.contains(key)) return;
  const std::string at = where + "." + key;
  const Json& v = j.at(key);
  if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != out.size()) {
    throw ConfigError(at + ": expected an array of " + std::to_string(out.size()) + " numbers or nulls");
  }
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const Json& e = v[static_cast<std::size_t>(i)];
    out(i) = e.is_null() ? sign * kInf : to_double(e, at);
  }
}

template <class V>
Json array(const V& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <class V>
Json bound_array(const V& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(std::isinf(v(i)) ? Json(nullptr) : Json(v(i)));
  return a;
}

template <class M>
void read_diagonal(const Json& j, const char* key, M& out, const std::string& where) {
  Eigen::Matrix<double, M::RowsAtCompileTime, 1> d = out.diagonal();
  read(j, key, d, where);
  out = d.asDiagonal();
}

const char* kind_name(ScenarioKind kind) {
  return kind == ScenarioKind::Trajectory ? "trajectory" : "attitude_setpoints";
}

ScenarioSpec read_scenario(const Json& j, const std::string& where) {
  check_keys(j,
             {"id", "kind", "duration", "schedule", "helix", "smc", "initial_attitude_jitter", "plant_dt",
              "position_decimation"},
             where);
  std::string kind = "attitude_setpoints";
  read(j, "kind", kind, where);
  ScenarioSpec s;
  if (kind == "trajectory") {
    s = ScenarioSpec::trajectory_default();
  } else if (kind == "attitude_setpoints") {
    s = ScenarioSpec::attitude_default();
  } else {
    throw ConfigError(where + ".kind: expected 'attitude_setpoints' or 'trajectory'");
  }
  read(j, "id", s.id, where);
  read(j, "duration", s.duration, where);
  if (j.contains("schedule")) {
    const Json& sched = j.at("schedule");
    if (!sched.is_array()) throw ConfigError(where + ".schedule: expected an array");
    s.schedule.clear();
    for (std::size_t k = 0; k < sched.size(); ++k) {
      const std::string at = where + ".schedule[" + std::to_string(k) + "]";
      check_keys(sched[k], {"t", "eta_d_deg"}, at);
      SetpointStep step;
      read(sched[k], "t", step.t, at);
      read(sched[k], "eta_d_deg", step.eta_d_deg, at);
      s.schedule.push_back(step);
    }
  }
  if (j.contains("helix")) {
    const Json& h = j.at("helix");
    const std::string at = where + ".helix";
    check_keys(h, {"radius", "rate", "climb", "psi_amp_deg", "psi_period"}, at);
    read(h, "radius", s.helix.radius, at);
    read(h, "rate", s.helix.rate, at);
    read(h, "climb", s.helix.climb, at);
    read(h, "psi_amp_deg", s.helix.psi_amp_deg, at);
    read(h, "psi_period", s.helix.psi_period, at);
  }
  if (j.contains("smc")) {
    const Json& g = j.at("smc");
    const std::string at = where + ".smc";
    check_keys(g, {"Lambda", "K", "boundary"}, at);
    read(g, "Lambda", s.smc.Lambda, at);
    read(g, "K", s.smc.K, at);
    read(g, "boundary", s.smc.boundary, at);
  }
  read(j, "initial_attitude_jitter", s.initial_attitude_jitter, where);
  read(j, "plant_dt", s.plant_dt, where);
  read(j, "position_decimation", s.position_decimation, where);
  return s;
}

Json write_scenario(const ScenarioSpec& s) {
  Json j;
  j["id"] = s.id;
  j["kind"] = kind_name(s.kind);
  j["duration"] = s.duration;
  if (s.kind == ScenarioKind::AttitudeSetpoints) {
    Json sched = Json::array();
    for (const auto& step : s.schedule) sched.push_back({{"t", step.t}, {"eta_d_deg", array(step.eta_d_deg)}});
    j["schedule"] = sched;
  } else {
    j["helix"] = {{"radius", s.helix.radius},
                  {"rate", s.helix.rate},
                  {"climb", s.helix.climb},
                  {"psi_amp_deg", s.helix.psi_amp_deg},
                  {"psi_period", s.helix.psi_period}};
    j["smc"] = {{"Lambda", array(s.smc.Lambda)}, {"K", array(s.smc.K)}, {"boundary", s.smc.boundary}};
  }
  j["initial_attitude_jitter"] = s.initial_attitude_jitter;
  j["plant_dt"] = s.plant_dt;
  j["position_decimation"] = s.position_decimation;
  return j;
}

}  // namespace

void Config::validate() const {
  try {
    vehicle.validate();
    grid.validate();
    mpc.validate();
    for (const auto& s : scenarios) scenario(s.id).validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(delta_th > 0.0 && delta_th < 1.0)) throw ConfigError("bank.delta_th must lie in (0, 1)");
  if (!(sample_period > 0.0)) throw ConfigError("mpc.sample_period must be positive");
  if (!(gap_tol > 0.0 && gap_tol < 0.1)) throw ConfigError("bank.gap_tol must lie in (0, 0.1)");
  if (!(mpc.lambda >= 0.0 && mpc.lambda <= 1.0)) throw ConfigError("mpc.lambda must lie in [0, 1]");
  std::set<std::string> ids;
  for (const auto& s : scenarios) {
    if (s.id.empty() || !ids.insert(s.id).second) throw ConfigError("scenario ids must be unique and nonempty");
  }
}

ScenarioSpec Config::scenario(const std::string& id) const {
  for (const auto& s : scenarios) {
    if (s.id == id) {
      ScenarioSpec out = s;
      out.seed = seed;
      out.record_timing = record_timing;
      out.control_period = sample_period;
      return out;
    }
  }
  throw ConfigError("unknown scenario '" + id + "'");
}

std::vector<std::string> Config::scenario_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : scenarios) ids.push_back(s.id);
  return ids;
}

std::string Config::bank_path() const {
  const std::filesystem::path p(bank_file);
  return p.is_absolute() ? p.string() : (std::filesystem::path(output_dir) / p).string();
}

Config parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Config c;
  check_keys(j, {"vehicle", "grid", "bank", "mpc", "scenarios", "output_dir", "seed", "record_timing"}, "config");
  if (j.contains("vehicle")) {
    const Json& v = j.at("vehicle");
    check_keys(v, {"m", "J", "l", "k_T", "k_Q", "g"}, "vehicle");
    read(v, "m", c.vehicle.m, "vehicle");
    read(v, "J", c.vehicle.J, "vehicle");
    read(v, "l", c.vehicle.l, "vehicle");
    read(v, "k_T", c.vehicle.k_T, "vehicle");
    read(v, "k_Q", c.vehicle.k_Q, "vehicle");
    read(v, "g", c.vehicle.g, "vehicle");
  }
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    check_keys(g, {"n_phi", "n_theta", "theta_max"}, "grid");
    read(g, "n_phi", c.grid.n_phi, "grid");
    read(g, "n_theta", c.grid.n_theta, "grid");
    read(g, "theta_max", c.grid.theta_max, "grid");
  }
  if (j.contains("bank")) {
    const Json& b = j.at("bank");
    check_keys(b, {"delta_th", "gap_tol", "threads", "file"}, "bank");
    read(b, "delta_th", c.delta_th, "bank");
    read(b, "gap_tol", c.gap_tol, "bank");
    read(b, "threads", c.threads, "bank");
    read(b, "file", c.bank_file, "bank");
  }
  if (j.contains("mpc")) {
    const Json& m = j.at("mpc");
    check_keys(m,
               {"sample_period", "N", "P", "Q", "R", "x_lower", "x_upper", "u_lower", "u_upper", "lambda", "qp"},
               "mpc");
    read(m, "sample_period", c.sample_period, "mpc");
    read(m, "N", c.mpc.N, "mpc");
    read_diagonal(m, "P", c.mpc.weights.P, "mpc");
    read_diagonal(m, "Q", c.mpc.weights.Q, "mpc");
    read_diagonal(m, "R", c.mpc.weights.R, "mpc");
    read_bound(m, "x_lower", c.mpc.x_lower, -1.0, "mpc");
    read_bound(m, "x_upper", c.mpc.x_upper, 1.0, "mpc");
    read_bound(m, "u_lower", c.mpc.u_lower, -1.0, "mpc");
    read_bound(m, "u_upper", c.mpc.u_upper, 1.0, "mpc");
    read(m, "lambda", c.mpc.lambda, "mpc");
    if (m.contains("qp")) {
      const Json& q = m.at("qp");
      check_keys(q, {"tol", "max_iterations", "slack_linear", "slack_quadratic"}, "mpc.qp");
      read(q, "tol", c.mpc.qp.tol, "mpc.qp");
      read(q, "max_iterations", c.mpc.qp.max_iterations, "mpc.qp");
      read(q, "slack_linear", c.mpc.qp.slack_linear, "mpc.qp");
      read(q, "slack_quadratic", c.mpc.qp.slack_quadratic, "mpc.qp");
    }
  }
  if (j.contains("scenarios")) {
    const Json& s = j.at("scenarios");
    if (!s.is_array()) throw ConfigError("scenarios: expected an array");
    c.scenarios.clear();
    for (std::size_t k = 0; k < s.size(); ++k) c.scenarios.push_back(read_scenario(s[k], "scenarios[" + std::to_string(k) + "]"));
  }
  read(j, "output_dir", c.output_dir, "config");
  read(j, "seed", c.seed, "config");
  read(j, "record_timing", c.record_timing, "config");
  c.validate();
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const Config& c) {
  Json j;
  j["vehicle"] = {{"m", c.vehicle.m},     {"J", array(c.vehicle.J)}, {"l", c.vehicle.l},
                  {"k_T", c.vehicle.k_T}, {"k_Q", c.vehicle.k_Q},    {"g", c.vehicle.g}};
  j["grid"] = {{"n_phi", c.grid.n_phi}, {"n_theta", c.grid.n_theta}, {"theta_max", c.grid.theta_max}};
  j["bank"] = {{"delta_th", c.delta_th}, {"gap_tol", c.gap_tol}, {"threads", c.threads}, {"file", c.bank_file}};
  j["mpc"] = {{"sample_period", c.sample_period},
              {"N", c.mpc.N},
              {"P", array(c.mpc.weights.P.diagonal())},
              {"Q", array(c.mpc.weights.Q.diagonal())},
              {"R", array(c.mpc.weights.R.diagonal())},
              {"x_lower", bound_array(c.mpc.x_lower)},
              {"x_upper", bound_array(c.mpc.x_upper)},
              {"u_lower", bound_array(c.mpc.u_lower)},
              {"u_upper", bound_array(c.mpc.u_upper)},
              {"lambda", c.mpc.lambda},
              {"qp",
               {{"tol", c.mpc.qp.tol},
                {"max_iterations", c.mpc.qp.max_iterations},
                {"slack_linear", c.mpc.qp.slack_linear},
                {"slack_quadratic", c.mpc.qp.slack_quadratic}}}};
  Json scenarios = Json::array();
  for (const auto& s : c.scenarios) scenarios.push_back(write_scenario(s));
  j["scenarios"] = scenarios;
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  j["record_timing"] = c.record_timing;
  return j.dump(2) + "\n";
}

std::unique_ptr<AttitudeController> make_controller(const std::string& id, const Config& config,
                                                    const ModelBank& bank) {
  if (id == "mmpc") return std::make_unique<MmpcController>(bank, config.mpc);
  if (id == "lmpc") return make_lmpc(config.vehicle, config.mpc, config.sample_period);
  if (id == "nmpc") return std::make_unique<NmpcController>(config.vehicle, config.mpc, config.sample_period);
  throw ConfigError("unknown controller '" + id + "'");
}

bool bank_matches(const ModelBank& bank, const Config& config) {
  return bank.params_hash == params_hash(config.vehicle) && bank.grid.n_phi == config.grid.n_phi &&
         bank.grid.n_theta == config.grid.n_theta && bank.grid.theta_max == config.grid.theta_max &&
         bank.delta_th == config.delta_th && bank.sample_period == config.sample_period;
}

ModelBank load_or_build_bank(const Config& config, bool* built) {
  const std::string path = config.bank_path();
  if (std::ifstream is(path); is) {
    try {
      ModelBank bank = ModelBank::read_json(is);
      if (bank_matches(bank, config)) {
        if (built) *built = false;
        return bank;
      }
    } catch (const std::exception&) {
      // Stale or unreadable cache: rebuild below.
    }
  }
  ModelBank bank = build_bank(config.grid, config.vehicle, config.delta_th, config.sample_period,
                              BankOptions{config.gap_tol, config.threads});
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write bank file " + path);
  bank.write_json(os);
  if (built) *built = true;
  return bank;
}

}  // namespace mmpc
