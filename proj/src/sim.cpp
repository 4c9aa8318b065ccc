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
#include "mmpc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace mmpc {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

ScenarioSpec ScenarioSpec::attitude_default() {
  ScenarioSpec s;
  s.id = "attitude";
  s.kind = ScenarioKind::AttitudeSetpoints;
  s.duration = 18.0;
  const Eigen::Vector3d up(30, 20, 50);
  s.schedule = {{0.0, up}, {3.0, -up}, {6.0, Eigen::Vector3d::Zero()},
                {9.0, up}, {12.0, -up}, {15.0, Eigen::Vector3d::Zero()}};
  return s;
}

ScenarioSpec ScenarioSpec::trajectory_default() {
  ScenarioSpec s;
  s.id = "trajectory";
  s.kind = ScenarioKind::Trajectory;
  s.duration = 24.0;
  return s;
}

void ScenarioSpec::validate() const {
  if (!(duration >= 0.0)) throw std::invalid_argument("ScenarioSpec: duration must be nonnegative");
  if (!(plant_dt > 0.0 && control_period > 0.0) || position_decimation < 1) {
    throw std::invalid_argument("ScenarioSpec: rates must be positive");
  }
  const double ratio = control_period / plant_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument("ScenarioSpec: control period must be a multiple of the plant step");
  }
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k].t > schedule[k - 1].t)) throw std::invalid_argument("ScenarioSpec: schedule times must increase");
  }
  if (kind == ScenarioKind::Trajectory) smc.validate();
}

Eigen::Vector3d ScenarioSpec::setpoint_at(double t) const {
  Eigen::Vector3d eta = Eigen::Vector3d::Zero();
  for (const auto& s : schedule) {
    if (s.t <= t) eta = s.eta_d_deg;
  }
  return eta / kRadToDeg;
}

long ScenarioSpec::steps() const { return std::lround(std::floor(duration / control_period + 1e-9)); }

SimTrace run_scenario(const ScenarioSpec& spec, AttitudeController& controller, const VehicleParams& params) {
  spec.validate();
  params.validate();
  controller.reset();
  SimTrace trace;
  trace.controller = controller.name();
  trace.kind = spec.kind;

  VehicleState state;
  if (spec.initial_attitude_jitter > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.initial_attitude_jitter);
    for (int i = 0; i < 3; ++i) state.eta(i) = noise(rng);
  }
  const PositionRef ref = spec.helix.reference();
  const int substeps = static_cast<int>(std::lround(spec.control_period / spec.plant_dt));
  const long steps = spec.steps();
  trace.samples.reserve(static_cast<std::size_t>(std::max(0L, steps)));

  AttitudeRef att;
  att.T_d = params.hover_thrust();
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * spec.control_period;
    TraceSample sample;
    sample.t = t;
    sample.state = state;
    try {
      if (spec.kind == ScenarioKind::Trajectory) {
        if (k % spec.position_decimation == 0) {
          const Eigen::Vector3d a = position_control_smc(state, ref, t, spec.smc);
          att = accel_to_attitude(a, ref.psi(t), params);
        }
        sample.xi_d = ref.xi(t);
      } else {
        att.eta_d = spec.setpoint_at(t);
      }
      sample.eta_d = att.eta_d;
      sample.T = att.T_d;

      ControlOutput out;
      if (spec.record_timing) {
        const auto t0 = std::chrono::steady_clock::now();
        out = controller.step(state, att.eta_d, k);
        const auto t1 = std::chrono::steady_clock::now();
        sample.solve_us = std::chrono::duration<double, std::micro>(t1 - t0).count();
      } else {
        out = controller.step(state, att.eta_d, k);
      }
      sample.tau = out.tau;
      sample.model = out.model;
      sample.alpha0 = out.alpha0;
      sample.kkt_residual = out.kkt_residual;
      sample.fallback = out.fallback;
      trace.samples.push_back(sample);

      const WrenchCmd cmd{att.T_d, out.tau};
      for (int s = 0; s < substeps; ++s) state = integrate_rk4(state, cmd, params, spec.plant_dt);
      if (!state.to_vector().allFinite()) throw std::runtime_error("state became non-finite");
    } catch (const std::exception& e) {
      trace.aborted = true;
      trace.abort_reason = "t = " + std::to_string(t) + ": " + e.what();
      break;
    }
  }
  return trace;
}

std::size_t SimTrace::fallback_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const TraceSample& s) { return s.fallback; }));
}

void SimTrace::write_csv(std::ostream& os) const {
  os << "t,x,y,z,u,v,w,phi,theta,psi,p,q,r,phi_d,theta_d,psi_d,T,tau_x,tau_y,tau_z,model_idx,alpha0,solve_us,kkt_res\n";
  std::ostringstream line;
  line << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    line.str("");
    line << s.t;
    for (const auto* v : {&s.state.xi, &s.state.v, &s.state.eta, &s.state.omega, &s.eta_d}) {
      for (int i = 0; i < 3; ++i) line << ',' << (*v)(i);
    }
    line << ',' << s.T;
    for (int i = 0; i < 3; ++i) line << ',' << s.tau(i);
    line << ',' << s.model << ',' << s.alpha0 << ',' << s.solve_us << ',' << s.kkt_residual << '\n';
    os << line.str();
  }
}

namespace {

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

MetricsReport compute_metrics(const SimTrace& trace, double transient) {
  if (trace.samples.empty()) throw std::invalid_argument("compute_metrics: empty trace");
  MetricsReport r;
  r.controller = trace.controller;
  r.aborted = trace.aborted;
  r.fallback_count = trace.fallback_count();
  Eigen::Vector3d att = Eigen::Vector3d::Zero();
  Eigen::Vector3d tau = Eigen::Vector3d::Zero();
  Eigen::Vector3d pos = Eigen::Vector3d::Zero();
  std::size_t pos_count = 0;
  std::vector<double> times;
  int previous_model = -1;
  for (const auto& s : trace.samples) {
    for (int i = 0; i < 3; ++i) {
      const double e = wrap_angle(s.state.eta(i) - s.eta_d(i)) * kRadToDeg;
      att(i) += e * e;
    }
    tau += s.tau.cwiseAbs2();
    if (trace.kind == ScenarioKind::Trajectory && s.t >= transient) {
      pos += (s.state.xi - s.xi_d).cwiseAbs2();
      ++pos_count;
    }
    times.push_back(s.solve_us);
    if (s.model >= 0) {
      if (previous_model >= 0 && s.model != previous_model) ++r.switch_count;
      previous_model = s.model;
    }
  }
  const auto n = static_cast<double>(trace.samples.size());
  r.rms_attitude_error = (att / n).cwiseSqrt();
  r.rms_torque = (tau / n).cwiseSqrt();
  if (trace.kind == ScenarioKind::Trajectory) {
    r.rms_position_error = pos_count ? Eigen::Vector3d((pos / static_cast<double>(pos_count)).cwiseSqrt())
                                     : Eigen::Vector3d::Zero();
  }
  r.solve_time_us.median = percentile(times, 0.5);
  r.solve_time_us.p95 = percentile(times, 0.95);
  r.solve_time_us.max = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  return r;
}

namespace {

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["controller"] = m.controller;
  j["rms_attitude_error"] = {{"phi", m.rms_attitude_error(0)}, {"theta", m.rms_attitude_error(1)},
                             {"psi", m.rms_attitude_error(2)}};
  j["rms_torque"] = {{"tau_x", m.rms_torque(0)}, {"tau_y", m.rms_torque(1)}, {"tau_z", m.rms_torque(2)}};
  if (m.rms_position_error) {
    const auto& p = *m.rms_position_error;
    j["rms_position_error"] = {{"x", p(0)}, {"y", p(1)}, {"z", p(2)}};
  } else {
    j["rms_position_error"] = nullptr;
  }
  j["solve_time_us"] = {{"median", m.solve_time_us.median}, {"p95", m.solve_time_us.p95},
                        {"max", m.solve_time_us.max}};
  j["switch_count"] = m.switch_count;
  j["fallback_count"] = m.fallback_count;
  j["aborted"] = m.aborted;
  return j;
}

}  // namespace

void MetricsReport::write_json(std::ostream& os) const { os << metrics_json(*this).dump(2) << '\n'; }

Comparison compare_controllers(const ScenarioSpec& spec, const std::vector<AttitudeController*>& controllers,
                               const VehicleParams& params, std::vector<SimTrace>* traces) {
  Comparison c;
  for (AttitudeController* ctrl : controllers) {
    ComparisonRow row;
    row.metrics.controller = ctrl->name();
    try {
      SimTrace trace = run_scenario(spec, *ctrl, params);
      row.metrics = compute_metrics(trace);
      if (trace.aborted) row.failure = trace.abort_reason;
      if (traces) traces->push_back(std::move(trace));
    } catch (const std::exception& e) {
      row.failure = e.what();
      if (traces) {
        SimTrace empty;
        empty.controller = ctrl->name();
        empty.aborted = true;
        empty.abort_reason = e.what();
        traces->push_back(std::move(empty));
      }
    }
    c.rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(c.rows.size());
  c.solve_time_ratio = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double den = c.rows[static_cast<std::size_t>(j)].metrics.solve_time_us.median;
      if (den > 0) c.solve_time_ratio(i, j) = c.rows[static_cast<std::size_t>(i)].metrics.solve_time_us.median / den;
    }
  }
  return c;
}

void Comparison::write_table(std::ostream& os) const {
  auto cell = [&](double v) {
    std::ostringstream s;
    s << std::setprecision(4) << std::fixed << v;
    return s.str();
  };
  os << std::left << std::setw(28) << "metric";
  for (const auto& r : rows) os << std::setw(14) << r.metrics.controller;
  os << '\n';
  auto line = [&](const std::string& label, auto get) {
    os << std::setw(28) << label;
    for (const auto& r : rows) os << std::setw(14) << (r.failure && r.metrics.rms_torque.isZero() ? "failed" : cell(get(r.metrics)));
    os << '\n';
  };
  const char* axes[] = {"phi", "theta", "psi"};
  for (int i = 0; i < 3; ++i) {
    line(std::string("rms ") + axes[i] + " error [deg]", [i](const MetricsReport& m) { return m.rms_attitude_error(i); });
  }
  const char* taus[] = {"tau_x", "tau_y", "tau_z"};
  for (int i = 0; i < 3; ++i) {
    line(std::string("rms ") + taus[i] + " [N m]", [i](const MetricsReport& m) { return m.rms_torque(i); });
  }
  if (!rows.empty() && rows.front().metrics.rms_position_error) {
    const char* pos[] = {"x", "y", "z"};
    for (int i = 0; i < 3; ++i) {
      line(std::string("rms ") + pos[i] + " error [m]", [i](const MetricsReport& m) {
        return m.rms_position_error ? (*m.rms_position_error)(i) : 0.0;
      });
    }
  }
  line("solve median [us]", [](const MetricsReport& m) { return m.solve_time_us.median; });
  line("solve p95 [us]", [](const MetricsReport& m) { return m.solve_time_us.p95; });
  line("solve max [us]", [](const MetricsReport& m) { return m.solve_time_us.max; });
  line("model switches", [](const MetricsReport& m) { return static_cast<double>(m.switch_count); });
}

void Comparison::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["controllers"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    auto m = metrics_json(r.metrics);
    m["failure"] = r.failure ? nlohmann::ordered_json(*r.failure) : nlohmann::ordered_json(nullptr);
    j["controllers"].push_back(m);
  }
  nlohmann::ordered_json ratios = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j2 = 0; j2 < rows.size(); ++j2) {
      if (i == j2) continue;
      const double v = solve_time_ratio(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j2));
      ratios[rows[i].metrics.controller + "/" + rows[j2].metrics.controller] =
          std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    }
  }
  j["solve_time_ratio"] = ratios;
  os << j.dump(2) << '\n';
}

std::vector<std::string> write_plot_data(const SimTrace& trace, const std::string& directory,
                                         const std::string& prefix) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  std::vector<std::string> written;
  auto emit = [&](const std::string& figure, const std::vector<std::pair<std::string, std::function<double(const TraceSample&)>>>& series) {
    const std::string path = (fs::path(directory) / (prefix + "_" + figure + ".csv")).string();
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "time,series,value\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& [name, get] : series) {
      for (const auto& s : trace.samples) os << s.t << ',' << name << ',' << get(s) << '\n';
    }
    written.push_back(path);
  };
  emit("attitude", {{"phi", [](const TraceSample& s) { return s.state.eta(0) * kRadToDeg; }},
                    {"phi_d", [](const TraceSample& s) { return s.eta_d(0) * kRadToDeg; }},
                    {"theta", [](const TraceSample& s) { return s.state.eta(1) * kRadToDeg; }},
                    {"theta_d", [](const TraceSample& s) { return s.eta_d(1) * kRadToDeg; }},
                    {"psi", [](const TraceSample& s) { return s.state.eta(2) * kRadToDeg; }},
                    {"psi_d", [](const TraceSample& s) { return s.eta_d(2) * kRadToDeg; }}});
  emit("torque", {{"tau_x", [](const TraceSample& s) { return s.tau(0); }},
                  {"tau_y", [](const TraceSample& s) { return s.tau(1); }},
                  {"tau_z", [](const TraceSample& s) { return s.tau(2); }}});
  emit("model", {{"model_idx", [](const TraceSample& s) { return static_cast<double>(s.model); }},
                 {"alpha0", [](const TraceSample& s) { return s.alpha0; }}});
  if (trace.kind == ScenarioKind::Trajectory) {
    emit("position", {{"x", [](const TraceSample& s) { return s.state.xi(0); }},
                      {"x_d", [](const TraceSample& s) { return s.xi_d(0); }},
                      {"y", [](const TraceSample& s) { return s.state.xi(1); }},
                      {"y_d", [](const TraceSample& s) { return s.xi_d(1); }},
                      {"z", [](const TraceSample& s) { return s.state.xi(2); }},
                      {"z_d", [](const TraceSample& s) { return s.xi_d(2); }}});
  }
  return written;
}

}  // namespace mmpc
