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
#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmpc/cascade.hpp"
#include "mmpc/dynamics.hpp"
#include "mmpc/mpc.hpp"

namespace mmpc {

enum class ScenarioKind { AttitudeSetpoints, Trajectory };

struct SetpointStep {
  double t{0};
  Eigen::Vector3d eta_d_deg{Eigen::Vector3d::Zero()};
};

struct HelixSpec {
  double radius{5.0};
  double rate{0.5};
  double climb{1.0};
  double psi_amp_deg{50.0};
  double psi_period{8.0};

  PositionRef reference() const { return PositionRef::helix(radius, rate, climb, psi_amp_deg, psi_period); }
};

struct ScenarioSpec {
  std::string id{"attitude"};
  ScenarioKind kind{ScenarioKind::AttitudeSetpoints};
  double duration{18.0};
  std::vector<SetpointStep> schedule;
  HelixSpec helix;
  SmcGains smc;
  unsigned long long seed{0};
  /// Standard deviation (rad) of a seeded perturbation of the initial attitude.
  double initial_attitude_jitter{0.0};
  double plant_dt{0.001};
  double control_period{0.004};
  /// Attitude steps per position-loop update.
  int position_decimation{5};
  /// Measure per-step wall-clock time (excluded from determinism checks).
  bool record_timing{false};

  static ScenarioSpec attitude_default();
  static ScenarioSpec trajectory_default();
  void validate() const;
  /// Attitude setpoint (rad) in force at time t, held from the latest step.
  Eigen::Vector3d setpoint_at(double t) const;
  long steps() const;
};

struct TraceSample {
  double t{0};
  VehicleState state;
  Eigen::Vector3d eta_d{Eigen::Vector3d::Zero()};
  Eigen::Vector3d xi_d{Eigen::Vector3d::Zero()};
  double T{0};
  Eigen::Vector3d tau{Eigen::Vector3d::Zero()};
  int model{-1};
  double alpha0{0};
  double solve_us{0};
  double kkt_residual{0};
  bool fallback{false};
};

struct SimTrace {
  std::string controller;
  ScenarioKind kind{ScenarioKind::AttitudeSetpoints};
  std::vector<TraceSample> samples;
  bool aborted{false};
  std::string abort_reason;

  std::size_t fallback_count() const;
  void write_csv(std::ostream& os) const;
};

/// Runs one scenario from rest at the origin; the controller is reset first.
SimTrace run_scenario(const ScenarioSpec& spec, AttitudeController& controller, const VehicleParams& params);

struct SolveTimeStats {
  double median{0};
  double p95{0};
  double max{0};
};

struct MetricsReport {
  std::string controller;
  Eigen::Vector3d rms_attitude_error{Eigen::Vector3d::Zero()};  // deg
  Eigen::Vector3d rms_torque{Eigen::Vector3d::Zero()};          // N m
  std::optional<Eigen::Vector3d> rms_position_error;            // m, after the transient
  SolveTimeStats solve_time_us;
  int switch_count{0};
  std::size_t fallback_count{0};
  bool aborted{false};

  void write_json(std::ostream& os) const;
};

/// RMS over all samples (attitude errors wrapped, in degrees); position
/// errors skip the first `transient` seconds of trajectory runs.
MetricsReport compute_metrics(const SimTrace& trace, double transient = 2.0);

struct ComparisonRow {
  MetricsReport metrics;
  std::optional<std::string> failure;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  /// ratio(i, j) = median solve time of i / median of j.
  Eigen::MatrixXd solve_time_ratio;

  void write_table(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

/// Same spec, plant and seed for every controller; failures are recorded
/// and the remaining controllers still run.
Comparison compare_controllers(const ScenarioSpec& spec, const std::vector<AttitudeController*>& controllers,
                               const VehicleParams& params, std::vector<SimTrace>* traces = nullptr);

/// Long-format (time, series, value) plot data, one file per figure;
/// returns the paths written.
std::vector<std::string> write_plot_data(const SimTrace& trace, const std::string& directory,
                                         const std::string& prefix);

}  // namespace mmpc
