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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmpc/dynamics.hpp"
#include "mmpc/gap.hpp"

namespace mmpc {

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Matrix63d = Eigen::Matrix<double, 6, 3>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Trim attitude; psi is omitted because the linearization does not depend on it.
struct OperatingPoint {
  double phi{0};
  double theta{0};
};

struct GridSpec {
  int n_phi{10};
  int n_theta{10};
  double theta_max{1.3};

  void validate() const;
};

/**
 * Attitude model chi' = A chi + B u with chi = (dphi, dtheta, dpsi, dp, dq, dr)
 * and u = dtau. A zero sample period means continuous time.
 */
struct LinearModel {
  OperatingPoint op;
  Matrix6d A{Matrix6d::Zero()};
  Matrix63d B{Matrix63d::Zero()};
  double sample_period{0};

  bool is_discrete() const { return sample_period > 0; }
  /// Full-state output (C = I, D = 0).
  StateSpaced to_state_space() const;
};

/**
 * Grid points in row-major order, theta outer and phi inner. phi takes the
 * n_phi cell centers of (-pi, pi]; theta is evenly spaced on
 * [-theta_max, theta_max] (a single theta point sits at 0).
 */
std::vector<OperatingPoint> generate_grid(const GridSpec& spec);

/// Jacobians of the attitude dynamics at an arbitrary (eta, omega).
struct AttitudeJacobian {
  Matrix6d A;
  Matrix63d B;
};
AttitudeJacobian attitude_jacobian(const Eigen::Vector3d& eta, const Eigen::Vector3d& omega,
                                   const VehicleParams& params);

/// Attitude derivative (eta', omega') of the nonlinear model.
Vector6d attitude_derivative(const Eigen::Vector3d& eta, const Eigen::Vector3d& omega,
                             const Eigen::Vector3d& tau, const VehicleParams& params);

/// Continuous linearization at (op, omega = 0, tau = 0).
LinearModel linearize_attitude(const OperatingPoint& op, const VehicleParams& params);

/// Zero-order-hold discretization of a continuous model.
LinearModel discretize(const LinearModel& model, double sample_period);

struct ModelBank {
  inline static constexpr int kFormatVersion = 1;

  std::string params_hash;
  GridSpec grid;
  std::vector<OperatingPoint> grid_points;
  double delta_th{0.2};
  double sample_period{0.004};
  /// Discrete representative models.
  std::vector<LinearModel> models;
  /// Grid index of each representative.
  std::vector<int> representative_grid_index;
  /// Grid index -> index into `models`.
  std::vector<int> assignment;
  /// Continuous-time gaps between all grid models.
  GapMatrix gaps;

  std::size_t size() const { return models.size(); }
  void validate() const;

  void write_json(std::ostream& os) const;
  static ModelBank read_json(std::istream& is);
};

/// Stable textual fingerprint of the vehicle parameters (FNV-1a, hex).
std::string params_hash(const VehicleParams& params);

struct BankOptions {
  double gap_tol{kDefaultGapTol};
  unsigned threads{0};
};

/// Linearize, compute the continuous gap matrix, reduce, then discretize.
ModelBank build_bank(const GridSpec& grid, const VehicleParams& params, double delta_th,
                     double sample_period, const BankOptions& options = {});

/// One-model bank at hover, used by the single-model baseline.
ModelBank hover_bank(const VehicleParams& params, double sample_period);

/// Index into bank.models for the grid point nearest (phi, theta), with the
/// phi difference wrapped; ties go to the lower grid index.
int select_model(const ModelBank& bank, double phi, double theta);

}  // namespace mmpc
