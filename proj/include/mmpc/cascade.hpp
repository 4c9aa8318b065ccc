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

#include <functional>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "mmpc/dynamics.hpp"
#include "mmpc/mpc.hpp"

namespace mmpc {

/// Position reference with analytic derivatives and a yaw schedule.
struct PositionRef {
  std::function<Eigen::Vector3d(double)> xi;
  std::function<Eigen::Vector3d(double)> xi_dot;
  std::function<Eigen::Vector3d(double)> xi_ddot;
  std::function<double(double)> psi;

  /// Helix (r sin(w t), r cos(w t), climb t) with psi cycling through
  /// 0, +psi_amp, -psi_amp every `psi_period` seconds.
  static PositionRef helix(double radius = 5.0, double rate = 0.5, double climb = 1.0, double psi_amp = 50.0,
                           double psi_period = 8.0);
  static PositionRef constant(const Eigen::Vector3d& point, double psi = 0.0);

  /// Central-difference check of the derivatives on [0, duration];
  /// throws std::invalid_argument beyond `tol`.
  void check_consistency(double duration, double tol = 1e-3) const;
};

struct AttitudeRef {
  Eigen::Vector3d eta_d{Eigen::Vector3d::Zero()};
  double T_d{0};
};

struct SmcGains {
  Eigen::Vector3d Lambda{1.5, 1.5, 1.5};
  Eigen::Vector3d K{4.0, 4.0, 4.0};
  double boundary{0.5};

  void validate() const;
};

/**
 * Sliding-mode position law: s = (v - xi_d') + Lambda (xi - xi_d),
 * a = xi_d'' - Lambda (v - xi_d') - K sat(s / boundary).
 */
Eigen::Vector3d position_control_smc(const VehicleState& state, const PositionRef& ref, double t,
                                     const SmcGains& gains);

inline constexpr double kMaxTiltCommand = 1.3;

/// Thrust and (phi, theta) that point the body z axis along a_cmd + g at
/// yaw psi_d; theta is clamped to +-1.3 rad. Throws std::domain_error when
/// |a_cmd + g| <= 0.1.
AttitudeRef accel_to_attitude(const Eigen::Vector3d& a_cmd, double psi_d, const VehicleParams& params);

/// Single-model MPC about hover: an MMPC over a one-model bank.
std::unique_ptr<MmpcController> make_lmpc(const VehicleParams& vehicle, const MpcParams& params,
                                          double sample_period);

/**
 * @brief Successive-linearization MPC.
 *
 * Every step relinearizes the attitude dynamics at the measured state,
 * discretizes the affine model chi+ = A chi + B u + d exactly (matrix
 * exponential of the augmented system) and condenses and solves the same QP
 * as the multi-model controller.
 */
class NmpcController : public AttitudeController {
 public:
  NmpcController(VehicleParams vehicle, MpcParams params, double sample_period, std::string name = "nmpc");

  std::string name() const override { return name_; }
  void reset() override;
  ControlOutput step(const VehicleState& state, const Eigen::Vector3d& eta_d, long k) override;

  /// Discrete affine model used at this state (exposed for tests).
  struct AffineModel {
    Matrix6d A;
    Matrix63d B;
    Vector6d d;
  };
  AffineModel linearize(const VehicleState& state, const Eigen::Vector3d& eta_d) const;

 private:
  VehicleParams vehicle_;
  MpcParams params_;
  double sample_period_;
  std::string name_;
  Eigen::VectorXd previous_u_;
  Eigen::Vector3d previous_tau_{Eigen::Vector3d::Zero()};
};

}  // namespace mmpc
