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

#include <stdexcept>

#include <Eigen/Dense>

namespace mmpc {

using Vector12d = Eigen::Matrix<double, 12, 1>;

/// Rigid-body and rotor constants of the quadrotor.
struct VehicleParams {
  double m{0.65};
  Eigen::Vector3d J{0.021, 0.023, 0.032};  // principal inertias
  double l{0.225};
  double k_T{1.22e-5};
  double k_Q{6.89e-5};
  double g{9.81};

  Eigen::Matrix3d inertia() const { return J.asDiagonal(); }
  Eigen::Vector3d gravity() const { return {0.0, 0.0, g}; }
  double hover_thrust() const { return m * g; }
  void validate() const;
};

/**
 * Position xi, velocity v (inertial frame, z up), Euler angles
 * eta = (phi, theta, psi) and body rates omega = (p, q, r).
 */
struct VehicleState {
  Eigen::Vector3d xi{Eigen::Vector3d::Zero()};
  Eigen::Vector3d v{Eigen::Vector3d::Zero()};
  Eigen::Vector3d eta{Eigen::Vector3d::Zero()};
  Eigen::Vector3d omega{Eigen::Vector3d::Zero()};

  Vector12d to_vector() const;
  static VehicleState from_vector(const Vector12d& x);
};

struct WrenchCmd {
  double T{0};
  Eigen::Vector3d tau{Eigen::Vector3d::Zero()};
};

/// Signed rotor rates; rotors 1 and 3 spin positive, 2 and 4 negative.
struct RotorSpeeds {
  Eigen::Vector4d omega{Eigen::Vector4d::Zero()};
  /// Set when some requested squared speed was negative and clamped to 0.
  bool saturated{false};
};

/// Raised when |theta| comes within the guard margin of pi/2.
class GimbalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kGimbalMargin = 1e-3;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Body-to-inertial rotation, R = Rz(psi) Ry(theta) Rx(phi).
Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& eta);

/// H(eta) with eta_dot = H(eta) omega. Throws GimbalError near |theta| = pi/2.
Eigen::Matrix3d euler_kinematics_matrix(const Eigen::Vector3d& eta, double margin = kGimbalMargin);

/// Map from squared rotor speeds to (T, tau_x, tau_y, tau_z).
Eigen::Matrix4d mixer_matrix(const VehicleParams& params);

WrenchCmd mix_rotors_to_wrench(const RotorSpeeds& rotors, const VehicleParams& params);

/// Inverse mixing. Negative squared speeds are clamped to zero and flagged.
RotorSpeeds wrench_to_rotors(const WrenchCmd& cmd, const VehicleParams& params);

/**
 * @brief Time derivative of the full state under a held wrench.
 *
 * xi'' = -g + R f / m with f = (0, 0, T), omega' = J^{-1}(-omega x J omega + tau)
 * and eta' = H(eta) omega. The result is returned in VehicleState layout.
 */
VehicleState state_derivative(const VehicleState& state, const WrenchCmd& cmd,
                              const VehicleParams& params);

/// One classical RK4 step with the wrench held; angles wrapped afterwards.
VehicleState integrate_rk4(const VehicleState& state, const WrenchCmd& cmd,
                           const VehicleParams& params, double dt);

}  // namespace mmpc
