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
#include "mmpc/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mmpc {

void VehicleParams::validate() const {
  if (!(m > 0 && l > 0 && k_T > 0 && k_Q > 0 && g > 0 && (J.array() > 0).all())) {
    throw std::invalid_argument("VehicleParams: all parameters must be strictly positive");
  }
}

Vector12d VehicleState::to_vector() const {
  Vector12d x;
  x << xi, v, eta, omega;
  return x;
}

VehicleState VehicleState::from_vector(const Vector12d& x) {
  VehicleState s;
  s.xi = x.segment<3>(0);
  s.v = x.segment<3>(3);
  s.eta = x.segment<3>(6);
  s.omega = x.segment<3>(9);
  return s;
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  if (a > -pi && a <= pi) return a;
  double r = std::remainder(a, 2.0 * pi);  // in [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

Eigen::Matrix3d rotation_matrix(const Eigen::Vector3d& eta) {
  const double cf = std::cos(eta(0)), sf = std::sin(eta(0));
  const double ct = std::cos(eta(1)), st = std::sin(eta(1));
  const double cp = std::cos(eta(2)), sp = std::sin(eta(2));
  Eigen::Matrix3d R;
  R << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
       ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
       -st, sf * ct, cf * ct;
  return R;
}

Eigen::Matrix3d euler_kinematics_matrix(const Eigen::Vector3d& eta, double margin) {
  if (std::abs(eta(1)) >= std::numbers::pi / 2 - margin) {
    throw GimbalError("euler_kinematics_matrix: |theta| = " + std::to_string(std::abs(eta(1))) +
                      " is within the gimbal margin");
  }
  const double cf = std::cos(eta(0)), sf = std::sin(eta(0));
  const double ct = std::cos(eta(1)), tt = std::tan(eta(1));
  Eigen::Matrix3d H;
  H << 1.0, sf * tt, cf * tt,
       0.0, cf, -sf,
       0.0, sf / ct, cf / ct;
  return H;
}

Eigen::Matrix4d mixer_matrix(const VehicleParams& p) {
  const double a = p.l * p.k_T;
  Eigen::Matrix4d M;
  M << p.k_T, p.k_T, p.k_T, p.k_T,
       0.0, a, 0.0, -a,
       -a, 0.0, a, 0.0,
       -p.k_Q, p.k_Q, -p.k_Q, p.k_Q;
  return M;
}

WrenchCmd mix_rotors_to_wrench(const RotorSpeeds& rotors, const VehicleParams& params) {
  const Eigen::Vector4d w = mixer_matrix(params) * rotors.omega.cwiseAbs2();
  WrenchCmd out;
  out.T = w(0);
  out.tau = w.tail<3>();
  return out;
}

RotorSpeeds wrench_to_rotors(const WrenchCmd& cmd, const VehicleParams& params) {
  Eigen::Vector4d w;
  w << cmd.T, cmd.tau;
  Eigen::Vector4d sq = mixer_matrix(params).partialPivLu().solve(w);
  RotorSpeeds out;
  for (int i = 0; i < 4; ++i) {
    if (sq(i) < 0.0) {
      sq(i) = 0.0;
      out.saturated = true;
    }
    const double mag = std::sqrt(sq(i));
    out.omega(i) = (i % 2 == 0) ? mag : -mag;
  }
  return out;
}

VehicleState state_derivative(const VehicleState& s, const WrenchCmd& cmd, const VehicleParams& p) {
  VehicleState d;
  d.xi = s.v;
  d.v = -p.gravity() + rotation_matrix(s.eta) * Eigen::Vector3d(0.0, 0.0, cmd.T) / p.m;
  d.eta = euler_kinematics_matrix(s.eta) * s.omega;
  const Eigen::Vector3d Jw = p.J.cwiseProduct(s.omega);
  d.omega = (-s.omega.cross(Jw) + cmd.tau).cwiseQuotient(p.J);
  return d;
}

VehicleState integrate_rk4(const VehicleState& s, const WrenchCmd& cmd, const VehicleParams& p,
                           double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_rk4: dt must be positive");
  const Vector12d x = s.to_vector();
  auto f = [&](const Vector12d& y) {
    return state_derivative(VehicleState::from_vector(y), cmd, p).to_vector();
  };
  const Vector12d k1 = f(x);
  const Vector12d k2 = f(x + 0.5 * dt * k1);
  const Vector12d k3 = f(x + 0.5 * dt * k2);
  const Vector12d k4 = f(x + dt * k3);
  VehicleState out = VehicleState::from_vector(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
  out.eta(0) = wrap_angle(out.eta(0));
  out.eta(2) = wrap_angle(out.eta(2));
  return out;
}

}  // namespace mmpc
