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
#include "mmpc/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace mmpc {

PositionRef PositionRef::helix(double radius, double rate, double climb, double psi_amp, double psi_period) {
  PositionRef ref;
  ref.xi = [=](double t) {
    return Eigen::Vector3d(radius * std::sin(rate * t), radius * std::cos(rate * t), climb * t);
  };
  ref.xi_dot = [=](double t) {
    return Eigen::Vector3d(radius * rate * std::cos(rate * t), -radius * rate * std::sin(rate * t), climb);
  };
  ref.xi_ddot = [=](double t) {
    const double w2 = rate * rate;
    return Eigen::Vector3d(-radius * w2 * std::sin(rate * t), -radius * w2 * std::cos(rate * t), 0.0);
  };
  const double amp = psi_amp * std::numbers::pi / 180.0;
  ref.psi = [=](double t) {
    const long phase = static_cast<long>(std::floor(t / psi_period)) % 3;
    return phase == 0 ? 0.0 : (phase == 1 ? amp : -amp);
  };
  return ref;
}

PositionRef PositionRef::constant(const Eigen::Vector3d& point, double psi) {
  PositionRef ref;
  ref.xi = [=](double) { return point; };
  ref.xi_dot = [](double) { return Eigen::Vector3d::Zero().eval(); };
  ref.xi_ddot = [](double) { return Eigen::Vector3d::Zero().eval(); };
  ref.psi = [=](double) { return psi; };
  return ref;
}

void PositionRef::check_consistency(double duration, double tol) const {
  const double h = 1e-5;
  for (double t = h; t <= duration - h; t += 0.1) {
    const Eigen::Vector3d dxi = (xi(t + h) - xi(t - h)) / (2 * h);
    const Eigen::Vector3d ddxi = (xi_dot(t + h) - xi_dot(t - h)) / (2 * h);
    if ((dxi - xi_dot(t)).lpNorm<Eigen::Infinity>() > tol || (ddxi - xi_ddot(t)).lpNorm<Eigen::Infinity>() > tol) {
      throw std::invalid_argument("PositionRef: derivatives inconsistent at t = " + std::to_string(t));
    }
  }
}

void SmcGains::validate() const {
  if (!((Lambda.array() > 0).all() && (K.array() > 0).all() && boundary > 0)) {
    throw std::invalid_argument("SmcGains: gains and boundary layer must be positive");
  }
}

Eigen::Vector3d position_control_smc(const VehicleState& state, const PositionRef& ref, double t,
                                     const SmcGains& gains) {
  const Eigen::Vector3d ev = state.v - ref.xi_dot(t);
  const Eigen::Vector3d ep = state.xi - ref.xi(t);
  const Eigen::Vector3d s = ev + gains.Lambda.cwiseProduct(ep);
  const Eigen::Vector3d sat = (s / gains.boundary).cwiseMax(-1.0).cwiseMin(1.0);
  return ref.xi_ddot(t) - gains.Lambda.cwiseProduct(ev) - gains.K.cwiseProduct(sat);
}

AttitudeRef accel_to_attitude(const Eigen::Vector3d& a_cmd, double psi_d, const VehicleParams& params) {
  const Eigen::Vector3d t = a_cmd + params.gravity();
  const double norm = t.norm();
  if (!(norm > 0.1)) throw std::domain_error("accel_to_attitude: commanded thrust direction is undefined");
  // Body z axis in the yaw-aligned frame: (c(phi) s(theta), -s(phi), c(phi) c(theta)).
  const double cp = std::cos(psi_d), sp = std::sin(psi_d);
  const Eigen::Vector3d b(cp * t(0) + sp * t(1), -sp * t(0) + cp * t(1), t(2));
  AttitudeRef out;
  out.T_d = params.m * norm;
  out.eta_d(0) = std::atan2(-b(1), std::hypot(b(0), b(2)));
  out.eta_d(1) = std::clamp(std::atan2(b(0), b(2)), -kMaxTiltCommand, kMaxTiltCommand);
  out.eta_d(2) = psi_d;
  return out;
}

std::unique_ptr<MmpcController> make_lmpc(const VehicleParams& vehicle, const MpcParams& params,
                                          double sample_period) {
  return std::make_unique<MmpcController>(hover_bank(vehicle, sample_period), params,
                                          std::vector<MpcWeights>{}, "lmpc");
}

NmpcController::NmpcController(VehicleParams vehicle, MpcParams params, double sample_period, std::string name)
    : vehicle_(vehicle), params_(std::move(params)), sample_period_(sample_period), name_(std::move(name)) {
  vehicle_.validate();
  params_.validate();
  if (!(sample_period_ > 0)) throw std::invalid_argument("NmpcController: sample period must be positive");
}

void NmpcController::reset() {
  previous_u_.resize(0);
  previous_tau_.setZero();
}

NmpcController::AffineModel NmpcController::linearize(const VehicleState& state, const Eigen::Vector3d& eta_d) const {
  const AttitudeJacobian jac = attitude_jacobian(state.eta, state.omega, vehicle_);
  const Vector6d chi0 = attitude_error(state, eta_d);
  // f(x) ~ f(x0) + A (x - x0) + B u; in error coordinates the constant is
  // f(x0, 0) - A chi0.
  const Vector6d c = attitude_derivative(state.eta, state.omega, Eigen::Vector3d::Zero(), vehicle_) - jac.A * chi0;
  Eigen::Matrix<double, 10, 10> M = Eigen::Matrix<double, 10, 10>::Zero();
  M.block<6, 6>(0, 0) = jac.A;
  M.block<6, 3>(0, 6) = jac.B;
  M.block<6, 1>(0, 9) = c;
  const Eigen::Matrix<double, 10, 10> E = (M * sample_period_).exp();
  return {E.block<6, 6>(0, 0), E.block<6, 3>(0, 6), E.block<6, 1>(0, 9)};
}

ControlOutput NmpcController::step(const VehicleState& state, const Eigen::Vector3d& eta_d, long) {
  ControlOutput out;
  out.model = -1;
  try {
    const AffineModel model = linearize(state, eta_d);
    const Prediction pred = predict(model.A, model.B, params_.N, &model.d);
    const std::vector<MpcWeights> per_index(static_cast<std::size_t>(params_.N + 1), params_.weights);
    Vector6d x_ref;
    x_ref << eta_d, Eigen::Vector3d::Zero();
    const QpProblem qp = condense(pred, per_index, params_).instantiate(attitude_error(state, eta_d), x_ref);
    Eigen::VectorXd warm;
    if (previous_u_.size() == qp.variables()) {
      warm.resize(previous_u_.size());
      warm.head(warm.size() - 3) = previous_u_.tail(warm.size() - 3);
      warm.tail(3) = previous_u_.tail(3);
    }
    const QpSolution sol = solve_qp(qp, params_.qp, warm.size() ? &warm : nullptr);
    out.iterations = sol.iterations;
    out.kkt_residual = sol.kkt_residual;
    out.constraint_violation = sol.constraint_violation;
    if (sol.status != QpStatus::Optimal || !sol.u.allFinite()) {
      throw std::runtime_error("NmpcController: QP did not converge");
    }
    previous_u_ = sol.u;
    out.tau = sol.u.head(3);
    previous_tau_ = out.tau;
  } catch (const std::exception&) {
    out.tau = previous_tau_;
    out.fallback = true;
  }
  return out;
}

}  // namespace mmpc
