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
#include "mmpc/mpc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmpc {

namespace {

template <typename Derived>
bool symmetric_psd(const Eigen::MatrixBase<Derived>& M, bool strict) {
  const double scale = 1.0 + M.cwiseAbs().maxCoeff();
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  return strict ? lo > 0.0 : lo >= -1e-12 * scale;
}

}  // namespace

MpcWeights MpcWeights::diagonal(const Vector6d& p, const Vector6d& q, const Eigen::Vector3d& r) {
  MpcWeights w;
  w.P = p.asDiagonal();
  w.Q = q.asDiagonal();
  w.R = r.asDiagonal();
  return w;
}

void MpcWeights::validate() const {
  if (!symmetric_psd(P, false) || !symmetric_psd(Q, false)) {
    throw std::invalid_argument("MpcWeights: P and Q must be symmetric positive semi-definite");
  }
  if (!symmetric_psd(R, true)) throw std::invalid_argument("MpcWeights: R must be symmetric positive definite");
}

MpcWeights MpcParams::default_weights() {
  Vector6d q;
  q << 3.327e4, 7.133e4, 3292.0, 5.644, 12.1, 0.7604;
  return MpcWeights::diagonal(q, q, Eigen::Vector3d::Ones());
}

Vector6d MpcParams::default_state_lower() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vector6d lo;
  lo << -inf, -1.3, -inf, -inf, -inf, -inf;
  return lo;
}

void MpcParams::validate() const {
  if (N < 1) throw std::invalid_argument("MpcParams: N must be >= 1");
  weights.validate();
  if ((x_lower.array() > x_upper.array()).any() || (u_lower.array() > u_upper.array()).any()) {
    throw std::invalid_argument("MpcParams: bounds must satisfy lower <= upper");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("MpcParams: lambda must lie in [0, 1]");
}

double switch_alpha(long k, long k_s, int i, double lambda, int N) {
  if (k < k_s || i < 0 || i > N) throw std::invalid_argument("switch_alpha: need k >= k_s and 0 <= i <= N");
  const int idx = (i == N && N > 0) ? N - 1 : i;
  if (k + idx >= N + k_s) return 0.0;
  const long e = k - k_s + idx;
  return e == 0 ? 1.0 : std::pow(lambda, static_cast<double>(e));
}

MpcWeights blend(const MpcWeights& outgoing, const MpcWeights& incoming, double alpha) {
  const double beta = 1.0 - alpha;
  MpcWeights w;
  w.P = alpha * outgoing.P + beta * incoming.P;
  w.Q = alpha * outgoing.Q + beta * incoming.Q;
  w.R = alpha * outgoing.R + beta * incoming.R;
  return w;
}

MpcWeights blend_weights(const MpcWeights& outgoing, const MpcWeights& incoming, long k, long k_s, int i,
                         double lambda, int N) {
  return blend(outgoing, incoming, switch_alpha(k, k_s, i, lambda, N));
}

Prediction predict(const Matrix6d& A, const Matrix63d& B, int N, const Vector6d* drift) {
  Prediction p;
  p.Phi.resize(6 * N, 6);
  p.Gamma = Eigen::MatrixXd::Zero(6 * N, 3 * N);
  p.c = Eigen::VectorXd::Zero(6 * N);
  Matrix6d Ai = A;
  for (int i = 0; i < N; ++i) {
    p.Phi.block<6, 6>(6 * i, 0) = Ai;
    Ai = A * Ai;
  }
  // Gamma_{i,j} = A^{i-j} B for j <= i (row block i predicts chi_{i+1}).
  for (int i = 0; i < N; ++i) {
    p.Gamma.block<6, 3>(6 * i, 3 * i) = B;
    for (int j = 0; j < i; ++j) {
      p.Gamma.block<6, 3>(6 * i, 3 * j) = A * p.Gamma.block<6, 3>(6 * (i - 1), 3 * j);
    }
  }
  if (drift) {
    Vector6d acc = *drift;
    p.c.segment<6>(0) = acc;
    for (int i = 1; i < N; ++i) {
      acc = A * acc + *drift;
      p.c.segment<6>(6 * i) = acc;
    }
  }
  return p;
}

CondensedQp condense(const Prediction& pred, const std::vector<MpcWeights>& per_index, const MpcParams& params) {
  const int N = params.N;
  if (static_cast<int>(per_index.size()) != N + 1) {
    throw std::invalid_argument("condense: need N + 1 weight sets");
  }
  if (pred.Phi.rows() != 6 * N) throw std::invalid_argument("condense: prediction horizon mismatch");
  const Eigen::Index nu = 3 * N;
  // Qbar Gamma and Qbar Phi built block by block (Qbar is block diagonal).
  Eigen::MatrixXd QG(6 * N, nu);
  Eigen::MatrixXd QP(6 * N, 6);
  Eigen::VectorXd Qc(6 * N);
  for (int i = 0; i < N; ++i) {
    const Matrix6d& W = (i == N - 1) ? per_index[static_cast<std::size_t>(N)].P
                                     : per_index[static_cast<std::size_t>(i + 1)].Q;
    QG.middleRows(6 * i, 6).noalias() = W * pred.Gamma.middleRows(6 * i, 6);
    QP.middleRows(6 * i, 6).noalias() = W * pred.Phi.middleRows(6 * i, 6);
    Qc.segment(6 * i, 6).noalias() = W * pred.c.segment(6 * i, 6);
  }
  CondensedQp out;
  out.H.noalias() = pred.Gamma.transpose() * QG;
  for (int i = 0; i < N; ++i) out.H.block<3, 3>(3 * i, 3 * i) += per_index[static_cast<std::size_t>(i)].R;
  out.H = (0.5 * (out.H + out.H.transpose())).eval();
  out.H_factor = std::make_shared<const Eigen::LLT<Eigen::MatrixXd>>(out.H);
  out.F.noalias() = pred.Gamma.transpose() * QP;
  out.f_c.noalias() = pred.Gamma.transpose() * Qc;

  for (int i = 1; i < N; ++i) {
    for (int d = 0; d < 6; ++d) {
      if (std::isfinite(params.x_upper(d))) out.rows.push_back({i, d, 1.0, params.x_upper(d)});
      if (std::isfinite(params.x_lower(d))) out.rows.push_back({i, d, -1.0, params.x_lower(d)});
    }
  }
  const auto m = static_cast<Eigen::Index>(out.rows.size());
  out.G.resize(m, nu);
  out.G_chi.resize(m, 6);
  out.g_c.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = out.rows[static_cast<std::size_t>(r)];
    // chi_i lives in row block i - 1 of the prediction.
    const Eigen::Index at = 6 * (row.index - 1) + row.state;
    out.G.row(r) = row.sign * pred.Gamma.row(at);
    out.G_chi.row(r) = row.sign * pred.Phi.row(at);
    out.g_c(r) = row.sign * pred.c(at);
  }
  out.lb = params.u_lower.replicate(N, 1);
  out.ub = params.u_upper.replicate(N, 1);
  return out;
}

QpProblem CondensedQp::instantiate(const Vector6d& chi0, const Vector6d& x_ref) const {
  QpProblem qp;
  qp.H = H;
  qp.H_factor = H_factor;
  qp.f.noalias() = F * chi0;
  qp.f += f_c;
  qp.lb = lb;
  qp.ub = ub;
  qp.G = G;
  qp.h.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto ri = static_cast<Eigen::Index>(r);
    qp.h(ri) = row.sign * (row.bound - x_ref(row.state)) - G_chi.row(ri).dot(chi0) - g_c(ri);
  }
  return qp;
}

QpProblem build_qp(const LinearModel& model, const std::vector<MpcWeights>& per_index, const Vector6d& chi0,
                   const MpcParams& params, const Vector6d& x_ref) {
  if (!model.is_discrete()) throw std::invalid_argument("build_qp: model must be discrete");
  if (!chi0.allFinite()) throw std::invalid_argument("build_qp: initial state is not finite");
  return condense(predict(model.A, model.B, params.N), per_index, params).instantiate(chi0, x_ref);
}

Vector6d attitude_error(const VehicleState& state, const Eigen::Vector3d& eta_d) {
  Vector6d chi;
  chi << wrap_angle(state.eta(0) - eta_d(0)), state.eta(1) - eta_d(1), wrap_angle(state.eta(2) - eta_d(2)),
      state.omega;
  return chi;
}

MmpcController::MmpcController(ModelBank bank, MpcParams params, std::vector<MpcWeights> per_model,
                               std::string name)
    : bank_(std::move(bank)), params_(std::move(params)), per_model_(std::move(per_model)), name_(std::move(name)) {
  bank_.validate();
  params_.validate();
  if (per_model_.empty()) per_model_.assign(bank_.size(), params_.weights);
  if (per_model_.size() != bank_.size()) {
    throw std::invalid_argument("MmpcController: need one weight set per bank model");
  }
  for (const auto& w : per_model_) w.validate();
  for (std::size_t m = 0; m < bank_.size(); ++m) {
    predictions_.push_back(predict(bank_.models[m].A, bank_.models[m].B, params_.N));
    const std::vector<MpcWeights> same(static_cast<std::size_t>(params_.N + 1), per_model_[m]);
    steady_.push_back(condense(predictions_.back(), same, params_));
  }
  reset();
}

void MmpcController::reset() {
  switch_ = SwitchState{};
  switch_.lambda = params_.lambda;
  switch_.transition_len = params_.N;
  previous_u_.resize(0);
  previous_tau_.setZero();
}

MpcWeights MmpcController::current_weights(long k, int i) const {
  const MpcWeights& incoming = per_model_[static_cast<std::size_t>(switch_.active)];
  if (!switch_.in_transition(k)) return incoming;
  return blend_weights(switch_.outgoing_weights, incoming, k, switch_.k_s, i, switch_.lambda, params_.N);
}

ControlOutput MmpcController::step(const VehicleState& state, const Eigen::Vector3d& eta_d, long k) {
  ControlOutput out;
  try {
    const int selected = selector_ ? selector_(state, k) : select_model(bank_, state.eta(0), state.eta(1));
    if (selected < 0 || selected >= static_cast<int>(bank_.size())) {
      throw std::out_of_range("MmpcController: selected model out of range");
    }
    if (switch_.active < 0) {
      switch_.active = selected;
    } else if (selected != switch_.active) {
      // A nested switch restarts from the weights currently in force.
      switch_.outgoing_weights = current_weights(k, 0);
      switch_.outgoing = switch_.active;
      switch_.k_s = k;
      switch_.active = selected;
    }
    if (switch_.outgoing && !switch_.in_transition(k)) switch_.outgoing.reset();
    const auto m = static_cast<std::size_t>(switch_.active);
    out.model = switch_.active;

    Vector6d x_ref;
    x_ref << eta_d, Eigen::Vector3d::Zero();
    const Vector6d chi0 = attitude_error(state, eta_d);
    QpProblem qp;
    if (switch_.in_transition(k)) {
      std::vector<MpcWeights> per_index;
      for (int i = 0; i <= params_.N; ++i) per_index.push_back(current_weights(k, i));
      out.alpha0 = switch_alpha(k, switch_.k_s, 0, switch_.lambda, params_.N);
      qp = condense(predictions_[m], per_index, params_).instantiate(chi0, x_ref);
    } else {
      qp = steady_[m].instantiate(chi0, x_ref);
    }

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
      throw std::runtime_error("MmpcController: QP did not converge");
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
