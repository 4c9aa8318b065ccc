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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmpc/bank.hpp"
#include "mmpc/dynamics.hpp"
#include "mmpc/qp.hpp"

namespace mmpc {

/// Terminal, stage and input weights of one controller.
struct MpcWeights {
  Matrix6d P{Matrix6d::Identity()};
  Matrix6d Q{Matrix6d::Identity()};
  Eigen::Matrix3d R{Eigen::Matrix3d::Identity()};

  static MpcWeights diagonal(const Vector6d& p, const Vector6d& q, const Eigen::Vector3d& r);
  /// Symmetric PSD P, Q and symmetric PD R; throws std::invalid_argument.
  void validate() const;
};

struct MpcParams {
  int N{5};
  MpcWeights weights{default_weights()};
  /// Absolute bounds on (phi, theta, psi, p, q, r); infinite entries are unconstrained.
  Vector6d x_lower{default_state_lower()};
  Vector6d x_upper{-default_state_lower()};
  Eigen::Vector3d u_lower{-1.0, -1.0, -1.0};
  Eigen::Vector3d u_upper{1.0, 1.0, 1.0};
  double lambda{0.5};
  QpOptions qp;

  static MpcWeights default_weights();
  static Vector6d default_state_lower();
  void validate() const;
};

/**
 * Soft-switching weight alpha_k(i) = lambda^(k - k_s + i) while
 * k + i < N + k_s and 0 afterwards, with alpha_k(N) = alpha_k(N - 1) and
 * lambda^0 = 1 for every lambda.
 */
double switch_alpha(long k, long k_s, int i, double lambda, int N);

/// alpha * outgoing + (1 - alpha) * incoming, element-wise on P, Q, R.
MpcWeights blend(const MpcWeights& outgoing, const MpcWeights& incoming, double alpha);

/// Blended weights at horizon index i of step k.
MpcWeights blend_weights(const MpcWeights& outgoing, const MpcWeights& incoming, long k, long k_s, int i,
                         double lambda, int N);

struct SwitchState {
  int active{-1};
  std::optional<int> outgoing;
  /// Outgoing parameter set (a snapshot of the blend for nested switches).
  MpcWeights outgoing_weights;
  long k_s{0};
  double lambda{0.5};
  int transition_len{5};

  bool in_transition(long k) const { return outgoing.has_value() && k - k_s < transition_len; }
};

/// Stacked predictions chi_i = Phi_i chi_0 + Gamma_i U + c_i for i = 1..N.
struct Prediction {
  Eigen::MatrixXd Phi;    // 6N x 6
  Eigen::MatrixXd Gamma;  // 6N x 3N
  Eigen::VectorXd c;      // 6N, accumulated affine drift
};

/// Prediction matrices of chi+ = A chi + B u + d (d = 0 when null).
Prediction predict(const Matrix6d& A, const Matrix63d& B, int N, const Vector6d* drift = nullptr);

/**
 * Condensed MPC program with the initial state left symbolic:
 * f = F chi0 + f_c and the state rows G U <= h(chi0, x_ref).
 * State rows cover horizon indices 1..N-1; index 0 is fixed by chi0 and the
 * terminal state is unconstrained.
 */
struct CondensedQp {
  struct StateRow {
    int index;     // horizon index i
    int state;     // component of chi
    double sign;   // +1 upper bound, -1 lower bound
    double bound;  // absolute bound value
  };

  Eigen::MatrixXd H;
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> H_factor;
  Eigen::MatrixXd F;
  Eigen::VectorXd f_c;
  Eigen::MatrixXd G;
  Eigen::MatrixXd G_chi;
  Eigen::VectorXd g_c;
  std::vector<StateRow> rows;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  /// QP for initial error chi0 about the reference state x_ref.
  QpProblem instantiate(const Vector6d& chi0, const Vector6d& x_ref) const;
};

/// `per_index` holds N + 1 weight sets; Q of indices 1..N-1, P of index N
/// and R of indices 0..N-1 enter the cost.
CondensedQp condense(const Prediction& pred, const std::vector<MpcWeights>& per_index, const MpcParams& params);

/// One-shot condensing for a discrete model.
QpProblem build_qp(const LinearModel& model, const std::vector<MpcWeights>& per_index, const Vector6d& chi0,
                   const MpcParams& params, const Vector6d& x_ref = Vector6d::Zero());

/// Tracking error (eta - eta_d, omega) with phi and psi wrapped to (-pi, pi].
Vector6d attitude_error(const VehicleState& state, const Eigen::Vector3d& eta_d);

struct ControlOutput {
  Eigen::Vector3d tau{Eigen::Vector3d::Zero()};
  int model{-1};
  double alpha0{0};
  int iterations{0};
  double kkt_residual{0};
  double constraint_violation{0};
  /// Set when the step failed and the previous torque was held.
  bool fallback{false};
};

/// Uniform plug-in interface for attitude controllers.
class AttitudeController {
 public:
  virtual ~AttitudeController() = default;
  virtual std::string name() const = 0;
  virtual void reset() = 0;
  virtual ControlOutput step(const VehicleState& state, const Eigen::Vector3d& eta_d, long k) = 0;
};

/**
 * @brief Multi-model MPC with soft switching between bank models.
 *
 * Each step selects the nearest bank model, condenses the QP on the active
 * model and solves it warm-started from the shifted previous solution.
 * Outside transitions the condensed Hessian of each model is cached.
 */
class MmpcController : public AttitudeController {
 public:
  using Selector = std::function<int(const VehicleState&, long)>;

  MmpcController(ModelBank bank, MpcParams params, std::vector<MpcWeights> per_model = {},
                 std::string name = "mmpc");

  std::string name() const override { return name_; }
  void reset() override;
  ControlOutput step(const VehicleState& state, const Eigen::Vector3d& eta_d, long k) override;

  const SwitchState& switch_state() const { return switch_; }
  const ModelBank& bank() const { return bank_; }
  /// Replaces nearest-model selection (used to force switches).
  void set_selector(Selector selector) { selector_ = std::move(selector); }
  /// Weights in force at horizon index i of step k.
  MpcWeights current_weights(long k, int i) const;

 private:
  ModelBank bank_;
  MpcParams params_;
  std::vector<MpcWeights> per_model_;
  std::string name_;
  std::vector<Prediction> predictions_;
  std::vector<CondensedQp> steady_;
  SwitchState switch_;
  Selector selector_;
  Eigen::VectorXd previous_u_;
  Eigen::Vector3d previous_tau_{Eigen::Vector3d::Zero()};
};

}  // namespace mmpc
