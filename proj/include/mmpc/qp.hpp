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

#include <memory>

#include <Eigen/Dense>

namespace mmpc {

/**
 * min 0.5 u^T H u + f^T u  s.t.  lb <= u <= ub,  G u <= h.
 *
 * The box is hard. Rows of G are softened with one nonnegative slack each
 * (G u - s <= h, cost rho * sum(s) + 0.5 * eps * |s|^2), so the problem is
 * always feasible; a nonzero slack is reported as a constraint violation.
 */
struct QpProblem {
  Eigen::MatrixXd H;
  Eigen::VectorXd f;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  /// Optional Cholesky factor of H shared by repeated solves on one Hessian.
  std::shared_ptr<const Eigen::LLT<Eigen::MatrixXd>> H_factor;

  Eigen::Index variables() const { return f.size(); }
  /// Dimension and ordering checks; throws std::invalid_argument.
  void validate() const;
  double objective(const Eigen::VectorXd& u) const { return 0.5 * u.dot(H * u) + f.dot(u); }
};

struct QpOptions {
  double tol{1e-9};
  int max_iterations{200};
  double slack_linear{1e6};
  double slack_quadratic{1.0};
};

enum class QpStatus { Optimal, IterationLimit };

struct QpSolution {
  Eigen::VectorXd u;
  QpStatus status{QpStatus::Optimal};
  int iterations{0};
  /// Infinity norm of stationarity, primal infeasibility, complementarity and
  /// dual infeasibility. Dual quantities are relative to 1 + max(|H u|, |f|)
  /// of the slack-augmented problem.
  double kkt_residual{0};
  /// Largest violation of a softened row (0 when G u <= h holds).
  double constraint_violation{0};
};

/**
 * @brief Primal active-set solver for small dense strictly convex QPs.
 *
 * Returns the unconstrained minimizer directly when it satisfies every
 * bound and row. Otherwise starts from `warm_start` (clipped into the box,
 * slacks chosen feasible) when its size matches, or from the box projection
 * of zero; the initial working set holds the bounds active at that point.
 */
QpSolution solve_qp(const QpProblem& qp, const QpOptions& options = {},
                    const Eigen::VectorXd* warm_start = nullptr);

}  // namespace mmpc
