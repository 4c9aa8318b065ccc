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
#include "mmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmpc {

void QpProblem::validate() const {
  const Eigen::Index n = f.size();
  if (H.rows() != n || H.cols() != n || lb.size() != n || ub.size() != n) {
    throw std::invalid_argument("QpProblem: inconsistent dimensions");
  }
  if (G.cols() != n && G.rows() > 0) throw std::invalid_argument("QpProblem: G has the wrong width");
  if (G.rows() != h.size()) throw std::invalid_argument("QpProblem: G and h disagree");
  if ((lb.array() > ub.array()).any()) throw std::invalid_argument("QpProblem: lb > ub");
}

namespace {

// Inequalities a_c^T z <= b_c over z = (u, s), enumerated as
//   [0, n)          u_j <= ub_j
//   [n, 2n)         -u_j <= -lb_j
//   [2n, 2n+m)      -s_k <= 0
//   [2n+m, 2n+2m)   G_k u - s_k <= h_k
class ConstraintSet {
 public:
  ConstraintSet(const QpProblem& qp) : qp_(qp), n_(qp.variables()), m_(qp.G.rows()) {}

  Eigen::Index count() const { return 2 * n_ + 2 * m_; }

  bool present(Eigen::Index c) const {
    if (c < n_) return std::isfinite(qp_.ub(c));
    if (c < 2 * n_) return std::isfinite(qp_.lb(c - n_));
    return true;
  }

  double b(Eigen::Index c) const {
    if (c < n_) return qp_.ub(c);
    if (c < 2 * n_) return -qp_.lb(c - n_);
    if (c < 2 * n_ + m_) return 0.0;
    return qp_.h(c - 2 * n_ - m_);
  }

  double dot(Eigen::Index c, const Eigen::VectorXd& z) const {
    if (c < n_) return z(c);
    if (c < 2 * n_) return -z(c - n_);
    if (c < 2 * n_ + m_) return -z(n_ + c - 2 * n_);
    const Eigen::Index k = c - 2 * n_ - m_;
    return qp_.G.row(k).dot(z.head(n_)) - z(n_ + k);
  }

  void write(Eigen::Index c, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) const {
    row.setZero();
    if (c < n_) {
      row(c) = 1.0;
    } else if (c < 2 * n_) {
      row(c - n_) = -1.0;
    } else if (c < 2 * n_ + m_) {
      row(n_ + c - 2 * n_) = -1.0;
    } else {
      const Eigen::Index k = c - 2 * n_ - m_;
      row.head(n_) = qp_.G.row(k);
      row(n_ + k) = -1.0;
    }
  }

 private:
  const QpProblem& qp_;
  Eigen::Index n_;
  Eigen::Index m_;
};

}  // namespace

QpSolution solve_qp(const QpProblem& qp, const QpOptions& options, const Eigen::VectorXd* warm_start) {
  qp.validate();
  const Eigen::Index n = qp.variables();
  const Eigen::Index m = qp.G.rows();
  const Eigen::Index nz = n + m;
  const ConstraintSet cons(qp);

  Eigen::MatrixXd Hz = Eigen::MatrixXd::Zero(nz, nz);
  Hz.topLeftCorner(n, n) = qp.H;
  Hz.bottomRightCorner(m, m).diagonal().setConstant(options.slack_quadratic);
  Eigen::VectorXd fz(nz);
  fz << qp.f, Eigen::VectorXd::Constant(m, options.slack_linear);

  QpSolution sol;
  Eigen::VectorXd z(nz);
  std::vector<Eigen::Index> working;
  Eigen::VectorXd lambda;
  bool done = false;
  int it = 0;

  Eigen::LLT<Eigen::MatrixXd> local;
  const Eigen::LLT<Eigen::MatrixXd>* factor = qp.H_factor.get();
  if (!factor) {
    local.compute(qp.H);
    factor = &local;
  }
  if (factor->info() == Eigen::Success) {
    const Eigen::VectorXd u = -factor->solve(qp.f);
    if ((u.array() <= qp.ub.array()).all() && (u.array() >= qp.lb.array()).all() &&
        (m == 0 || ((qp.G * u - qp.h).array() <= 0.0).all())) {
      // Only the slack bounds are active, each with multiplier rho.
      z << u, Eigen::VectorXd::Zero(m);
      for (Eigen::Index k = 0; k < m; ++k) working.push_back(2 * n + k);
      lambda = Eigen::VectorXd::Constant(m, options.slack_linear);
      done = true;
    }
  }

  if (!done) {
    if (warm_start && warm_start->size() == n) {
      z.head(n) = *warm_start;
    } else {
      z.head(n).setZero();
    }
    z.head(n) = z.head(n).cwiseMax(qp.lb).cwiseMin(qp.ub);
    if (m > 0) z.tail(m) = (qp.G * z.head(n) - qp.h).cwiseMax(0.0);

    for (Eigen::Index j = 0; j < n; ++j) {
      if (cons.present(j) && z(j) == qp.ub(j)) {
        working.push_back(j);
      } else if (cons.present(n + j) && z(j) == qp.lb(j)) {
        working.push_back(n + j);
      }
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      if (z(n + k) == 0.0) working.push_back(2 * n + k);
    }

    const double tol = options.tol;
    for (; it < options.max_iterations && !done; ++it) {
      const auto w = static_cast<Eigen::Index>(working.size());
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nz + w, nz + w);
      K.topLeftCorner(nz, nz) = Hz;
      for (Eigen::Index r = 0; r < w; ++r) {
        cons.write(working[static_cast<std::size_t>(r)], K.block(nz + r, 0, 1, nz));
        K.block(0, nz + r, nz, 1) = K.block(nz + r, 0, 1, nz).transpose();
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nz + w);
      rhs.head(nz) = -(Hz * z + fz);
      const Eigen::VectorXd sol_kkt = K.partialPivLu().solve(rhs);
      const Eigen::VectorXd p = sol_kkt.head(nz);
      lambda = sol_kkt.tail(w);

      if (p.lpNorm<Eigen::Infinity>() <= tol * (1.0 + z.lpNorm<Eigen::Infinity>())) {
        Eigen::Index worst = -1;
        double most_negative = -tol * (1.0 + rhs.head(nz).lpNorm<Eigen::Infinity>());
        for (Eigen::Index r = 0; r < w; ++r) {
          if (lambda(r) < most_negative) {
            most_negative = lambda(r);
            worst = r;
          }
        }
        if (worst < 0) {
          done = true;
        } else {
          working.erase(working.begin() + worst);
        }
        continue;
      }

      double alpha = 1.0;
      Eigen::Index blocking = -1;
      for (Eigen::Index c = 0; c < cons.count(); ++c) {
        if (!cons.present(c) || std::find(working.begin(), working.end(), c) != working.end()) continue;
        const double ap = cons.dot(c, p);
        if (ap <= 1e-14 * (1.0 + p.lpNorm<Eigen::Infinity>())) continue;
        const double step = std::max(0.0, (cons.b(c) - cons.dot(c, z)) / ap);
        if (step < alpha) {
          alpha = step;
          blocking = c;
        }
      }
      z += alpha * p;
      if (blocking >= 0) working.push_back(blocking);
    }
  }
  sol.iterations = it;
  sol.status = done ? QpStatus::Optimal : QpStatus::IterationLimit;
  sol.u = z.head(n);
  sol.constraint_violation = m > 0 ? z.tail(m).maxCoeff() : 0.0;
  sol.constraint_violation = std::max(sol.constraint_violation, 0.0);

  // KKT residual of the slack-augmented problem with the final multipliers.
  Eigen::VectorXd grad = Hz * z + fz;
  double complementarity = 0.0;
  double dual_infeasibility = 0.0;
  Eigen::RowVectorXd row(nz);
  for (std::size_t r = 0; r < working.size() && r < static_cast<std::size_t>(lambda.size()); ++r) {
    const Eigen::Index c = working[r];
    cons.write(c, row);
    grad += lambda(static_cast<Eigen::Index>(r)) * row.transpose();
    complementarity = std::max(complementarity,
                               std::abs(lambda(static_cast<Eigen::Index>(r)) * (cons.b(c) - cons.dot(c, z))));
    dual_infeasibility = std::max(dual_infeasibility, -lambda(static_cast<Eigen::Index>(r)));
  }
  double primal = 0.0;
  for (Eigen::Index c = 0; c < cons.count(); ++c) {
    if (cons.present(c)) primal = std::max(primal, cons.dot(c, z) - cons.b(c));
  }
  const double scale = 1.0 + std::max((Hz * z).lpNorm<Eigen::Infinity>(), fz.lpNorm<Eigen::Infinity>());
  sol.kkt_residual = std::max({grad.lpNorm<Eigen::Infinity>() / scale, primal, complementarity / scale,
                               dual_infeasibility / scale});
  return sol;
}

}  // namespace mmpc
