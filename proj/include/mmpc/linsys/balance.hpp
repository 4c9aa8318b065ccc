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

#include <Eigen/Dense>

#include "mmpc/linsys/schur.hpp"
#include "mmpc/linsys/state_space.hpp"

namespace mmpc {

namespace detail {

// Square-root factor L with L L^T = M for a symmetric PSD M.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> psd_factor(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(M);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt().asDiagonal();
}

}  // namespace detail

/// Hankel singular values of a stable continuous system, descending.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> hankel_singular_values(const StateSpace<Scalar>& sys) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.states() == 0) return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(0);
  const Matrix P = solve_lyapunov<Scalar>(sys.A, sys.B * sys.B.transpose());
  const Matrix Q = solve_lyapunov<Scalar>(sys.A.transpose(), sys.C.transpose() * sys.C);
  Eigen::JacobiSVD<Matrix> svd(detail::psd_factor<Scalar>(Q).transpose() * detail::psd_factor<Scalar>(P));
  return svd.singularValues();
}

/**
 * @brief Square-root balanced truncation of a stable continuous system.
 *
 * Keeps the states whose Hankel singular value exceeds `hsv_tol`; the
 * H-infinity error is at most twice the sum of the discarded values. With a
 * tiny `hsv_tol` this computes a numerically minimal realization.
 */
template <typename Scalar>
StateSpace<Scalar> balanced_truncation(const StateSpace<Scalar>& sys, Scalar hsv_tol) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.is_discrete()) throw std::invalid_argument("balanced_truncation: continuous-time systems only");
  if (sys.states() == 0) return sys;
  const Matrix P = solve_lyapunov<Scalar>(sys.A, sys.B * sys.B.transpose());
  const Matrix Q = solve_lyapunov<Scalar>(sys.A.transpose(), sys.C.transpose() * sys.C);
  const Matrix Lp = detail::psd_factor<Scalar>(P);
  const Matrix Lq = detail::psd_factor<Scalar>(Q);
  Eigen::JacobiSVD<Matrix> svd(Lq.transpose() * Lp, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > hsv_tol) ++r;
  if (r == 0) return StateSpace<Scalar>::static_gain(sys.D, sys.sample_period);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> isq = s.head(r).cwiseSqrt().cwiseInverse();
  const Matrix T = Lp * svd.matrixV().leftCols(r) * isq.asDiagonal();
  const Matrix Ti = isq.asDiagonal() * svd.matrixU().leftCols(r).transpose() * Lq.transpose();
  return StateSpace<Scalar>(Ti * sys.A * T, Ti * sys.B, sys.C * T, sys.D, sys.sample_period);
}

}  // namespace mmpc
