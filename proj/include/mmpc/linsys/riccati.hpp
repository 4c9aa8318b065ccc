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

namespace mmpc {

/**
 * @brief Stabilizing solution of A^T X + X A - X G X + Q = 0.
 *
 * G and Q must be symmetric; G may be indefinite (bounded-real and spectral
 * factorization Riccati equations use G <= 0). The solution is read off the
 * stable invariant subspace of the Hamiltonian [A -G; -Q -A^T], obtained
 * from an ordered complex Schur decomposition. On success A - G X is Hurwitz.
 *
 * Throws NumericError when the Hamiltonian has eigenvalues on (or numerically
 * indistinguishable from) the imaginary axis, or when the stable subspace is
 * not a graph.
 */
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_riccati(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& G,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Complex = std::complex<Scalar>;
  const Eigen::Index n = A.rows();
  if (A.cols() != n || G.rows() != n || G.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw std::invalid_argument("solve_riccati: dimension mismatch");
  }
  if (n == 0) return Matrix(0, 0);
  Matrix H(2 * n, 2 * n);
  H << A, -G, -Q, -A.transpose();
  // Roundoff moves eigenvalues by about eps * ||H||; a large G or Q alone
  // must not push well-separated eigenvalues of A onto the axis.
  const Scalar hnorm = H.cwiseAbs().rowwise().sum().maxCoeff();
  const Scalar anorm = A.cwiseAbs().rowwise().sum().maxCoeff();
  const Scalar axis_tol = Scalar(1e-9) * (Scalar(1) + anorm) +
                          Scalar(1e3) * std::numeric_limits<Scalar>::epsilon() * hnorm;
  Eigen::Index count = 0;
  auto form = ordered_schur<Scalar>(H, [](Complex z) { return z.real() < Scalar(0); }, count);
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    if (std::abs(form.T(k, k).real()) <= axis_tol) {
      throw NumericError("solve_riccati: Hamiltonian has eigenvalues on the imaginary axis");
    }
  }
  if (count != n) throw NumericError("solve_riccati: stable subspace has wrong dimension");
  const ComplexMatrix<Scalar> U11 = form.U.topLeftCorner(n, n);
  const ComplexMatrix<Scalar> U21 = form.U.bottomLeftCorner(n, n);
  Eigen::PartialPivLU<ComplexMatrix<Scalar>> lu(U11.adjoint());
  if (!(lu.rcond() > Scalar(1e-13))) {
    throw NumericError("solve_riccati: stable invariant subspace is not a graph subspace");
  }
  // X = U21 U11^{-1}  <=>  U11^H X^H = U21^H
  const ComplexMatrix<Scalar> Xh = lu.solve(U21.adjoint());
  Matrix X = Xh.adjoint().real();
  return Scalar(0.5) * (X + X.transpose());
}

/// A^T X + X A - X G X + Q residual, Frobenius norm.
template <typename Scalar>
Scalar riccati_residual(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& G,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& X) {
  return (A.transpose() * X + X * A - X * G * X + Q).norm();
}

/**
 * @brief Continuous algebraic Riccati equation
 *   A^T X + X A - X B R^{-1} B^T X + Q = 0.
 *
 * R must be symmetric positive definite and Q symmetric positive
 * semi-definite. Returns the unique stabilizing solution.
 */
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_care(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& B,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& R) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
    throw std::invalid_argument("solve_care: dimension mismatch");
  }
  const Scalar sym_tol = Scalar(1e-10);
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > sym_tol * (Scalar(1) + Q.cwiseAbs().maxCoeff()) ||
      (R - R.transpose()).cwiseAbs().maxCoeff() > sym_tol * (Scalar(1) + R.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("solve_care: Q and R must be symmetric");
  }
  Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("solve_care: R must be positive definite");
  const Matrix G = B * llt.solve(B.transpose());
  return solve_riccati<Scalar>(A, Scalar(0.5) * (G + G.transpose()), Q);
}

}  // namespace mmpc
