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

#include <complex>
#include <functional>

#include <Eigen/Dense>

#include "mmpc/linsys/state_space.hpp"

namespace mmpc {

/// Complex Schur form A = U T U^H with T upper triangular.
template <typename Scalar>
struct ComplexSchurForm {
  ComplexMatrix<Scalar> T;
  ComplexMatrix<Scalar> U;
};

namespace detail {

// Plane rotation [c s; -conj(s) c] with [c s; -conj(s) c] [f; g] = [r; 0].
template <typename Scalar>
void make_rotation(std::complex<Scalar> f, std::complex<Scalar> g, Scalar& c, std::complex<Scalar>& s) {
  const Scalar af = std::abs(f);
  const Scalar ag = std::abs(g);
  if (ag == Scalar(0)) {
    c = Scalar(1);
    s = Scalar(0);
    return;
  }
  if (af == Scalar(0)) {
    c = Scalar(0);
    s = std::conj(g) / ag;
    return;
  }
  const Scalar norm = std::hypot(af, ag);
  c = af / norm;
  s = (f / af) * std::conj(g) / norm;
}

// x <- c x + s y ; y <- c y - conj(s) x, applied elementwise.
template <typename Scalar, typename VecX, typename VecY>
void apply_rotation(VecX&& x, VecY&& y, Scalar c, std::complex<Scalar> s) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const std::complex<Scalar> xi = x(i);
    const std::complex<Scalar> yi = y(i);
    x(i) = c * xi + s * yi;
    y(i) = c * yi - std::conj(s) * xi;
  }
}

}  // namespace detail

/// Swap the adjacent diagonal entries k and k+1 of a triangular Schur factor
/// while keeping A = U T U^H.
template <typename Scalar>
void swap_schur_entries(ComplexSchurForm<Scalar>& f, Eigen::Index k) {
  auto& T = f.T;
  const Eigen::Index n = T.rows();
  const std::complex<Scalar> t11 = T(k, k);
  const std::complex<Scalar> t22 = T(k + 1, k + 1);
  Scalar c;
  std::complex<Scalar> s;
  detail::make_rotation(T(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) {
    detail::apply_rotation(T.row(k).tail(n - k - 2).transpose(), T.row(k + 1).tail(n - k - 2).transpose(),
                           c, s);
  }
  detail::apply_rotation(T.col(k).head(k), T.col(k + 1).head(k), c, std::conj(s));
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  detail::apply_rotation(f.U.col(k), f.U.col(k + 1), c, std::conj(s));
}

/// Complex Schur form with every eigenvalue satisfying `select` moved to the
/// leading block. Returns the number of selected eigenvalues via `count`.
template <typename Scalar, typename Derived>
ComplexSchurForm<Scalar> ordered_schur(const Eigen::MatrixBase<Derived>& A,
                                       const std::function<bool(std::complex<Scalar>)>& select,
                                       Eigen::Index& count) {
  using Complex = std::complex<Scalar>;
  Eigen::ComplexSchur<ComplexMatrix<Scalar>> cs(A.template cast<Complex>());
  if (cs.info() != Eigen::Success) throw NumericError("ordered_schur: Schur decomposition failed");
  ComplexSchurForm<Scalar> f{cs.matrixT(), cs.matrixU()};
  const Eigen::Index n = f.T.rows();
  count = 0;
  // Bubble every selected eigenvalue up to position `count`.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!select(f.T(j, j))) continue;
    for (Eigen::Index k = j; k > count; --k) swap_schur_entries(f, k - 1);
    ++count;
  }
  return f;
}

/// Solve A X + X B = C (Bartels-Stewart on complex Schur forms).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_sylvester(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& B,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& C) {
  using Complex = std::complex<Scalar>;
  using CMatrix = ComplexMatrix<Scalar>;
  const Eigen::Index m = A.rows();
  const Eigen::Index n = B.rows();
  if (A.cols() != m || B.cols() != n || C.rows() != m || C.cols() != n) {
    throw std::invalid_argument("solve_sylvester: dimension mismatch");
  }
  if (m == 0 || n == 0) return Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m, n);
  Eigen::ComplexSchur<CMatrix> sa(A.template cast<Complex>());
  Eigen::ComplexSchur<CMatrix> sb(B.template cast<Complex>());
  const CMatrix& Ta = sa.matrixT();
  const CMatrix& Tb = sb.matrixT();
  CMatrix F = sa.matrixU().adjoint() * C.template cast<Complex>() * sb.matrixU();
  CMatrix Y(m, n);
  const Scalar scale = Ta.cwiseAbs().maxCoeff() + Tb.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Matrix<Complex, Eigen::Dynamic, 1> rhs = F.col(j);
    if (j > 0) rhs.noalias() -= Y.leftCols(j) * Tb.col(j).head(j);
    CMatrix M = Ta;
    M.diagonal().array() += Tb(j, j);
    if ((M.diagonal().cwiseAbs().minCoeff()) <= Scalar(1e3) * std::numeric_limits<Scalar>::epsilon() * (scale + 1)) {
      throw NumericError("solve_sylvester: A and -B share an eigenvalue");
    }
    Y.col(j) = M.template triangularView<Eigen::Upper>().solve(rhs);
  }
  CMatrix X = sa.matrixU() * Y * sb.matrixU().adjoint();
  return X.real();
}

/// Solve A X + X A^T + Q = 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_lyapunov(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> X =
      solve_sylvester<Scalar>(A, A.transpose(), -Q);
  return Scalar(0.5) * (X + X.transpose());
}

}  // namespace mmpc
