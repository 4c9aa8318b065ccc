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

#include "mmpc/linsys/riccati.hpp"
#include "mmpc/linsys/state_space.hpp"

namespace mmpc {

/// Normalized right coprime factors G = N D^{-1}; [D; N] is inner.
template <typename Scalar = double>
struct CoprimeFactors {
  StateSpace<Scalar> N;
  StateSpace<Scalar> D;

  /// Stacked graph symbol [D; N] (one shared state vector).
  StateSpace<Scalar> graph() const {
    using Matrix = typename StateSpace<Scalar>::Matrix;
    Matrix C(D.outputs() + N.outputs(), D.states());
    C << D.C, N.C;
    Matrix Dd(D.outputs() + N.outputs(), D.inputs());
    Dd << D.D, N.D;
    return StateSpace<Scalar>(D.A, D.B, C, Dd, D.sample_period);
  }
};

/// Normalized left coprime factors G = Dl^{-1} Nl; [-Nl, Dl] is co-inner.
template <typename Scalar = double>
struct LeftCoprimeFactors {
  StateSpace<Scalar> N;
  StateSpace<Scalar> D;

  /// Row symbol [-Nl, Dl]; it annihilates the right graph symbol of G.
  StateSpace<Scalar> complement() const {
    using Matrix = typename StateSpace<Scalar>::Matrix;
    Matrix B(D.states(), N.inputs() + D.inputs());
    B << -N.B, D.B;
    Matrix Dd(D.outputs(), N.inputs() + D.inputs());
    Dd << -N.D, D.D;
    return StateSpace<Scalar>(D.A, B, D.C, Dd, D.sample_period);
  }
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> spd_power(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& M, Scalar power) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(M);
  return es.eigenvectors() * es.eigenvalues().array().pow(power).matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace detail

/**
 * @brief Normalized right coprime factorization of a continuous system.
 *
 * With R = I + D^T D and X the stabilizing solution of the control Riccati
 * equation, F = -R^{-1}(B^T X + D^T C) and
 *   D(s) = [A+BF, B R^{-1/2}, F, R^{-1/2}],
 *   N(s) = [A+BF, B R^{-1/2}, C+DF, D R^{-1/2}].
 * Both factors are stable and D~D + N~N = I.
 */
template <typename Scalar>
CoprimeFactors<Scalar> normalized_coprime(const StateSpace<Scalar>& sys) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.is_discrete()) throw std::invalid_argument("normalized_coprime: continuous-time systems only");
  const auto m = sys.inputs();
  const auto p = sys.outputs();
  const Matrix R = Matrix::Identity(m, m) + sys.D.transpose() * sys.D;
  const Matrix Rt = Matrix::Identity(p, p) + sys.D * sys.D.transpose();
  const Matrix Ri = R.llt().solve(Matrix::Identity(m, m));
  const Matrix Rti = Rt.llt().solve(Matrix::Identity(p, p));
  const Matrix Ab = sys.A - sys.B * Ri * sys.D.transpose() * sys.C;
  Matrix G = sys.B * Ri * sys.B.transpose();
  Matrix Q = sys.C.transpose() * Rti * sys.C;
  const Matrix X = solve_riccati<Scalar>(Ab, Scalar(0.5) * (G + G.transpose()), Scalar(0.5) * (Q + Q.transpose()));
  const Matrix F = -Ri * (sys.B.transpose() * X + sys.D.transpose() * sys.C);
  const Matrix Rh = detail::spd_power<Scalar>(Ri, Scalar(0.5));
  const Matrix Af = sys.A + sys.B * F;
  const Matrix Bf = sys.B * Rh;
  CoprimeFactors<Scalar> out;
  out.D = StateSpace<Scalar>(Af, Bf, F, Rh);
  out.N = StateSpace<Scalar>(Af, Bf, sys.C + sys.D * F, sys.D * Rh);
  return out;
}

/**
 * @brief Normalized left coprime factorization (dual of the right one).
 *
 * L = -(Y C^T + B D^T) Rt^{-1} with Y the stabilizing filter Riccati solution;
 *   Dl(s) = [A+LC, L, Rt^{-1/2} C, Rt^{-1/2}],
 *   Nl(s) = [A+LC, B+LD, Rt^{-1/2} C, Rt^{-1/2} D].
 */
template <typename Scalar>
LeftCoprimeFactors<Scalar> normalized_left_coprime(const StateSpace<Scalar>& sys) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.is_discrete()) throw std::invalid_argument("normalized_left_coprime: continuous-time systems only");
  const auto m = sys.inputs();
  const auto p = sys.outputs();
  const Matrix R = Matrix::Identity(m, m) + sys.D.transpose() * sys.D;
  const Matrix Rt = Matrix::Identity(p, p) + sys.D * sys.D.transpose();
  const Matrix Ri = R.llt().solve(Matrix::Identity(m, m));
  const Matrix Rti = Rt.llt().solve(Matrix::Identity(p, p));
  const Matrix Ab = sys.A - sys.B * sys.D.transpose() * Rti * sys.C;
  Matrix G = sys.C.transpose() * Rti * sys.C;
  Matrix Q = sys.B * Ri * sys.B.transpose();
  const Matrix Y = solve_riccati<Scalar>(Ab.transpose(), Scalar(0.5) * (G + G.transpose()),
                                         Scalar(0.5) * (Q + Q.transpose()));
  const Matrix L = -(Y * sys.C.transpose() + sys.B * sys.D.transpose()) * Rti;
  const Matrix Rh = detail::spd_power<Scalar>(Rti, Scalar(0.5));
  const Matrix Al = sys.A + L * sys.C;
  LeftCoprimeFactors<Scalar> out;
  out.D = StateSpace<Scalar>(Al, L, Rh * sys.C, Rh);
  out.N = StateSpace<Scalar>(Al, sys.B + L * sys.D, Rh * sys.C, Rh * sys.D);
  return out;
}

}  // namespace mmpc
