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

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace mmpc {

/// Raised when a numerical routine cannot produce a result that honours its
/// contract (singular evaluation point, missing stabilizing solution, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TimeDomain { Continuous, Discrete };

/**
 * @brief Linear time-invariant system in state-space form.
 *
 * x' = A x + B u,  y = C x + D u. A positive sample period marks the
 * system as discrete-time (x' is then x[k+1]); zero means continuous.
 */
template <typename Scalar = double>
struct StateSpace {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix A;
  Matrix B;
  Matrix C;
  Matrix D;
  Scalar sample_period{0};

  StateSpace() = default;
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d, Scalar ts = Scalar(0))
      : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)), sample_period(ts) {
    validate();
  }

  /// Memoryless gain D with no states.
  static StateSpace static_gain(const Matrix& d, Scalar ts = Scalar(0)) {
    return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d, ts);
  }

  Eigen::Index states() const { return A.rows(); }
  Eigen::Index inputs() const { return D.cols(); }
  Eigen::Index outputs() const { return D.rows(); }

  TimeDomain time_domain() const {
    return sample_period > Scalar(0) ? TimeDomain::Discrete : TimeDomain::Continuous;
  }
  bool is_discrete() const { return time_domain() == TimeDomain::Discrete; }

  void validate() const {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || C.cols() != n || C.rows() != D.rows() ||
        B.cols() != D.cols()) {
      std::ostringstream os;
      os << "StateSpace: inconsistent dimensions A " << A.rows() << "x" << A.cols() << ", B "
         << B.rows() << "x" << B.cols() << ", C " << C.rows() << "x" << C.cols() << ", D "
         << D.rows() << "x" << D.cols();
      throw std::invalid_argument(os.str());
    }
    if (sample_period < Scalar(0) || !std::isfinite(static_cast<double>(sample_period))) {
      throw std::invalid_argument("StateSpace: sample period must be finite and >= 0");
    }
  }
};

/// Ordered set of strictly positive angular frequencies (rad/s).
template <typename Scalar = double>
struct FrequencyGrid {
  std::vector<Scalar> points;

  /// Log-spaced grid; the default covers [1e-2, 1e4] rad/s with 400 points.
  static FrequencyGrid logspace(Scalar lo = Scalar(1e-2), Scalar hi = Scalar(1e4), int count = 400) {
    if (!(lo > Scalar(0)) || !(hi > lo) || count < 1) {
      throw std::invalid_argument("FrequencyGrid::logspace: need 0 < lo < hi and count >= 1");
    }
    FrequencyGrid g;
    g.points.reserve(count);
    if (count == 1) {
      g.points.push_back(lo);
      return g;
    }
    const Scalar a = std::log10(lo);
    const Scalar b = std::log10(hi);
    for (int k = 0; k < count; ++k) {
      g.points.push_back(std::pow(Scalar(10), a + (b - a) * Scalar(k) / Scalar(count - 1)));
    }
    return g;
  }

  void validate() const {
    if (points.empty()) throw std::invalid_argument("FrequencyGrid: empty");
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (!(points[k] > Scalar(0))) throw std::invalid_argument("FrequencyGrid: non-positive frequency");
      if (k > 0 && !(points[k] > points[k - 1])) {
        throw std::invalid_argument("FrequencyGrid: frequencies must be strictly increasing");
      }
    }
  }
};

template <typename Scalar>
using ComplexMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// G(z) = C (zI - A)^{-1} B + D at a single complex point z.
template <typename Scalar>
ComplexMatrix<Scalar> evaluate_at(const StateSpace<Scalar>& sys, std::complex<Scalar> z) {
  using Complex = std::complex<Scalar>;
  ComplexMatrix<Scalar> G = sys.D.template cast<Complex>();
  const auto n = sys.states();
  if (n == 0) return G;
  ComplexMatrix<Scalar> M = -sys.A.template cast<Complex>();
  M.diagonal().array() += z;
  Eigen::PartialPivLU<ComplexMatrix<Scalar>> lu(M);
  // PartialPivLU has no rank report; use the reciprocal condition estimate.
  const Scalar rc = lu.rcond();
  if (!(rc > Scalar(64) * std::numeric_limits<Scalar>::epsilon())) {
    std::ostringstream os;
    os << "evaluate_at: (zI - A) singular at z = " << z;
    throw NumericError(os.str());
  }
  G.noalias() += sys.C.template cast<Complex>() * lu.solve(sys.B.template cast<Complex>());
  return G;
}

/// Evaluation point for angular frequency w: jw (continuous) or e^{jwT} (discrete).
template <typename Scalar>
std::complex<Scalar> contour_point(const StateSpace<Scalar>& sys, Scalar w) {
  if (sys.is_discrete()) return std::polar(Scalar(1), w * sys.sample_period);
  return {Scalar(0), w};
}

template <typename Scalar>
ComplexMatrix<Scalar> freq_response(const StateSpace<Scalar>& sys, Scalar w) {
  try {
    return evaluate_at(sys, contour_point(sys, w));
  } catch (const NumericError&) {
    std::ostringstream os;
    os << "freq_response: system has a pole on the evaluation contour at w = " << w << " rad/s";
    throw NumericError(os.str());
  }
}

template <typename Scalar>
std::vector<ComplexMatrix<Scalar>> freq_response(const StateSpace<Scalar>& sys,
                                                 const FrequencyGrid<Scalar>& grid) {
  grid.validate();
  std::vector<ComplexMatrix<Scalar>> out;
  out.reserve(grid.points.size());
  for (Scalar w : grid.points) out.push_back(freq_response(sys, w));
  return out;
}

/// Largest singular value of a complex matrix (0 for empty matrices).
template <typename Scalar>
Scalar max_singular_value(const ComplexMatrix<Scalar>& M) {
  if (M.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<ComplexMatrix<Scalar>> svd(M);
  return svd.singularValues()(0);
}

enum class Discretization { ZeroOrderHold, Euler };

template <typename Scalar>
StateSpace<Scalar> c2d(const StateSpace<Scalar>& sys, Scalar ts,
                       Discretization method = Discretization::ZeroOrderHold) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.is_discrete()) throw std::invalid_argument("c2d: system is already discrete");
  if (!(ts > Scalar(0))) throw std::invalid_argument("c2d: sample period must be positive");
  const auto n = sys.states();
  const auto m = sys.inputs();
  if (method == Discretization::Euler) {
    Matrix Ad = Matrix::Identity(n, n) + ts * sys.A;
    return StateSpace<Scalar>(Ad, ts * sys.B, sys.C, sys.D, ts);
  }
  Matrix M = Matrix::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = sys.A;
  M.topRightCorner(n, m) = sys.B;
  const Matrix E = (M * ts).exp();
  return StateSpace<Scalar>(E.topLeftCorner(n, n), E.topRightCorner(n, m), sys.C, sys.D, ts);
}

/// Cascade: returns `second * first` (first is applied to the input).
template <typename Scalar>
StateSpace<Scalar> series(const StateSpace<Scalar>& first, const StateSpace<Scalar>& second) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (first.outputs() != second.inputs()) throw std::invalid_argument("series: dimension mismatch");
  const auto n1 = first.states();
  const auto n2 = second.states();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = first.A;
  A.bottomLeftCorner(n2, n1) = second.B * first.C;
  A.bottomRightCorner(n2, n2) = second.A;
  Matrix B(n1 + n2, first.inputs());
  B << first.B, second.B * first.D;
  Matrix C(second.outputs(), n1 + n2);
  C << second.D * first.C, second.C;
  return StateSpace<Scalar>(A, B, C, second.D * first.D, first.sample_period);
}

/// Para-Hermitian conjugate G~(s) = G(-s)^T of a continuous system.
template <typename Scalar>
StateSpace<Scalar> adjoint(const StateSpace<Scalar>& sys) {
  if (sys.is_discrete()) throw std::invalid_argument("adjoint: continuous-time systems only");
  return StateSpace<Scalar>(-sys.A.transpose(), -sys.C.transpose(), sys.B.transpose(),
                            sys.D.transpose());
}

/// Inverse system for square, invertible D.
template <typename Scalar>
StateSpace<Scalar> inverse(const StateSpace<Scalar>& sys) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (sys.inputs() != sys.outputs()) throw std::invalid_argument("inverse: system must be square");
  Eigen::FullPivLU<Matrix> lu(sys.D);
  if (!lu.isInvertible()) throw NumericError("inverse: feedthrough matrix is singular");
  const Matrix Di = lu.inverse();
  return StateSpace<Scalar>(sys.A - sys.B * Di * sys.C, sys.B * Di, -Di * sys.C, Di,
                            sys.sample_period);
}

/// Stack two systems sharing an input: y = [top; bottom] u.
template <typename Scalar>
StateSpace<Scalar> stack_outputs(const StateSpace<Scalar>& top, const StateSpace<Scalar>& bottom) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (top.inputs() != bottom.inputs()) throw std::invalid_argument("stack_outputs: input mismatch");
  const auto n1 = top.states();
  const auto n2 = bottom.states();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = top.A;
  A.bottomRightCorner(n2, n2) = bottom.A;
  Matrix B(n1 + n2, top.inputs());
  B << top.B, bottom.B;
  Matrix C = Matrix::Zero(top.outputs() + bottom.outputs(), n1 + n2);
  C.topLeftCorner(top.outputs(), n1) = top.C;
  C.bottomRightCorner(bottom.outputs(), n2) = bottom.C;
  Matrix D(top.outputs() + bottom.outputs(), top.inputs());
  D << top.D, bottom.D;
  return StateSpace<Scalar>(A, B, C, D, top.sample_period);
}

/// Bilinear map of a discrete system onto an equivalent continuous one,
/// z = (1 + s) / (1 - s). The unit circle maps onto the imaginary axis so
/// H-infinity norms and graph distances carry over unchanged.
template <typename Scalar>
StateSpace<Scalar> bilinear_to_continuous(const StateSpace<Scalar>& sys) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  if (!sys.is_discrete()) throw std::invalid_argument("bilinear_to_continuous: system is continuous");
  const auto n = sys.states();
  if (n == 0) return StateSpace<Scalar>::static_gain(sys.D);
  const Matrix I = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(sys.A + I);
  if (!lu.isInvertible()) throw NumericError("bilinear_to_continuous: A has an eigenvalue at -1");
  const Scalar r2 = std::sqrt(Scalar(2));
  const Matrix Bt = lu.solve(sys.B);
  const Matrix Ct = lu.inverse().transpose() * sys.C.transpose();
  return StateSpace<Scalar>(lu.solve(sys.A - I), r2 * Bt, r2 * Ct.transpose(), sys.D - sys.C * Bt);
}

template <typename Scalar>
bool is_stable(const StateSpace<Scalar>& sys) {
  if (sys.states() == 0) return true;
  Eigen::EigenSolver<typename StateSpace<Scalar>::Matrix> es(sys.A, false);
  const auto ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (sys.is_discrete() ? !(std::abs(ev(k)) < Scalar(1)) : !(ev(k).real() < Scalar(0))) return false;
  }
  return true;
}

}  // namespace mmpc
