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

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "mmpc/linsys/state_space.hpp"

namespace mmpc {

template <typename Scalar>
struct HinfResult {
  Scalar norm{0};
  /// Frequency (rad/s) at which the lower bound was attained.
  Scalar peak_frequency{0};
};

namespace detail {

// Imaginary-axis eigenvalue frequencies of the gamma-level Hamiltonian of a
// continuous system, sorted ascending (non-negative only).
template <typename Scalar>
std::vector<Scalar> level_crossings(const StateSpace<Scalar>& sys, Scalar gamma) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  const auto n = sys.states();
  const auto m = sys.inputs();
  const auto p = sys.outputs();
  const Matrix R = gamma * gamma * Matrix::Identity(m, m) - sys.D.transpose() * sys.D;
  const Matrix Ri = R.llt().solve(Matrix::Identity(m, m));
  const Matrix Aa = sys.A + sys.B * Ri * sys.D.transpose() * sys.C;
  Matrix H(2 * n, 2 * n);
  H << Aa, sys.B * Ri * sys.B.transpose(),
      -sys.C.transpose() * (Matrix::Identity(p, p) + sys.D * Ri * sys.D.transpose()) * sys.C,
      -Aa.transpose();
  Eigen::EigenSolver<Matrix> es(H, false);
  std::vector<Scalar> out;
  const auto ev = es.eigenvalues();
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const Scalar mag = std::abs(ev(k));
    if (std::abs(ev(k).real()) <= Scalar(1e-7) * (Scalar(1) + mag) && ev(k).imag() >= Scalar(0)) {
      out.push_back(ev(k).imag());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Scalar>
HinfResult<Scalar> hinf_continuous(const StateSpace<Scalar>& sys, Scalar tol) {
  using Matrix = typename StateSpace<Scalar>::Matrix;
  HinfResult<Scalar> best;
  auto sigma = [&](Scalar w) { return max_singular_value<Scalar>(evaluate_at(sys, std::complex<Scalar>(0, w))); };
  auto probe = [&](Scalar w) {
    const Scalar s = sigma(w);
    if (s > best.norm) {
      best.norm = s;
      best.peak_frequency = w;
    }
  };
  // Lower bound: feedthrough (w -> inf), DC, and the pole frequencies.
  {
    Eigen::JacobiSVD<Matrix> svd(sys.D);
    best.norm = sys.D.size() ? svd.singularValues()(0) : Scalar(0);
    best.peak_frequency = std::numeric_limits<Scalar>::infinity();
  }
  if (sys.states() == 0) return best;
  probe(Scalar(0));
  Eigen::EigenSolver<Matrix> es(sys.A, false);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) probe(std::abs(es.eigenvalues()(k)));
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) probe(std::abs(es.eigenvalues()(k).imag()));

  // Level-set iteration: a level just above the lower bound either has no
  // imaginary-axis crossings, which certifies the bound, or its crossing
  // intervals contain frequencies where the gain exceeds it.
  Scalar lo = best.norm;
  Scalar hi = Scalar(0);
  for (;;) {
    hi = lo > Scalar(0) ? lo * (Scalar(1) + Scalar(2) * tol) : Scalar(1e-100);
    const auto cross = level_crossings(sys, hi);
    if (cross.empty()) break;
    for (std::size_t k = 0; k + 1 < cross.size(); ++k) probe(Scalar(0.5) * (cross[k] + cross[k + 1]));
    for (Scalar w : cross) probe(w);
    lo = std::max(hi, best.norm);
  }
  best.norm = lo == Scalar(0) ? Scalar(0) : Scalar(0.5) * (lo + hi);
  return best;
}

}  // namespace detail

/**
 * @brief H-infinity norm of a stable system.
 *
 * The Hamiltonian built at level gamma has eigenvalues on the imaginary axis
 * iff gamma <= ||G||_inf. The lower bound is raised to the largest gain at
 * the midpoints of the crossing intervals until a level just above it has no
 * crossings. Discrete systems are mapped through the bilinear transform
 * first. The returned value satisfies |gamma - ||G||| <= tol * gamma.
 */
template <typename Scalar>
HinfResult<Scalar> hinf_norm_with_peak(const StateSpace<Scalar>& sys, Scalar tol = Scalar(1e-8)) {
  if (!(tol > Scalar(0))) throw std::invalid_argument("hinf_norm: tol must be positive");
  if (!is_stable(sys)) throw std::invalid_argument("hinf_norm: system is not stable");
  if (sys.is_discrete()) {
    auto r = detail::hinf_continuous(bilinear_to_continuous(sys), tol);
    // s = j tan(wT/2) on the imaginary axis.
    r.peak_frequency = Scalar(2) * std::atan(r.peak_frequency) / sys.sample_period;
    return r;
  }
  return detail::hinf_continuous(sys, tol);
}

template <typename Scalar>
Scalar hinf_norm(const StateSpace<Scalar>& sys, Scalar tol = Scalar(1e-8)) {
  return hinf_norm_with_peak(sys, tol).norm;
}

}  // namespace mmpc
