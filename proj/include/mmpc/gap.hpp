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

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "mmpc/linsys.hpp"

namespace mmpc {

using StateSpaced = StateSpace<double>;

inline constexpr double kDefaultGapTol = 1e-4;

enum class GapMethod { TwoBlock, NuGapSurrogate };

struct GapValue {
  double value{0};
  GapMethod method{GapMethod::TwoBlock};
  /// Frequency (rad/s) where the coprime-factor mismatch peaks; diagnostic only.
  double frequency_at_sup{0};
};

/// Symmetric, zero-diagonal matrix of pairwise gaps.
struct GapMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index size() const { return entries.rows(); }
  /// Largest off-diagonal entry (0 for a 1x1 matrix).
  double max_off_diagonal() const;
  /// Checks the matrix invariants; throws std::invalid_argument on failure.
  void validate() const;

  /// Row-major CSV with a header row of model indices.
  void write_csv(std::ostream& os) const;
  static GapMatrix read_csv(std::istream& is);
};

/**
 * @brief Factor data of one model reused by every directed gap it takes
 * part in: the right graph symbol [D; N], its para-Hermitian conjugate and
 * the left complement [-Nl, Dl].
 */
struct GraphSymbols {
  StateSpaced graph;
  StateSpaced graph_adjoint;
  StateSpaced complement;
  Eigen::Index inputs{0};
  Eigen::Index outputs{0};

  explicit GraphSymbols(const StateSpaced& sys);
};

/// Directed gap from `from` to `to`, within `tol`. Optionally reports the
/// frequency where the complement mismatch peaks.
double directed_gap(const GraphSymbols& from, const GraphSymbols& to, double tol = kDefaultGapTol,
                    double* frequency_at_sup = nullptr);

/**
 * @brief Directed gap inf_{Q in H-inf} || [D1; N1] - [D2; N2] Q ||_inf.
 *
 * Multiplying by the unitary [G2~; G2c] splits the objective into the
 * two-block problem || [G2~ G1 - Q; G2c G1] ||. gamma-bisection over
 * [||G2c G1||, 1]: a level is achievable iff, with the spectral factor
 * W~W = gamma^2 I - (G2c G1)~(G2c G1), the anti-stable part of G2~ G1 W^{-1}
 * has Hankel norm below one.
 */
double directed_gap(const StateSpaced& g1, const StateSpaced& g2, double tol = kDefaultGapTol);

/// max(directed_gap(g1, g2), directed_gap(g2, g1)).
GapValue gap_metric(const StateSpaced& g1, const StateSpaced& g2, double tol = kDefaultGapTol);
GapValue gap_metric(const GraphSymbols& g1, const GraphSymbols& g2, double tol = kDefaultGapTol);

/// Pairwise gap metric. `threads == 0` uses the hardware concurrency.
GapMatrix gap_matrix(const std::vector<StateSpaced>& models, double tol = kDefaultGapTol,
                     unsigned threads = 0);

struct BankReduction {
  /// Representative model indices, ascending.
  std::vector<int> representatives;
  /// For every model index, the model index of its representative.
  std::vector<int> assignment;
};

/**
 * Greedy first-come covering in ascending index order. Model i becomes a
 * representative iff its gap to every earlier representative is at least
 * `threshold`; otherwise it joins the nearest earlier representative (lower
 * index on ties).
 */
BankReduction reduce_bank(const GapMatrix& matrix, double threshold);

}  // namespace mmpc
