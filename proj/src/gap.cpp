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
#include "mmpc/gap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

namespace mmpc {

namespace {

using Eigen::MatrixXd;

StateSpaced to_continuous(const StateSpaced& sys) {
  return sys.is_discrete() ? bilinear_to_continuous(sys) : sys;
}

// Hankel norm of an anti-stable system (A has all eigenvalues in Re > 0).
double antistable_hankel_norm(const MatrixXd& A, const MatrixXd& B, const MatrixXd& C) {
  if (A.rows() == 0) return 0.0;
  const MatrixXd negA = -A;
  const MatrixXd P = solve_lyapunov<double>(negA, B * B.transpose());
  const MatrixXd Q = solve_lyapunov<double>(negA.transpose(), C.transpose() * C);
  Eigen::SelfAdjointEigenSolver<MatrixXd> ep(P);
  const MatrixXd Ph = ep.eigenvectors() *
                      ep.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                      ep.eigenvectors().transpose();
  const MatrixXd M = Ph * Q * Ph;
  Eigen::SelfAdjointEigenSolver<MatrixXd> em(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, em.eigenvalues().maxCoeff()));
}

// Anti-stable part of to~ * from, separated once per directed pair so the
// exact cancellation in the self case is resolved before any scaling by 1/gamma.
struct AntistablePart {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
};

AntistablePart antistable_cross_term(const GraphSymbols& from, const GraphSymbols& to) {
  const StateSpaced& adj = to.graph_adjoint;
  const StateSpaced& g = from.graph;
  // T A_g - A_a T = B_a C_g decouples the block-triangular cascade.
  const MatrixXd T = solve_sylvester<double>(-adj.A, g.A, adj.B * g.C);
  return {adj.A, adj.B * g.D - T * g.B, adj.C};
}

// Is inf_Q || [R - Q; S] ||_inf < gamma, with R = G2~ G1 and S = G2c G1?
bool level_achievable(const AntistablePart& r, const StateSpaced& S, double gamma) {
  const Eigen::Index m = S.inputs();
  const MatrixXd I = MatrixXd::Identity(m, m);
  const MatrixXd Rw = gamma * gamma * I - S.D.transpose() * S.D;
  Eigen::LLT<MatrixXd> rllt(Rw);
  if (rllt.info() != Eigen::Success) return false;
  const MatrixXd Rwi = rllt.solve(I);
  const MatrixXd DtC = S.D.transpose() * S.C;

  // Spectral factor W~W = gamma^2 I - S~S from the bounded-real Riccati
  // equation; its stabilizing solution exists iff ||S|| < gamma.
  MatrixXd X;
  try {
    const MatrixXd Aa = S.A + S.B * Rwi * DtC;
    MatrixXd G = -S.B * Rwi * S.B.transpose();
    MatrixXd Q = S.C.transpose() * S.C + DtC.transpose() * Rwi * DtC;
    X = solve_riccati<double>(Aa, 0.5 * (G + G.transpose()), 0.5 * (Q + Q.transpose()));
  } catch (const NumericError&) {
    return false;
  }
  const MatrixXd F = Rwi * (S.B.transpose() * X + DtC);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Rw);
  const MatrixXd Rhi = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                       es.eigenvectors().transpose();
  // W^{-1} = [A + B F, B Rw^{-1/2}, F, Rw^{-1/2}] is stable, so only the
  // anti-stable part of R contributes to the anti-stable part of R W^{-1}.
  const MatrixXd Aw = S.A + S.B * F;
  const MatrixXd Bw = S.B * Rhi;
  MatrixXd T;
  try {
    T = solve_sylvester<double>(-r.A, Aw, r.B * F);
  } catch (const NumericError&) {
    return false;
  }
  return antistable_hankel_norm(r.A, r.B * Rhi - T * Bw, r.C) < 1.0;
}

}  // namespace

GraphSymbols::GraphSymbols(const StateSpaced& sys) {
  const StateSpaced c = to_continuous(sys);
  graph = normalized_coprime(c).graph();
  graph_adjoint = adjoint(graph);
  complement = normalized_left_coprime(c).complement();
  inputs = c.inputs();
  outputs = c.outputs();
}

double directed_gap(const GraphSymbols& from, const GraphSymbols& to, double tol,
                    double* frequency_at_sup) {
  if (!(tol > 0.0)) throw std::invalid_argument("directed_gap: tol must be positive");
  if (from.inputs != to.inputs || from.outputs != to.outputs) {
    throw std::invalid_argument("directed_gap: systems must have matching dimensions");
  }
  // The cascade realization is far from minimal (it vanishes identically
  // when the graphs coincide). Truncating Hankel singular values below
  // tol / 100 moves the result by at most 2 n tol / 100.
  const StateSpaced full = series(from.graph, to.complement);
  StateSpaced S = balanced_truncation(full, 1e-2 * tol);
  if (!is_stable(S)) S = full;
  const auto sn = hinf_norm_with_peak(S, 1e-3 * tol);
  if (frequency_at_sup) *frequency_at_sup = sn.peak_frequency;
  double lo = std::min(sn.norm * (1.0 + 1e-3 * tol), 1.0);
  if (lo >= 1.0 - 0.5 * tol) return 1.0;
  const AntistablePart r = antistable_cross_term(from, to);
  // Most pairs are decided by the second block alone.
  if (level_achievable(r, S, lo + 0.5 * tol)) return lo + 0.25 * tol;
  lo += 0.5 * tol;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (level_achievable(r, S, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double directed_gap(const StateSpaced& g1, const StateSpaced& g2, double tol) {
  if (g1.time_domain() != g2.time_domain() ||
      (g1.is_discrete() && g1.sample_period != g2.sample_period)) {
    throw std::invalid_argument("directed_gap: systems must share a time domain");
  }
  return directed_gap(GraphSymbols(g1), GraphSymbols(g2), tol);
}

GapValue gap_metric(const GraphSymbols& g1, const GraphSymbols& g2, double tol) {
  double w12 = 0.0;
  double w21 = 0.0;
  const double d12 = directed_gap(g1, g2, tol, &w12);
  const double d21 = directed_gap(g2, g1, tol, &w21);
  GapValue out;
  out.method = GapMethod::TwoBlock;
  out.value = std::clamp(std::max(d12, d21), 0.0, 1.0);
  out.frequency_at_sup = d12 >= d21 ? w12 : w21;
  return out;
}

GapValue gap_metric(const StateSpaced& g1, const StateSpaced& g2, double tol) {
  if (g1.time_domain() != g2.time_domain()) {
    throw std::invalid_argument("gap_metric: systems must share a time domain");
  }
  return gap_metric(GraphSymbols(g1), GraphSymbols(g2), tol);
}

GapMatrix gap_matrix(const std::vector<StateSpaced>& models, double tol, unsigned threads) {
  if (models.empty()) throw std::invalid_argument("gap_matrix: empty model list");
  const auto M = static_cast<Eigen::Index>(models.size());
  for (const auto& m : models) {
    if (m.inputs() != models[0].inputs() || m.outputs() != models[0].outputs() ||
        m.time_domain() != models[0].time_domain()) {
      throw std::invalid_argument("gap_matrix: models must be homogeneous");
    }
  }
  std::vector<GraphSymbols> symbols;
  symbols.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    try {
      symbols.emplace_back(models[i]);
    } catch (const std::exception& e) {
      throw NumericError("gap_matrix: model " + std::to_string(i) + ": " + e.what());
    }
  }

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = i + 1; j < M; ++j) pairs.emplace_back(i, j);
  }
  GapMatrix out{MatrixXd::Zero(M, M)};
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string error;
  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      const auto [i, j] = pairs[k];
      try {
        const double v = gap_metric(symbols[i], symbols[j], tol).value;
        out.entries(i, j) = v;
        out.entries(j, i) = v;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error.empty()) {
          error = "gap_matrix: pair (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what();
        }
        next = pairs.size();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, pairs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (!error.empty()) throw NumericError(error);
  return out;
}

double GapMatrix::max_off_diagonal() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    for (Eigen::Index j = 0; j < size(); ++j) {
      if (i != j) best = std::max(best, entries(i, j));
    }
  }
  return best;
}

void GapMatrix::validate() const {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw std::invalid_argument("GapMatrix: must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (entries(i, i) != 0.0) throw std::invalid_argument("GapMatrix: nonzero diagonal");
    for (Eigen::Index j = 0; j < size(); ++j) {
      const double v = entries(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("GapMatrix: entry outside [0, 1]");
      if (v != entries(j, i)) throw std::invalid_argument("GapMatrix: not symmetric");
    }
  }
}

void GapMatrix::write_csv(std::ostream& os) const {
  os << "model";
  for (Eigen::Index j = 0; j < size(); ++j) os << ',' << j;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < size(); ++i) {
    os << i;
    for (Eigen::Index j = 0; j < size(); ++j) os << ',' << entries(i, j);
    os << '\n';
  }
}

GapMatrix GapMatrix::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("GapMatrix::read_csv: missing header");
  const auto M = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  GapMatrix out{MatrixXd::Zero(M, M)};
  for (Eigen::Index i = 0; i < M; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("GapMatrix::read_csv: truncated");
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    for (Eigen::Index j = 0; j < M; ++j) {
      if (!std::getline(row, cell, ',')) throw std::invalid_argument("GapMatrix::read_csv: short row");
      out.entries(i, j) = std::stod(cell);
    }
  }
  return out;
}

BankReduction reduce_bank(const GapMatrix& matrix, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("reduce_bank: threshold must lie in (0, 1)");
  }
  BankReduction out;
  const auto M = matrix.size();
  out.assignment.assign(static_cast<std::size_t>(M), -1);
  for (Eigen::Index i = 0; i < M; ++i) {
    int nearest = -1;
    double nearest_gap = std::numeric_limits<double>::infinity();
    for (int r : out.representatives) {
      const double g = matrix.entries(i, r);
      if (g < nearest_gap) {  // strict: ties keep the lower representative index
        nearest_gap = g;
        nearest = r;
      }
    }
    if (nearest < 0 || nearest_gap >= threshold) {
      out.representatives.push_back(static_cast<int>(i));
      out.assignment[static_cast<std::size_t>(i)] = static_cast<int>(i);
    } else {
      out.assignment[static_cast<std::size_t>(i)] = nearest;
    }
  }
  return out;
}

}  // namespace mmpc
