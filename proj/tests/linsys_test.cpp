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
#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "mmpc/bank.hpp"
#include "mmpc/linsys.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using mmpc::StateSpace;
using StateSpaced = StateSpace<double>;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

StateSpaced resonance(double zeta, double wn) {
  MatrixXd A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -wn * wn, -2 * zeta * wn;
  B << 0, 1;
  C << wn * wn, 0;
  return StateSpaced(A, B, C, MatrixXd::Zero(1, 1));
}

}  // namespace

TEST_CASE("state space rejects inconsistent dimensions") {
  CHECK_THROWS_AS(StateSpaced(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1), MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(StateSpaced(scalar(0), scalar(1), scalar(1), scalar(0), -0.1), std::invalid_argument);
}

TEST_CASE("frequency response") {
  const StateSpaced g(scalar(-1), scalar(1), scalar(1), scalar(0));
  const std::complex<double> expected = 1.0 / std::complex<double>(1.0, 1.0);
  CHECK(std::abs(mmpc::freq_response(g, 1.0)(0, 0) - expected) < 1e-14);
  CHECK(std::abs(std::abs(mmpc::freq_response(g, 1e-6)(0, 0)) - 1.0) < 1e-6);
  const auto gain = StateSpaced::static_gain(scalar(2));
  CHECK(mmpc::freq_response(gain, 3.7)(0, 0) == std::complex<double>(2.0, 0.0));

  const auto grid = mmpc::FrequencyGrid<double>::logspace();
  CHECK(grid.points.size() == 400);
  const auto sweep = mmpc::freq_response(g, grid);
  CHECK(sweep.size() == grid.points.size());

  // A pole on the imaginary axis is reported.
  const StateSpaced integrator(scalar(0), scalar(1), scalar(1), scalar(0));
  CHECK_THROWS_AS(mmpc::freq_response(integrator, 0.0), mmpc::NumericError);
}

TEST_CASE("continuous algebraic Riccati equation") {
  CHECK(mmpc::solve_care<double>(scalar(0), scalar(1), scalar(1), scalar(1))(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(mmpc::solve_care<double>(scalar(-1), scalar(1), scalar(0), scalar(1))(0, 0)) < 1e-12);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd A = MatrixXd::NullaryExpr(3, 3, [&] { return normal(rng); });
    const MatrixXd B = MatrixXd::NullaryExpr(3, 2, [&] { return normal(rng); });
    const MatrixXd L = MatrixXd::NullaryExpr(3, 3, [&] { return normal(rng); });
    const MatrixXd Q = L * L.transpose() + 0.1 * MatrixXd::Identity(3, 3);
    const MatrixXd R = MatrixXd::Identity(2, 2);
    const MatrixXd X = mmpc::solve_care<double>(A, B, Q, R);
    const MatrixXd G = B * B.transpose();
    CHECK(mmpc::riccati_residual<double>(A, G, Q, X) < 1e-8 * (1.0 + X.norm()));
    Eigen::EigenSolver<MatrixXd> es(A - G * X);
    CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
  }

  // No stabilizing solution: uncontrollable mode on the imaginary axis.
  CHECK_THROWS_AS(mmpc::solve_care<double>(scalar(0), scalar(0), scalar(1), scalar(1)), mmpc::NumericError);
  MatrixXd asym(2, 2);
  asym << 1, 2, 0, 1;
  CHECK_THROWS_AS(mmpc::solve_care<double>(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), asym, MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("H-infinity norm") {
  CHECK(mmpc::hinf_norm(StateSpaced::static_gain(scalar(2))) == doctest::Approx(2.0));
  const StateSpaced lag(scalar(-1), scalar(1), scalar(1), scalar(0));
  CHECK(mmpc::hinf_norm(lag, 1e-10) == doctest::Approx(1.0).epsilon(1e-9));

  const double zeta = 0.1;
  const double peak = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
  const auto res = mmpc::hinf_norm_with_peak(resonance(zeta, 1.0), 1e-8);
  CHECK(std::abs(res.norm - peak) < 1e-6);
  CHECK(res.peak_frequency == doctest::Approx(std::sqrt(1.0 - 2.0 * zeta * zeta)).epsilon(1e-3));

  // A grid sweep never exceeds the certified value.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto sys = mmpc::testing::random_stable(rng, 4, 2, 3);
    const double tol = 1e-6;
    const double norm = mmpc::hinf_norm(sys, tol);
    double sweep = 0.0;
    for (double w : mmpc::FrequencyGrid<double>::logspace(1e-3, 1e3, 2000).points) {
      sweep = std::max(sweep, mmpc::max_singular_value<double>(mmpc::freq_response(sys, w)));
    }
    CHECK(sweep <= norm * (1.0 + tol));
    CHECK(sweep >= 0.9 * norm);
  }

  const StateSpaced unstable(scalar(1), scalar(1), scalar(1), scalar(0));
  CHECK_THROWS_AS(mmpc::hinf_norm(unstable), std::invalid_argument);
}

TEST_CASE("discrete H-infinity norm matches the continuous one") {
  const StateSpaced lag(scalar(-1), scalar(1), scalar(1), scalar(0));
  const auto d = mmpc::c2d(lag, 0.01);
  // ZOH keeps the DC gain, which is the peak of a first-order lag.
  CHECK(mmpc::hinf_norm(d, 1e-9) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("normalized coprime factorization") {
  const StateSpaced lag(scalar(-1), scalar(1), scalar(1), scalar(0));
  const auto lag_graph = mmpc::normalized_coprime(lag).graph();
  for (double w : {0.01, 1.0, 100.0}) CHECK(mmpc::testing::graph_isometry_error(lag_graph, w) < 1e-6);

  const StateSpaced zero(scalar(-1), scalar(1), scalar(0), scalar(0));
  const auto zf = mmpc::normalized_coprime(zero);
  for (double w : {0.01, 1.0, 100.0}) {
    CHECK(std::abs(mmpc::freq_response(zf.N, w)(0, 0)) < 1e-12);
    CHECK(mmpc::testing::graph_isometry_error(zf.graph(), w) < 1e-6);
  }

  // Hover attitude model: N D^{-1} reproduces G, and the complement
  // annihilates the graph.
  const auto hover = mmpc::linearize_attitude({0.0, 0.0}, mmpc::VehicleParams{}).to_state_space();
  const auto f = mmpc::normalized_coprime(hover);
  const auto left = mmpc::normalized_left_coprime(hover);
  for (double w : mmpc::FrequencyGrid<double>::logspace().points) {
    const Eigen::MatrixXcd G = mmpc::freq_response(hover, w);
    const Eigen::MatrixXcd ND = mmpc::freq_response(f.N, w) * mmpc::freq_response(f.D, w).inverse();
    CHECK((G - ND).cwiseAbs().maxCoeff() < 1e-6 * (1.0 + G.cwiseAbs().maxCoeff()));
    CHECK(mmpc::testing::graph_isometry_error(f.graph(), w) < 1e-6);
    const Eigen::MatrixXcd annihilated = mmpc::freq_response(left.complement(), w) * mmpc::freq_response(f.graph(), w);
    CHECK(annihilated.cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(mmpc::is_stable(f.N));
  CHECK(mmpc::is_stable(f.D));
}

TEST_CASE("c2d") {
  const double ts = 0.004;
  const auto integ = mmpc::c2d(StateSpaced(MatrixXd::Zero(2, 2), MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                                           MatrixXd::Zero(2, 2)),
                               ts);
  CHECK(integ.A.isApprox(MatrixXd::Identity(2, 2)));
  CHECK(integ.B.isApprox(ts * MatrixXd::Identity(2, 2)));
  CHECK(integ.is_discrete());

  const StateSpaced lag(scalar(-1), scalar(1), scalar(1), scalar(0));
  const auto zoh = mmpc::c2d(lag, 0.1);
  CHECK(zoh.A(0, 0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
  CHECK(zoh.B(0, 0) == doctest::Approx(1.0 - std::exp(-0.1)).epsilon(1e-14));

  const auto z = mmpc::c2d(lag, 0.01);
  const auto e = mmpc::c2d(lag, 0.01, mmpc::Discretization::Euler);
  CHECK(std::abs(z.A(0, 0) - e.A(0, 0)) <= 0.01 * 0.01 / 2);
  CHECK(e.A(0, 0) == doctest::Approx(0.99));

  std::mt19937_64 rng(3);
  const auto d = mmpc::c2d(mmpc::testing::random_stable(rng, 5, 2, 2), 0.05);
  Eigen::EigenSolver<MatrixXd> es(d.A, false);
  CHECK(es.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  CHECK_THROWS_AS(mmpc::c2d(d, 0.05), std::invalid_argument);
}

TEST_CASE("Lyapunov and Sylvester equations") {
  std::mt19937_64 rng(8);
  const auto a = mmpc::testing::random_stable(rng, 4, 1, 1);
  const auto b = mmpc::testing::random_stable(rng, 3, 1, 1);
  std::normal_distribution<double> normal;
  const MatrixXd C = MatrixXd::NullaryExpr(4, 3, [&] { return normal(rng); });
  // solve_sylvester(A, B, C) solves A X + X B = C.
  const MatrixXd X = mmpc::solve_sylvester<double>(a.A, b.A, C);
  CHECK((a.A * X + X * b.A - C).norm() < 1e-9 * (1.0 + C.norm()));
  const MatrixXd Q = C * C.transpose();
  const MatrixXd P = mmpc::solve_lyapunov<double>(a.A, Q);
  CHECK((a.A * P + P * a.A.transpose() + Q).norm() < 1e-9 * (1.0 + Q.norm()));
}

TEST_CASE("balanced truncation removes unobservable states") {
  std::mt19937_64 rng(4);
  const auto g = mmpc::testing::random_stable(rng, 3, 1, 1);
  // Append a decoupled unobservable mode.
  MatrixXd A = MatrixXd::Zero(4, 4), B(4, 1), C = MatrixXd::Zero(1, 4);
  A.topLeftCorner(3, 3) = g.A;
  A(3, 3) = -2.0;
  B << g.B, 1.0;
  C.leftCols(3) = g.C;
  const StateSpaced padded(A, B, C, g.D);
  const auto reduced = mmpc::balanced_truncation(padded, 1e-10);
  CHECK(reduced.states() == 3);
  for (double w : {0.1, 1.0, 10.0}) {
    CHECK(std::abs(mmpc::freq_response(reduced, w)(0, 0) - mmpc::freq_response(g, w)(0, 0)) < 1e-8);
  }
}
