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
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "mmpc/bank.hpp"
#include "mmpc/gap.hpp"
#include "oracles.hpp"

using Eigen::MatrixXd;
using mmpc::StateSpaced;
using mmpc::testing::first_order;

namespace {

StateSpaced attitude_model(double phi, double theta) {
  return mmpc::linearize_attitude({phi, theta}, mmpc::VehicleParams{}).to_state_space();
}

}  // namespace

TEST_CASE("gap of a system to itself vanishes") {
  CHECK(mmpc::directed_gap(first_order(1, 1), first_order(1, 1)) <= 1e-4);
  CHECK(mmpc::gap_metric(attitude_model(0.0, 0.0), attitude_model(0.0, 0.0)).value <= 1e-4);
  CHECK(mmpc::gap_metric(attitude_model(0.7, -0.4), attitude_model(0.7, -0.4)).value <= 1e-4);
}

TEST_CASE("first-order pair agrees with the nu-gap sweep") {
  const auto g1 = first_order(1, 1);
  const auto g2 = first_order(1, 2);
  const double tol = 1e-4;
  const auto v = mmpc::gap_metric(g1, g2, tol);
  CHECK(v.value > 0.0);
  CHECK(v.value < 1.0);
  CHECK(v.method == mmpc::GapMethod::TwoBlock);
  CHECK(std::abs(v.value - mmpc::testing::nu_gap_sweep(g1, g2)) <= 2 * tol);
  CHECK(std::abs(mmpc::directed_gap(g1, g2, tol) - mmpc::testing::nu_gap_sweep(g1, g2)) <= 2 * tol);
}

TEST_CASE("nu-gap is a lower bound") {
  for (double k : {0.5, 2.0, 4.0}) {
    for (double a : {0.5, 3.0}) {
      const auto g1 = first_order(1, 1);
      const auto g2 = first_order(k, a);
      CHECK(mmpc::gap_metric(g1, g2).value >= mmpc::testing::nu_gap_sweep(g1, g2) - 2e-4);
    }
  }
  // A pair where the inequality is strict.
  const double gap = mmpc::gap_metric(first_order(1, 1), first_order(4, 0.5)).value;
  CHECK(gap - mmpc::testing::nu_gap_sweep(first_order(1, 1), first_order(4, 0.5)) > 1e-3);
}

TEST_CASE("gap grows with the gain mismatch") {
  const auto g = first_order(1, 1);
  double previous = -1.0;
  double previous_oracle = -1.0;
  for (double k : {1.0, 2.0, 5.0, 10.0}) {
    const double d = mmpc::directed_gap(g, first_order(k, 1));
    const double oracle = mmpc::testing::nu_gap_sweep(g, first_order(k, 1));
    CHECK(oracle >= previous_oracle);
    CHECK(d >= previous - 1e-4);
    previous = d;
    previous_oracle = oracle;
  }
}

TEST_CASE("gap metric is symmetric and bounded") {
  const auto a = attitude_model(0.0, 0.0);
  const auto b = attitude_model(std::numbers::pi / 3, 0.0);
  const auto ab = mmpc::gap_metric(a, b);
  const auto ba = mmpc::gap_metric(b, a);
  CHECK(ab.value == ba.value);
  CHECK(ab.value > 0.0);
  CHECK(ab.value < 1.0);
  // Halving the tolerance moves the value by less than the original tolerance.
  const double tol = 1e-4;
  CHECK(std::abs(mmpc::gap_metric(a, b, tol / 2).value - mmpc::gap_metric(a, b, tol).value) < tol);
}

TEST_CASE("gap rejects mismatched systems") {
  const auto siso = first_order(1, 1);
  const auto hover = attitude_model(0.0, 0.0);
  CHECK_THROWS_AS(mmpc::directed_gap(siso, hover), std::invalid_argument);
  CHECK_THROWS_AS(mmpc::gap_metric(siso, mmpc::c2d(siso, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(mmpc::directed_gap(siso, siso, 0.0), std::invalid_argument);
}

TEST_CASE("gap matrix") {
  const auto g = first_order(1, 1);
  const auto single = mmpc::gap_matrix({g});
  CHECK(single.size() == 1);
  CHECK(single.entries(0, 0) == 0.0);

  const auto dup = mmpc::gap_matrix({g, g});
  CHECK(dup.entries.cwiseAbs().maxCoeff() <= 1e-4);

  std::vector<StateSpaced> models;
  for (double phi : {-0.9, -0.3, 0.3, 0.9}) models.push_back(attitude_model(phi, 0.2));
  const auto serial = mmpc::gap_matrix(models, 1e-4, 1);
  const auto parallel = mmpc::gap_matrix(models, 1e-4, 3);
  CHECK(serial.entries == parallel.entries);
  CHECK_NOTHROW(serial.validate());
  CHECK(serial.entries == serial.entries.transpose());
  CHECK(serial.max_off_diagonal() <= 1.0);

  std::stringstream ss;
  serial.write_csv(ss);
  const auto back = mmpc::GapMatrix::read_csv(ss);
  CHECK(back.entries == serial.entries);

  CHECK_THROWS(mmpc::gap_matrix({}));
  CHECK_THROWS(mmpc::gap_matrix({g, models[0]}));
}

TEST_CASE("gap matrix validation") {
  mmpc::GapMatrix m{MatrixXd::Zero(2, 2)};
  CHECK_NOTHROW(m.validate());
  m.entries(0, 1) = 0.3;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.entries(1, 0) = 0.3;
  CHECK_NOTHROW(m.validate());
  m.entries(0, 0) = 0.1;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m.entries(0, 0) = 0.0;
  m.entries(0, 1) = m.entries(1, 0) = 1.5;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("greedy bank reduction") {
  SUBCASE("identical models collapse onto the first") {
    const auto r = mmpc::reduce_bank({MatrixXd::Zero(4, 4)}, 0.2);
    CHECK(r.representatives == std::vector<int>{0});
    CHECK(r.assignment == std::vector<int>{0, 0, 0, 0});
  }
  SUBCASE("well separated models are all kept") {
    MatrixXd e = MatrixXd::Constant(3, 3, 0.5);
    e.diagonal().setZero();
    const auto r = mmpc::reduce_bank({e}, 0.2);
    CHECK(r.representatives == std::vector<int>{0, 1, 2});
    CHECK(r.assignment == std::vector<int>{0, 1, 2});
  }
  SUBCASE("ascending order, nearest representative, ties to the lower index") {
    MatrixXd e(5, 5);
    e << 0.0, 0.3, 0.1, 0.15, 0.15,
         0.3, 0.0, 0.25, 0.15, 0.05,
         0.1, 0.25, 0.0, 0.2, 0.3,
         0.15, 0.15, 0.2, 0.0, 0.3,
         0.15, 0.05, 0.3, 0.3, 0.0;
    const auto r = mmpc::reduce_bank({e}, 0.2);
    CHECK(r.representatives == std::vector<int>{0, 1});
    CHECK(r.assignment == std::vector<int>{0, 1, 0, 0, 1});
    // Every merged model is within the threshold of its representative.
    for (int i = 0; i < 5; ++i) CHECK(e(i, r.assignment[i]) < 0.2);
    // Re-running on the same matrix gives the same result.
    const auto again = mmpc::reduce_bank({e}, 0.2);
    CHECK(again.representatives == r.representatives);
    CHECK(again.assignment == r.assignment);
  }
  SUBCASE("threshold outside (0, 1) is rejected") {
    CHECK_THROWS(mmpc::reduce_bank({MatrixXd::Zero(2, 2)}, 0.0));
    CHECK_THROWS(mmpc::reduce_bank({MatrixXd::Zero(2, 2)}, 1.0));
  }
}
