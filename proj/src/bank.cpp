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
#include "mmpc/bank.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "mmpc/linsys.hpp"

namespace mmpc {

using json = nlohmann::json;

void GridSpec::validate() const {
  if (n_phi < 1 || n_theta < 1) throw std::invalid_argument("GridSpec: counts must be >= 1");
  if (!(theta_max > 0.0 && theta_max < std::numbers::pi / 2)) {
    throw std::invalid_argument("GridSpec: theta_max must lie in (0, pi/2)");
  }
}

StateSpaced LinearModel::to_state_space() const {
  return StateSpaced(A, B, Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Zero(6, 3), sample_period);
}

std::vector<OperatingPoint> generate_grid(const GridSpec& spec) {
  spec.validate();
  constexpr double pi = std::numbers::pi;
  std::vector<OperatingPoint> out;
  out.reserve(static_cast<std::size_t>(spec.n_phi * spec.n_theta));
  for (int j = 0; j < spec.n_theta; ++j) {
    const double theta =
        spec.n_theta == 1 ? 0.0 : -spec.theta_max + 2.0 * spec.theta_max * j / (spec.n_theta - 1);
    for (int i = 0; i < spec.n_phi; ++i) {
      const double phi = -pi + (i + 0.5) * 2.0 * pi / spec.n_phi;
      out.push_back({phi, theta});
    }
  }
  return out;
}

Vector6d attitude_derivative(const Eigen::Vector3d& eta, const Eigen::Vector3d& omega,
                             const Eigen::Vector3d& tau, const VehicleParams& params) {
  Vector6d out;
  out.head<3>() = euler_kinematics_matrix(eta) * omega;
  const Eigen::Vector3d Jw = params.J.cwiseProduct(omega);
  out.tail<3>() = (-omega.cross(Jw) + tau).cwiseQuotient(params.J);
  return out;
}

AttitudeJacobian attitude_jacobian(const Eigen::Vector3d& eta, const Eigen::Vector3d& omega,
                                   const VehicleParams& params) {
  const Eigen::Matrix3d H = euler_kinematics_matrix(eta);
  const double cf = std::cos(eta(0)), sf = std::sin(eta(0));
  const double ct = std::cos(eta(1)), tt = std::tan(eta(1));
  Eigen::Matrix3d dH_dphi;
  dH_dphi << 0.0, cf * tt, -sf * tt,
             0.0, -sf, -cf,
             0.0, cf / ct, -sf / ct;
  Eigen::Matrix3d dH_dtheta;
  dH_dtheta << 0.0, sf / (ct * ct), cf / (ct * ct),
               0.0, 0.0, 0.0,
               0.0, sf * tt / ct, cf * tt / ct;
  auto skew = [](const Eigen::Vector3d& w) {
    Eigen::Matrix3d S;
    S << 0.0, -w(2), w(1), w(2), 0.0, -w(0), -w(1), w(0), 0.0;
    return S;
  };
  const Eigen::Vector3d Jinv = params.J.cwiseInverse();
  AttitudeJacobian out;
  out.A.setZero();
  out.A.block<3, 1>(0, 0) = dH_dphi * omega;
  out.A.block<3, 1>(0, 1) = dH_dtheta * omega;
  out.A.block<3, 3>(0, 3) = H;
  // d(-w x Jw) = [Jw]x dw - [w]x J dw
  out.A.block<3, 3>(3, 3) =
      Jinv.asDiagonal() * (skew(params.J.cwiseProduct(omega)) - skew(omega) * params.inertia());
  out.B.setZero();
  out.B.block<3, 3>(3, 0) = Jinv.asDiagonal();
  return out;
}

LinearModel linearize_attitude(const OperatingPoint& op, const VehicleParams& params) {
  const auto jac = attitude_jacobian(Eigen::Vector3d(op.phi, op.theta, 0.0), Eigen::Vector3d::Zero(), params);
  LinearModel out;
  out.op = op;
  out.A = jac.A;
  out.B = jac.B;
  return out;
}

LinearModel discretize(const LinearModel& model, double sample_period) {
  if (model.is_discrete()) throw std::invalid_argument("discretize: model is already discrete");
  const StateSpaced d = c2d(model.to_state_space(), sample_period, Discretization::ZeroOrderHold);
  LinearModel out;
  out.op = model.op;
  out.A = d.A;
  out.B = d.B;
  out.sample_period = sample_period;
  return out;
}

std::string params_hash(const VehicleParams& p) {
  char text[512];
  std::snprintf(text, sizeof text, "%.17g;%.17g;%.17g;%.17g;%.17g;%.17g;%.17g;%.17g", p.m, p.J(0),
                p.J(1), p.J(2), p.l, p.k_T, p.k_Q, p.g);
  std::uint64_t h = 1469598103934665603ull;
  for (const char* c = text; *c; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

ModelBank build_bank(const GridSpec& grid, const VehicleParams& params, double delta_th,
                     double sample_period, const BankOptions& options) {
  params.validate();
  if (!(sample_period > 0.0)) throw std::invalid_argument("build_bank: sample period must be positive");
  ModelBank bank;
  bank.params_hash = params_hash(params);
  bank.grid = grid;
  bank.grid_points = generate_grid(grid);
  bank.delta_th = delta_th;
  bank.sample_period = sample_period;

  std::vector<LinearModel> continuous;
  std::vector<StateSpaced> systems;
  for (const auto& op : bank.grid_points) {
    continuous.push_back(linearize_attitude(op, params));
    systems.push_back(continuous.back().to_state_space());
  }
  bank.gaps = gap_matrix(systems, options.gap_tol, options.threads);
  const BankReduction red = reduce_bank(bank.gaps, delta_th);

  std::vector<int> slot(bank.grid_points.size(), -1);
  for (int r : red.representatives) {
    slot[static_cast<std::size_t>(r)] = static_cast<int>(bank.models.size());
    bank.models.push_back(discretize(continuous[static_cast<std::size_t>(r)], sample_period));
    bank.representative_grid_index.push_back(r);
  }
  for (int rep : red.assignment) bank.assignment.push_back(slot[static_cast<std::size_t>(rep)]);
  bank.validate();
  return bank;
}

ModelBank hover_bank(const VehicleParams& params, double sample_period) {
  ModelBank bank;
  bank.params_hash = params_hash(params);
  bank.grid = GridSpec{1, 1, 1.3};
  bank.grid_points = generate_grid(bank.grid);
  bank.sample_period = sample_period;
  bank.models.push_back(discretize(linearize_attitude(bank.grid_points[0], params), sample_period));
  bank.representative_grid_index = {0};
  bank.assignment = {0};
  bank.gaps.entries = Eigen::MatrixXd::Zero(1, 1);
  return bank;
}

int select_model(const ModelBank& bank, double phi, double theta) {
  if (bank.models.empty()) throw std::invalid_argument("select_model: empty bank");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t k = 0; k < bank.grid_points.size(); ++k) {
    const double dphi = wrap_angle(phi - bank.grid_points[k].phi);
    const double dtheta = theta - bank.grid_points[k].theta;
    const double d2 = dphi * dphi + dtheta * dtheta;
    if (d2 < best) {
      best = d2;
      best_index = k;
    }
  }
  return bank.assignment[best_index];
}

void ModelBank::validate() const {
  if (models.empty()) throw std::invalid_argument("ModelBank: no models");
  if (assignment.size() != grid_points.size()) {
    throw std::invalid_argument("ModelBank: assignment does not cover the grid");
  }
  if (representative_grid_index.size() != models.size()) {
    throw std::invalid_argument("ModelBank: representative list does not match the models");
  }
  for (int a : assignment) {
    if (a < 0 || a >= static_cast<int>(models.size())) {
      throw std::invalid_argument("ModelBank: assignment index out of range");
    }
  }
  for (const auto& m : models) {
    if (m.sample_period != sample_period) throw std::invalid_argument("ModelBank: mixed sample periods");
  }
}

namespace {

template <typename Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (rows < 0) rows = static_cast<Eigen::Index>(j.size());
  if (cols < 0) cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  if (static_cast<Eigen::Index>(j.size()) != rows) throw std::invalid_argument("bank file: bad matrix shape");
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw std::invalid_argument("bank file: bad matrix shape");
    for (Eigen::Index c = 0; c < cols; ++c) M(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return M;
}

}  // namespace

void ModelBank::write_json(std::ostream& os) const {
  json j;
  j["format"] = "mmpc-model-bank";
  j["version"] = kFormatVersion;
  j["params_hash"] = params_hash;
  j["grid"] = {{"n_phi", grid.n_phi}, {"n_theta", grid.n_theta}, {"theta_max", grid.theta_max}};
  j["delta_th"] = delta_th;
  j["sample_period"] = sample_period;
  json points = json::array();
  for (const auto& p : grid_points) points.push_back({p.phi, p.theta});
  j["grid_points"] = points;
  json reps = json::array();
  for (std::size_t k = 0; k < models.size(); ++k) {
    reps.push_back({{"grid_index", representative_grid_index[k]},
                    {"phi", models[k].op.phi},
                    {"theta", models[k].op.theta},
                    {"A", matrix_to_json(models[k].A)},
                    {"B", matrix_to_json(models[k].B)}});
  }
  j["representatives"] = reps;
  j["assignment"] = assignment;
  j["gaps"] = matrix_to_json(gaps.entries);
  os << j.dump(1) << '\n';
}

ModelBank ModelBank::read_json(std::istream& is) {
  const json j = json::parse(is);
  if (j.value("format", "") != "mmpc-model-bank") throw std::invalid_argument("bank file: unknown format");
  if (j.at("version").get<int>() != kFormatVersion) throw std::invalid_argument("bank file: unsupported version");
  ModelBank bank;
  bank.params_hash = j.at("params_hash").get<std::string>();
  bank.grid.n_phi = j.at("grid").at("n_phi").get<int>();
  bank.grid.n_theta = j.at("grid").at("n_theta").get<int>();
  bank.grid.theta_max = j.at("grid").at("theta_max").get<double>();
  bank.delta_th = j.at("delta_th").get<double>();
  bank.sample_period = j.at("sample_period").get<double>();
  for (const auto& p : j.at("grid_points")) bank.grid_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  for (const auto& r : j.at("representatives")) {
    LinearModel m;
    m.op = {r.at("phi").get<double>(), r.at("theta").get<double>()};
    m.A = matrix_from_json(r.at("A"), 6, 6);
    m.B = matrix_from_json(r.at("B"), 6, 3);
    m.sample_period = bank.sample_period;
    bank.models.push_back(m);
    bank.representative_grid_index.push_back(r.at("grid_index").get<int>());
  }
  bank.assignment = j.at("assignment").get<std::vector<int>>();
  bank.gaps.entries = matrix_from_json(j.at("gaps"), -1, -1);
  bank.validate();
  return bank;
}

}  // namespace mmpc
