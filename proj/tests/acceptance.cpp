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
// Acceptance checks 1-9. Prints one PASS/FAIL line per check; exits nonzero
// when any selected check fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmpc/config.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

struct Outcome {
  bool pass{true};
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

struct Context {
  fs::path work;
  std::string cli;
  mmpc::Config config;

  const mmpc::ModelBank& bank() {
    if (!bank_) {
      bool built = false;
      bank_ = mmpc::load_or_build_bank(config, &built);
    }
    return *bank_;
  }

 private:
  std::optional<mmpc::ModelBank> bank_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string vec(const Vector3d& v) {
  std::ostringstream os;
  os << std::setprecision(4) << '(' << v(0) << ", " << v(1) << ", " << v(2) << ')';
  return os.str();
}

std::vector<mmpc::StateSpaced> grid_models(const mmpc::Config& config) {
  std::vector<mmpc::StateSpaced> out;
  for (const auto& op : mmpc::generate_grid(config.grid)) {
    out.push_back(mmpc::linearize_attitude(op, config.vehicle).to_state_space());
  }
  return out;
}

// 1: gap values, oracle agreement and matrix runtime.
void gap_suite(Context& ctx, Outcome& out) {
  using mmpc::testing::first_order;
  using mmpc::testing::second_order;
  std::vector<std::pair<mmpc::StateSpaced, mmpc::StateSpaced>> pairs;
  for (double k : {0.5, 2.0}) {
    for (double a : {0.5, 3.0}) pairs.emplace_back(first_order(1, 1), first_order(k, a));
  }
  pairs.emplace_back(first_order(1, 1), first_order(4, 3));
  pairs.emplace_back(first_order(1, 1), first_order(3, 1.5));
  pairs.emplace_back(first_order(2, 1), first_order(2, 1.2));
  pairs.emplace_back(first_order(10, 10), first_order(1, 0.1));
  pairs.emplace_back(first_order(0.2, 2), first_order(5, 2));
  pairs.emplace_back(first_order(1, 1), second_order(1, 0, 1, 1.4));
  pairs.emplace_back(second_order(1, 0, 1, 0.2), second_order(1, 0, 1, 0.4));
  pairs.emplace_back(second_order(4, 0, 4, 0.8), second_order(4, 0, 2.5, 0.8));
  pairs.emplace_back(second_order(2, 1, 4, 3), second_order(2, 1.5, 3, 3));
  pairs.emplace_back(second_order(1, 1, 2, 3), first_order(1, 1));
  pairs.emplace_back(second_order(9, 0, 9, 0.3), second_order(16, 0, 16, 0.3));
  pairs.emplace_back(second_order(1, 0, 1, 2), first_order(0.5, 0.5));
  pairs.emplace_back(second_order(3, 1, 3, 1), second_order(3, 2, 3, 1));
  pairs.emplace_back(first_order(1, 5), second_order(5, 0, 5, 6));
  pairs.emplace_back(second_order(0.5, 0, 0.25, 0.5), second_order(1, 0, 0.25, 0.5));
  pairs.emplace_back(second_order(10, 2, 10, 2), second_order(10, 1, 10, 2));
  double worst = 0.0;
  for (const auto& [a, b] : pairs) {
    const double twoblock = mmpc::gap_metric(a, b, 1e-5).value;
    worst = std::max(worst, std::abs(twoblock - mmpc::testing::nu_gap_sweep(a, b, 40001)));
  }
  out.require(pairs.size() == 20 && worst <= 2e-4, "two-block vs nu-gap sweep");
  // The nu-gap never exceeds the gap; here the inequality is strict.
  const double strict_gap = mmpc::gap_metric(first_order(1, 1), first_order(4, 0.5), 1e-5).value;
  const double strict_nu = mmpc::testing::nu_gap_sweep(first_order(1, 1), first_order(4, 0.5), 40001);
  out.require(strict_gap >= strict_nu - 2e-4, "nu-gap lower bound");

  const auto models = grid_models(ctx.config);
  const auto t0 = std::chrono::steady_clock::now();
  const auto gaps = mmpc::gap_matrix(models, ctx.config.gap_tol, 0);
  const double elapsed = seconds_since(t0);
  double self_worst = 0.0;
  for (const auto& m : models) self_worst = std::max(self_worst, mmpc::gap_metric(m, m).value);
  const auto& e = gaps.entries;
  const bool symmetric = e == e.transpose();
  const bool bounded = e.minCoeff() >= 0.0 && e.maxCoeff() <= 1.0;
  out.require(self_worst <= 1e-4, "self gap");
  out.require(symmetric, "symmetry");
  out.require(bounded, "range [0, 1]");
  out.require(elapsed < 60.0, "runtime");
  out.detail << "oracle max diff " << worst << " over " << pairs.size() << " pairs; 1/(s+1) vs 4/(s+0.5) gap "
             << strict_gap << " >= nu-gap " << strict_nu << "; max self gap " << self_worst
             << "; " << models.size() << "-model matrix in " << elapsed << " s, entries in [" << e.minCoeff() << ", "
             << e.maxCoeff() << "]";
}

// 2: reduced bank size band and covering.
void bank_reduction(Context& ctx, Outcome& out) {
  const auto& bank = ctx.bank();
  double worst = 0.0;
  for (std::size_t i = 0; i < bank.assignment.size(); ++i) {
    const int rep = bank.representative_grid_index[static_cast<std::size_t>(bank.assignment[i])];
    worst = std::max(worst, bank.gaps.entries(static_cast<Eigen::Index>(i), rep));
  }
  const int reduced = static_cast<int>(bank.size());
  out.require(worst < bank.delta_th, "covering");
  out.require(reduced >= 5 && reduced <= 25, "M' in [5, 25]");
  out.detail << "M = " << bank.grid_points.size() << ", M' = " << reduced << ", delta_th = " << bank.delta_th
             << ", worst member-to-representative gap " << worst;
}

// 3: analytic Jacobians against central differences.
void linearization(Context& ctx, Outcome& out) {
  double worst = 0.0;
  bool psi_zero = true;
  for (const auto& op : mmpc::generate_grid(ctx.config.grid)) {
    const Vector3d eta(op.phi, op.theta, 0.0);
    const auto fd = mmpc::testing::finite_difference_jacobian(eta, Vector3d::Zero(), ctx.config.vehicle);
    const auto lin = mmpc::linearize_attitude(op, ctx.config.vehicle);
    worst = std::max({worst, (lin.A - fd.A).cwiseAbs().maxCoeff(), (lin.B - fd.B).cwiseAbs().maxCoeff()});
    psi_zero = psi_zero && (lin.A.col(2).array() == 0.0).all();
  }
  out.require(worst < 1e-5, "finite differences");
  out.require(psi_zero, "psi column");
  out.detail << "max |analytic - FD| " << worst << " over " << ctx.config.grid.n_phi * ctx.config.grid.n_theta
             << " points; psi column exactly zero: " << (psi_zero ? "yes" : "no");
}

// 4: Riccati, H-infinity, coprime normalization and QP optimality.
void numerics(Context& ctx, Outcome& out) {
  double riccati = 0.0;
  double isometry = 0.0;
  const auto models = grid_models(ctx.config);
  for (const auto& g : models) {
    const MatrixXd Q = g.C.transpose() * g.C;
    const MatrixXd R = MatrixXd::Identity(g.inputs(), g.inputs()) + g.D.transpose() * g.D;
    const MatrixXd X = mmpc::solve_care<double>(g.A, g.B, Q, R);
    const MatrixXd G = g.B * R.llt().solve(g.B.transpose());
    riccati = std::max(riccati, mmpc::riccati_residual<double>(g.A, G, Q, X));
    const auto graph = mmpc::normalized_coprime(g).graph();
    for (int k = 0; k <= 60; ++k) {
      isometry = std::max(isometry, mmpc::testing::graph_isometry_error(graph, std::pow(10.0, -3.0 + 0.1 * k)));
    }
  }

  double hinf = 0.0;
  for (double zeta : {0.01, 0.05, 0.1, 0.3, 0.6}) {
    const auto g = mmpc::testing::second_order(1, 0, 1, 2 * zeta);
    hinf = std::max(hinf, std::abs(mmpc::hinf_norm(g) - 1.0 / (2 * zeta * std::sqrt(1 - zeta * zeta))));
  }

  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> width(0.1, 2.0);
  double kkt = 0.0;
  int not_optimal = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + trial % 28;
    const int rows = trial % 12;
    auto randn = [&](int r, int c) { return MatrixXd::NullaryExpr(r, c, [&] { return normal(rng); }); };
    mmpc::QpProblem qp;
    const MatrixXd L = randn(n, n);
    qp.H = L * L.transpose() + 1e-2 * MatrixXd::Identity(n, n);
    qp.f = 5.0 * randn(n, 1);
    const VectorXd center = 0.3 * randn(n, 1);
    qp.lb = center - VectorXd::NullaryExpr(n, [&] { return width(rng); });
    qp.ub = center + VectorXd::NullaryExpr(n, [&] { return width(rng); });
    qp.G = randn(rows, n);
    qp.h = qp.G * center + VectorXd::NullaryExpr(rows, [&] { return width(rng); });
    const auto sol = mmpc::solve_qp(qp);
    not_optimal += sol.status != mmpc::QpStatus::Optimal;
    kkt = std::max(kkt, sol.kkt_residual);
  }
  out.require(riccati < 1e-8, "Riccati residual");
  out.require(hinf < 1e-3, "H-infinity resonance");
  out.require(isometry < 1e-6, "coprime normalization");
  out.require(kkt < 1e-6 && not_optimal == 0, "QP KKT");
  out.detail << "Riccati residual " << riccati << "; resonance error " << hinf << "; graph isometry error "
             << isometry << "; QP max KKT " << kkt << " (" << not_optimal << " non-optimal of 1000)";
}

// Largest per-step torque change over steps [from, to].
double max_jump(const mmpc::SimTrace& trace, long from, long to) {
  double worst = 0.0;
  for (long k = std::max(1L, from); k <= to && k < static_cast<long>(trace.samples.size()); ++k) {
    const auto& s = trace.samples;
    worst = std::max(worst, (s[static_cast<std::size_t>(k)].tau - s[static_cast<std::size_t>(k - 1)].tau)
                                .cwiseAbs()
                                .maxCoeff());
  }
  return worst;
}

// 5: blending schedule properties and a forced closed-loop switch.
void soft_switching(Context& ctx, Outcome& out) {
  const int N = ctx.config.mpc.N;
  const long ks = 50;
  bool sums = true, monotone = true, abrupt = true;
  mmpc::MpcWeights one, zero;
  one.P = one.Q = mmpc::Matrix6d::Ones();
  one.R = Eigen::Matrix3d::Ones();
  zero.P = zero.Q = mmpc::Matrix6d::Zero();
  zero.R = Eigen::Matrix3d::Zero();
  for (double lambda : {0.0, 0.1, 0.5, 0.9, 1.0}) {
    for (long k = ks; k <= ks + N + 2; ++k) {
      for (int i = 0; i <= N; ++i) {
        const auto alpha = mmpc::blend_weights(one, zero, k, ks, i, lambda, N);
        const auto beta = mmpc::blend_weights(zero, one, k, ks, i, lambda, N);
        sums = sums && ((alpha.Q + beta.Q).array() == 1.0).all() && ((alpha.R + beta.R).array() == 1.0).all();
        const double a = mmpc::switch_alpha(k, ks, i, lambda, N);
        if (i > 0) monotone = monotone && a <= mmpc::switch_alpha(k, ks, i - 1, lambda, N);
        if (k > ks) monotone = monotone && a <= mmpc::switch_alpha(k - 1, ks, i, lambda, N);
        if (lambda == 0.0) {
          const double limit = (k == ks && i == 0) ? 1.0 : 0.0;
          abrupt = abrupt && a == limit && std::abs(a - mmpc::switch_alpha(k, ks, i, 1e-12, N)) < 1e-11;
        }
      }
    }
  }

  // Forced switch between two models with distinct weight sets, mid-manoeuvre,
  // once towards lighter and once towards heavier state weights.
  const auto& bank = ctx.bank();
  const int from = mmpc::select_model(bank, 0.3, 0.0);
  const int to = mmpc::select_model(bank, 0.9, 0.0);
  out.require(from != to, "distinct models");
  auto spec = ctx.config.scenario("attitude");
  spec.duration = 0.6;
  spec.schedule = {{0.0, Vector3d(20.0, 12.0, 30.0)}};
  out.detail << "forced switch model " << from << " -> " << to << " at k = " << ks << ", max torque step N m";
  for (double scale : {0.02, 50.0}) {
    std::vector<mmpc::MpcWeights> per_model(bank.size(), ctx.config.mpc.weights);
    per_model[static_cast<std::size_t>(to)].Q *= scale;
    per_model[static_cast<std::size_t>(to)].P *= scale;
    auto run = [&](double lambda) {
      mmpc::MpcParams params = ctx.config.mpc;
      params.lambda = lambda;
      mmpc::MmpcController ctrl(bank, params, per_model);
      ctrl.set_selector([&](const mmpc::VehicleState&, long k) { return k < ks ? from : to; });
      return mmpc::run_scenario(spec, ctrl, ctx.config.vehicle);
    };
    const auto soft = run(ctx.config.mpc.lambda);
    const auto hard = run(0.0);
    const double soft_jump = max_jump(soft, ks, ks + N + 1);
    const double hard_jump = max_jump(hard, ks, ks + N + 1);
    out.require(!soft.aborted && !hard.aborted, "closed-loop runs");
    out.require(soft_jump <= hard_jump + 1e-9, "torque jump");
    out.detail << "; Q, P x " << scale << ": " << soft_jump << " (lambda = " << ctx.config.mpc.lambda << ") vs "
               << hard_jump << " (lambda = 0)";
  }
  out.require(sums, "alpha + beta = 1");
  out.require(monotone, "monotone");
  out.require(abrupt, "lambda = 0 limit");
}

struct Run {
  mmpc::SimTrace trace;
  mmpc::MetricsReport metrics;
  double seconds{0};
};

Run run(const mmpc::ScenarioSpec& spec, mmpc::AttitudeController& ctrl, const mmpc::VehicleParams& vehicle) {
  Run r;
  const auto t0 = std::chrono::steady_clock::now();
  r.trace = mmpc::run_scenario(spec, ctrl, vehicle);
  r.seconds = seconds_since(t0);
  r.metrics = mmpc::compute_metrics(r.trace);
  return r;
}

// 6: attitude RMS ordering on the setpoint scenario.
void closed_loop_ordering(Context& ctx, Outcome& out) {
  const auto spec = ctx.config.scenario("attitude");
  std::vector<Run> runs;
  for (const std::string id : {"mmpc", "lmpc", "nmpc"}) {
    auto ctrl = mmpc::make_controller(id, ctx.config, ctx.bank());
    runs.push_back(run(spec, *ctrl, ctx.config.vehicle));
  }
  const auto& m = runs[0].metrics.rms_attitude_error;
  const auto& l = runs[1].metrics.rms_attitude_error;
  const auto& n = runs[2].metrics.rms_attitude_error;
  bool bounded = true;
  double slowest = 0.0;
  for (const auto& r : runs) {
    bounded = bounded && !r.trace.aborted && r.metrics.rms_torque.allFinite() && r.metrics.fallback_count == 0;
    for (const auto& s : r.trace.samples) {
      bounded = bounded && (s.tau.array() >= ctx.config.mpc.u_lower.array() - 1e-9).all() &&
                (s.tau.array() <= ctx.config.mpc.u_upper.array() + 1e-9).all();
    }
    slowest = std::max(slowest, r.seconds);
  }
  out.require((m.array() < l.array()).all(), "MMPC < LMPC");
  out.require((n.array() <= 1.2 * m.array()).all(), "NMPC <= 1.2 MMPC");
  out.require(bounded, "torque finite and within bounds");
  out.require(slowest < 30.0, "runtime");
  out.detail << "RMS deg MMPC " << vec(m) << ", LMPC " << vec(l) << ", NMPC " << vec(n) << "; slowest run "
             << slowest << " s";
}

// 7: median solve-time ratios.
void timing(Context& ctx, Outcome& out) {
  auto spec = ctx.config.scenario("attitude");
  spec.record_timing = true;
  std::vector<double> median;
  for (const std::string id : {"mmpc", "lmpc", "nmpc"}) {
    auto ctrl = mmpc::make_controller(id, ctx.config, ctx.bank());
    median.push_back(run(spec, *ctrl, ctx.config.vehicle).metrics.solve_time_us.median);
  }
  const long steps = spec.steps();
  out.require(steps >= 4000, "at least 4000 steps");
  out.require(median[0] <= 2.0 * median[1], "MMPC <= 2 LMPC");
  out.require(median[2] >= 2.0 * median[0], "NMPC >= 2 MMPC");
  out.detail << steps << " steps; median us MMPC " << median[0] << ", LMPC " << median[1] << ", NMPC " << median[2]
             << "; MMPC/LMPC " << median[0] / median[1] << ", NMPC/MMPC " << median[2] / median[0];
}

// 8: helix tracking with the position loop.
void trajectory(Context& ctx, Outcome& out) {
  const auto spec = ctx.config.scenario("trajectory");
  auto mmpc_ctrl = mmpc::make_controller("mmpc", ctx.config, ctx.bank());
  auto lmpc_ctrl = mmpc::make_controller("lmpc", ctx.config, ctx.bank());
  const auto m = run(spec, *mmpc_ctrl, ctx.config.vehicle);
  const auto l = run(spec, *lmpc_ctrl, ctx.config.vehicle);
  const bool ok = !m.trace.aborted && !l.trace.aborted && m.metrics.rms_position_error && l.metrics.rms_position_error;
  out.require(ok, "runs completed");
  if (!ok) return;
  const Vector3d pm = *m.metrics.rms_position_error;
  const Vector3d pl = *l.metrics.rms_position_error;
  const int worse = static_cast<int>((pl.array() >= pm.array()).count());
  out.require((pm.array() < 0.5).all(), "MMPC position RMS < 0.5 m");
  out.require(worse >= 2, "LMPC >= MMPC on two axes");
  out.detail << "position RMS m after 2 s: MMPC " << vec(pm) << ", LMPC " << vec(pl) << "; LMPC >= MMPC on "
             << worse << " axes";
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// 9: two CLI sessions in separate directories produce identical bytes.
void determinism(Context& ctx, Outcome& out) {
  if (ctx.cli.empty()) {
    out.require(false, "--cli not given");
    return;
  }
  const std::vector<std::string> commands{
      "bank build",
      "bank gaps",
      "simulate --scenario attitude --controller mmpc",
      "simulate --scenario trajectory --controller mmpc",
      "compare --scenario attitude --controller mmpc,lmpc,nmpc",
  };
  std::vector<fs::path> dirs{ctx.work / "det_a", ctx.work / "det_b"};
  for (const auto& d : dirs) {
    fs::remove_all(d);
    fs::create_directories(d);
    for (std::size_t c = 0; c < commands.size(); ++c) {
      const std::string cmd = "cd \"" + d.string() + "\" && \"" + ctx.cli + "\" --seed 3 --out out " + commands[c] +
                              " > stdout_" + std::to_string(c) + ".txt 2>&1";
      out.require(std::system(cmd.c_str()) == 0, "command '" + commands[c] + "'");
    }
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dirs[0])) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dirs[0]));
  }
  std::sort(files.begin(), files.end());
  std::size_t differing = 0;
  for (const auto& f : files) {
    if (!fs::exists(dirs[1] / f) || slurp(dirs[0] / f) != slurp(dirs[1] / f)) {
      ++differing;
      out.detail << " differs: " << f.string();
    }
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(dirs[1])) count_b += e.is_regular_file();
  out.require(differing == 0 && count_b == files.size(), "byte-identical outputs");
  out.detail << commands.size() << " commands, " << files.size() << " files compared (outputs and stdout), "
             << differing << " differ";
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Context&, Outcome&)> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  std::string work = "acceptance_work";
  std::string cli;
  bool prepare = false;
  app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--work", work, "Working directory for the bank cache and CLI runs");
  app.add_option("--cli", cli, "Path to the mmpc command-line tool");
  app.add_flag("--prepare", prepare, "Build the cached bank and exit");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.work = fs::absolute(work);
  ctx.cli = cli.empty() ? cli : fs::absolute(cli).string();
  ctx.config.output_dir = ctx.work.string();
  fs::create_directories(ctx.work);
  if (prepare) {
    std::cout << "bank: " << ctx.bank().size() << " models cached in " << ctx.config.bank_path() << '\n';
    return 0;
  }

  const std::vector<Criterion> criteria{
      {1, "gap metric suite", gap_suite},
      {2, "bank reduction", bank_reduction},
      {3, "linearization", linearization},
      {4, "numerics", numerics},
      {5, "soft switching", soft_switching},
      {6, "closed-loop ordering", closed_loop_ordering},
      {7, "solve-time ratios", timing},
      {8, "helix trajectory", trajectory},
      {9, "determinism", determinism},
  };
  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome out;
    try {
      c.check(ctx, out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.failures += std::string(" [exception: ") + e.what() + "]";
    }
    all = all && out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << ": " << out.detail.str()
              << out.failures << std::endl;
  }
  return all ? 0 : 1;
}
