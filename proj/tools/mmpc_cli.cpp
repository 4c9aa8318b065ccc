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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmpc/config.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitNumeric = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<unsigned long long> seed;
  bool timing{false};
  std::string scenario;
  std::vector<std::string> controllers;
};

mmpc::Config load(const Options& opt) {
  mmpc::Config config = opt.config_path.empty() ? mmpc::Config{} : mmpc::load_config(opt.config_path);
  if (opt.out) config.output_dir = *opt.out;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.timing) config.record_timing = true;
  config.validate();
  return config;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

int cmd_bank_build(const Options& opt) {
  const mmpc::Config config = load(opt);
  bool built = false;
  const mmpc::ModelBank bank = mmpc::load_or_build_bank(config, &built);
  std::cout << "bank: " << config.bank_path() << (built ? " (built)" : " (cached)") << '\n'
            << "M = " << bank.grid_points.size() << '\n'
            << "M' = " << bank.size() << '\n'
            << "delta_th = " << bank.delta_th << '\n'
            << "representatives (model, grid index, phi deg, theta deg, members):\n";
  std::vector<int> members(bank.size(), 0);
  for (int a : bank.assignment) ++members[static_cast<std::size_t>(a)];
  std::cout << std::fixed << std::setprecision(2);
  for (std::size_t m = 0; m < bank.size(); ++m) {
    const auto& op = bank.models[m].op;
    std::cout << "  " << m << ' ' << bank.representative_grid_index[m] << ' ' << deg(op.phi) << ' '
              << deg(op.theta) << ' ' << members[m] << '\n';
  }
  return kExitOk;
}

int cmd_bank_gaps(const Options& opt) {
  const mmpc::Config config = load(opt);
  const mmpc::ModelBank bank = mmpc::load_or_build_bank(config);
  const fs::path path = fs::path(config.output_dir) / "gaps.csv";
  auto os = open_out(path);
  bank.gaps.write_csv(os);
  const Eigen::Index n = bank.gaps.size();
  double lo = n > 1 ? 1.0 : 0.0, hi = 0.0, sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double g = bank.gaps.entries(i, j);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      sum += g;
    }
  }
  const double mean = n > 1 ? sum / static_cast<double>(n * (n - 1)) : 0.0;
  std::cout << "gaps: " << path.string() << '\n'
            << "M = " << n << '\n'
            << "off-diagonal min = " << lo << ", max = " << hi << ", mean = " << mean << '\n';
  return kExitOk;
}

std::vector<std::unique_ptr<mmpc::AttitudeController>> controllers_for(const Options& opt,
                                                                       const mmpc::Config& config,
                                                                       const mmpc::ModelBank& bank) {
  std::vector<std::unique_ptr<mmpc::AttitudeController>> out;
  for (const auto& id : opt.controllers) out.push_back(mmpc::make_controller(id, config, bank));
  return out;
}

void check_ids(const Options& opt, const mmpc::Config& config, bool single) {
  const auto ids = config.scenario_ids();
  if (std::find(ids.begin(), ids.end(), opt.scenario) == ids.end()) {
    throw UsageError("unknown scenario '" + opt.scenario + "'");
  }
  if (opt.controllers.empty()) throw UsageError("no controller given");
  if (single && opt.controllers.size() != 1) throw UsageError("simulate takes exactly one controller");
  for (const auto& id : opt.controllers) {
    if (std::find(mmpc::kControllerIds.begin(), mmpc::kControllerIds.end(), id) == mmpc::kControllerIds.end()) {
      throw UsageError("unknown controller '" + id + "'");
    }
  }
}

int cmd_simulate(const Options& opt) {
  const mmpc::Config config = load(opt);
  check_ids(opt, config, true);
  const mmpc::ModelBank bank = mmpc::load_or_build_bank(config);
  auto controllers = controllers_for(opt, config, bank);
  const mmpc::ScenarioSpec spec = config.scenario(opt.scenario);
  const mmpc::SimTrace trace = mmpc::run_scenario(spec, *controllers.front(), config.vehicle);

  const std::string stem = opt.scenario + "_" + opt.controllers.front();
  const fs::path dir(config.output_dir);
  {
    auto os = open_out(dir / (stem + "_trace.csv"));
    trace.write_csv(os);
  }
  if (!trace.samples.empty()) {
    auto os = open_out(dir / (stem + "_metrics.json"));
    mmpc::compute_metrics(trace).write_json(os);
  }
  const auto plots = mmpc::write_plot_data(trace, (dir / "plots").string(), stem);
  std::cout << "trace: " << (dir / (stem + "_trace.csv")).string() << " (" << trace.samples.size() << " samples)\n";
  for (const auto& p : plots) std::cout << "plot data: " << p << '\n';
  if (trace.aborted) {
    std::cerr << "sim: run aborted, " << trace.abort_reason << '\n';
    return kExitNumeric;
  }
  return kExitOk;
}

int cmd_compare(const Options& opt) {
  const mmpc::Config config = load(opt);
  check_ids(opt, config, false);
  const mmpc::ModelBank bank = mmpc::load_or_build_bank(config);
  auto owned = controllers_for(opt, config, bank);
  std::vector<mmpc::AttitudeController*> controllers;
  for (auto& c : owned) controllers.push_back(c.get());
  const mmpc::Comparison cmp = mmpc::compare_controllers(config.scenario(opt.scenario), controllers, config.vehicle);

  const fs::path dir(config.output_dir);
  {
    auto os = open_out(dir / (opt.scenario + "_compare.txt"));
    cmp.write_table(os);
  }
  {
    auto os = open_out(dir / (opt.scenario + "_compare.json"));
    cmp.write_json(os);
  }
  cmp.write_table(std::cout);
  bool failed = false;
  for (const auto& row : cmp.rows) {
    if (row.failure) {
      std::cerr << "sim: " << row.metrics.controller << " failed, " << *row.failure << '\n';
      failed = true;
    }
  }
  return failed ? kExitNumeric : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-model predictive attitude control toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", opt.out, "Output directory (overrides output_dir)");
  app.add_option("--seed", opt.seed, "Random seed (overrides seed)");
  app.add_flag("--timing", opt.timing, "Record per-step solve times");

  auto* bank = app.add_subcommand("bank", "Model bank commands");
  bank->require_subcommand(1);
  auto* build = bank->add_subcommand("build", "Build and cache the reduced model bank");
  auto* gaps = bank->add_subcommand("gaps", "Write the gap matrix of the full grid");

  auto* simulate = app.add_subcommand("simulate", "Run one scenario with one controller");
  simulate->add_option("--scenario", opt.scenario, "Scenario id")->required();
  simulate->add_option("--controller", opt.controllers, "Controller id")->required()->delimiter(',');

  auto* compare = app.add_subcommand("compare", "Compare controllers on one scenario");
  compare->add_option("--scenario", opt.scenario, "Scenario id")->required();
  compare->add_option("--controller", opt.controllers, "Controller ids, comma separated")
      ->required()
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_bank_build(opt);
    if (gaps->parsed()) return cmd_bank_gaps(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (compare->parsed()) return cmd_compare(opt);
  } catch (const UsageError& e) {
    std::cerr << "cli: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mmpc::ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mmpc::NumericError& e) {
    std::cerr << "linsys: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
