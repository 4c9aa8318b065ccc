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

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmpc/bank.hpp"
#include "mmpc/dynamics.hpp"
#include "mmpc/gap.hpp"
#include "mmpc/mpc.hpp"
#include "mmpc/sim.hpp"

namespace mmpc {

/// Malformed or out-of-range configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/**
 * @brief Everything a command needs, read from one JSON file.
 *
 * Missing keys take the defaults below. Angles are in radians except keys
 * ending in _deg; infinite bounds are written as null. The MPC sample
 * period is also the control period of every scenario.
 */
struct Config {
  VehicleParams vehicle;
  GridSpec grid;
  double delta_th{0.2};
  double sample_period{0.004};
  double gap_tol{kDefaultGapTol};
  unsigned threads{0};
  MpcParams mpc;
  std::vector<ScenarioSpec> scenarios{ScenarioSpec::attitude_default(), ScenarioSpec::trajectory_default()};
  std::string output_dir{"out"};
  /// Bank cache path; relative paths are resolved against output_dir.
  std::string bank_file{"bank.json"};
  unsigned long long seed{0};
  bool record_timing{false};

  void validate() const;
  /// Scenario `id` with the global seed, timing flag and sample period applied.
  ScenarioSpec scenario(const std::string& id) const;
  std::vector<std::string> scenario_ids() const;
  std::string bank_path() const;
};

/// Throws ConfigError on syntax errors, unknown keys or invalid values.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& config);

/// Controller ids accepted by make_controller.
inline const std::vector<std::string> kControllerIds{"mmpc", "lmpc", "nmpc"};

/// Throws ConfigError for an unknown id.
std::unique_ptr<AttitudeController> make_controller(const std::string& id, const Config& config,
                                                    const ModelBank& bank);

/// True when the bank was built from this config's vehicle, grid, threshold
/// and sample period.
bool bank_matches(const ModelBank& bank, const Config& config);

/// Reads the cached bank at config.bank_path() when it matches, otherwise
/// builds it and writes the cache.
ModelBank load_or_build_bank(const Config& config, bool* built = nullptr);

}  // namespace mmpc
