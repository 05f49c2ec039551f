/*
 Copyright 2026 unpred contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Canned experiment presets and file emission (CSV/JSON) for the CLI.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "unpred/adversary.hpp"
#include "unpred/constrained.hpp"
#include "unpred/rollout.hpp"
#include "unpred/system.hpp"

namespace unpred {

enum class Preset {
  Custom,     // scenario supplied by the caller
  Fig1,       // benchmark, lambda1 in {5, 15}, lambda2 = 1, lambda3 = 0.5
  Fig2,       // benchmark, lambda3 in {0.2, 0.5, 1}, lambda1 = 5, lambda2 = 1
  Fig3Table1, // benchmark, lambda1 = lambda2 = 1, lambda3 in {0, 0.2, 0.5, 1};
              // KF attacker prediction-error table
  Fig4,       // constrained benchmark: N = 15, u_bar = 4, tau = 1,
              // lambda1 = 5, lambda2 = 1, lambda3 = 0.5
};

// One scalar parameter swept over values, e.g. {"lambda3", {0.2, 0.5, 1}}.
struct SweepSpec {
  std::string parameter;  // lambda1 | lambda2 | lambda3 | tau
  std::vector<double> values;
};

struct ExperimentConfig {
  Preset preset = Preset::Custom;
  std::optional<Scenario> scenario;  // required for Custom
  std::optional<SweepSpec> sweep;
  int runs = 200;
  std::uint64_t master_seed = 12345;
  BConvention b_convention = BConvention::Dt;
  double tau = 1.0;
  bool dump_policy = false;
  bool attack = false;  // force attacker pass for custom configs
  AttackerConfig attacker;
  std::string output_dir = ".";
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
Preset preset_from_name(const std::string& name);  // ParameterError on unknown

struct ExperimentManifest {
  std::vector<std::string> files;   // paths written, relative to output_dir
  nlohmann::json config_echo;
  nlohmann::json summary;           // headline numbers per sweep point
};

// Solve + rollout (+ attack where the preset calls for it) for every sweep
// point, write CSVs/JSON under config.output_dir, return the manifest (also
// written as manifest.json). Same config + seed => byte-identical files.
ExperimentManifest run_experiment(const ExperimentConfig& config);

// Schedule comparison: per-step max |dG|, |dM|, |dP| and sigma2 ratios.
struct PolicyDiff {
  double max_dG = 0.0;
  double max_dM = 0.0;
  double max_dP = 0.0;
  std::vector<double> dG_per_step;
  std::vector<double> dM_per_step;
  std::vector<double> dP_per_step;
  std::vector<Eigen::VectorXd> sigma2_ratio;  // b / a, elementwise (0/0 -> 1)

  // Steps whose max |dG|/|dM|/|dP| exceeds the threshold.
  std::vector<int> flagged_steps(double threshold) const;
  nlohmann::json to_json() const;
};

PolicyDiff diff_policies(const PolicySchedule& a, const PolicySchedule& b);

// CSV writers (column layouts documented in README).
void write_trajectories_csv(const std::string& path,
                            const std::vector<Trajectory>& trajectories);
void write_prediction_csv(const std::string& path,
                          const std::vector<PredictionReport>& reports);
nlohmann::json prediction_summary_json(const std::vector<PredictionReport>& reports,
                                       std::uint64_t master_seed, int runs);

}  // namespace unpred
