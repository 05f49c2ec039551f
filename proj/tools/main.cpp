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

// unpred CLI: solve | rollout | attack | experiment.
//
// Exit codes: 0 ok, 2 invalid config/arguments, 3 solver/filter degeneracy,
// 4 over-constrained input bounds, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "unpred/adversary.hpp"
#include "unpred/constrained.hpp"
#include "unpred/dp.hpp"
#include "unpred/errors.hpp"
#include "unpred/experiments.hpp"
#include "unpred/io.hpp"
#include "unpred/rollout.hpp"
#include "unpred/system.hpp"

namespace {

using namespace unpred;

std::uint64_t effective_seed(std::uint64_t cli_seed) {
  // UNPRED_SEED always wins so batch harnesses can re-seed without touching
  // command lines or config files.
  if (const char* env = std::getenv("UNPRED_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw ParameterError("UNPRED_SEED is not a valid integer: " +
                           std::string(env));
    }
  }
  return cli_seed;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

int cmd_solve(const std::string& config_path, bool dump_policy,
              const std::string& out_dir) {
  const Scenario sc = load_scenario(config_path);
  const PolicySchedule schedule = backward_solve(sc);
  const auto [moments, cost] = propagate_moments(sc, schedule);

  std::cout << "horizon N = " << schedule.horizon()
            << ", value at x0 = " << format_double(value_function(schedule, sc.x0, 0))
            << "\n";
  std::cout << "expected cost: terminal = " << format_double(cost.terminal)
            << ", running = " << format_double(cost.running)
            << ", utility = " << format_double(cost.utility)
            << ", total = " << format_double(cost.total) << "\n";

  std::optional<ConstrainedPolicy> constrained;
  if (sc.input_bound) {
    constrained = enumerate_feasible(sc, schedule);
    std::cout << "constrained: feasible = "
              << (constrained->feasible ? "yes" : "no") << ", assignment = "
              << constrained->assignment.to_string() << "\n";
  }

  if (dump_policy) {
    std::filesystem::create_directories(out_dir);
    const std::string path = join_path(out_dir, "policy.json");
    write_json(constrained ? constrained_to_json(schedule, *constrained)
                           : schedule_to_json(schedule),
               path);
    std::cout << "wrote " << path << "\n";
  }
  return 0;
}

int cmd_rollout(const std::string& config_path, int runs, std::uint64_t seed,
                const std::string& mode, bool zero_noise,
                const std::string& out_dir) {
  const Scenario sc = load_scenario(config_path);
  const PolicySchedule schedule = backward_solve(sc);
  const RandomSource rng(seed);

  std::string effective_mode = mode;
  if (effective_mode.empty()) {
    effective_mode = sc.input_bound ? "online" : "unconstrained";
  }

  std::vector<Trajectory> trajs;
  if (effective_mode == "unconstrained") {
    trajs = rollout_batch(sc, schedule, rng, 0, runs, zero_noise);
  } else if (effective_mode == "online") {
    if (!sc.input_bound) throw ParameterError("online mode needs input_bound");
    const MeanBounds bounds =
        conservative_bounds(schedule, *sc.input_bound, sc.tau);
    trajs = rollout_batch_online(sc, schedule, bounds, rng, 0, runs,
                                 zero_noise);
  } else if (effective_mode == "offline") {
    if (!sc.input_bound) throw ParameterError("offline mode needs input_bound");
    const ConstrainedPolicy policy = enumerate_feasible(sc, schedule);
    trajs.reserve(runs);
    for (int r = 0; r < runs; ++r) {
      trajs.push_back(rollout(sc, policy, rng, r, zero_noise));
    }
  } else {
    throw ParameterError("mode must be unconstrained|offline|online");
  }

  std::filesystem::create_directories(out_dir);
  const std::string path = join_path(out_dir, "trajectories.csv");
  write_trajectories_csv(path, trajs);

  double realized = 0.0;
  for (const auto& tr : trajs) realized += trajectory_cost(sc, tr);
  realized /= static_cast<double>(runs);
  std::cout << "wrote " << path << " (" << runs << " runs, mode "
            << effective_mode << ", mean realized quadratic cost "
            << format_double(realized) << ")\n";
  return 0;
}

int cmd_attack(const std::string& config_path, int runs, std::uint64_t seed,
               const std::string& out_dir) {
  const Scenario sc = load_scenario(config_path);
  const PolicySchedule schedule = backward_solve(sc);
  const RandomSource rng(seed);
  const AttackerConfig attacker;  // defaults: noisy KF that knows the policy

  std::vector<Trajectory> trajs = rollout_batch(sc, schedule, rng, 0, runs);
  std::vector<PredictionReport> reports;
  reports.reserve(runs);
  for (int r = 0; r < runs; ++r) {
    reports.push_back(attack_run(trajs[r], sc.system, schedule.sigma2_seq,
                                 attacker, rng.attacker_stream(r)));
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv_path = join_path(out_dir, "predictions.csv");
  write_prediction_csv(csv_path, reports);
  const auto summary = prediction_summary_json(reports, seed, runs);
  const std::string json_path = join_path(out_dir, "attack_summary.json");
  write_json(summary, json_path);

  std::cout << "wrote " << csv_path << " and " << json_path
            << " (avg_error " << format_double(summary.at("avg_error").get<double>())
            << ", max_error " << format_double(summary.at("max_error").get<double>())
            << ")\n";
  return 0;
}

int cmd_experiment(const std::string& preset_name_arg,
                   const std::string& config_path, int runs,
                   std::uint64_t seed, bool seed_given,
                   const std::string& b_convention, double tau, bool tau_given,
                   bool runs_given, bool dump_policy,
                   const std::string& out_dir, bool out_given) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = experiment_config_from_json(read_json(config_path));
  }
  cfg.preset = preset_from_name(preset_name_arg);
  if (cfg.preset == Preset::Custom && !cfg.scenario) {
    throw ParameterError("preset custom needs --config with a scenario");
  }
  if (runs_given) cfg.runs = runs;
  if (seed_given) cfg.master_seed = seed;
  cfg.master_seed = effective_seed(cfg.master_seed);
  if (!b_convention.empty()) {
    cfg.b_convention =
        b_convention == "one" ? BConvention::One : BConvention::Dt;
  }
  if (tau_given) cfg.tau = tau;
  if (dump_policy) cfg.dump_policy = true;
  if (out_given || cfg.output_dir.empty()) cfg.output_dir = out_dir;

  const ExperimentManifest manifest = run_experiment(cfg);
  std::cout << "wrote " << manifest.files.size() << " files to "
            << cfg.output_dir << "\n";
  for (const auto& point : manifest.summary) {
    std::cout << "  " << point.at("label").get<std::string>()
              << ": expected total cost "
              << format_double(point.at("cost_total").get<double>());
    if (point.contains("prediction")) {
      std::cout << ", avg prediction error "
                << format_double(
                       point.at("prediction").at("avg_error").get<double>());
    }
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control with state unpredictability: DP solver, "
               "seeded rollouts, Kalman-filter adversary, experiment presets"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", mode, b_convention;
  std::uint64_t seed = 12345;
  int runs = 1;
  double tau = 1.0;
  bool dump_policy = false, zero_noise = false;

  CLI::App* solve = app.add_subcommand("solve", "solve a scenario");
  solve->add_option("--config", config_path, "scenario JSON")->required();
  solve->add_flag("--dump-policy", dump_policy, "write policy.json");
  solve->add_option("--out", out_dir, "output directory");

  CLI::App* roll = app.add_subcommand("rollout", "seeded closed-loop rollouts");
  roll->add_option("--config", config_path, "scenario JSON")->required();
  roll->add_option("--runs", runs, "number of rollouts");
  roll->add_option("--seed", seed, "master seed");
  roll->add_option("--mode", mode, "unconstrained|offline|online");
  roll->add_flag("--zero-noise", zero_noise, "suppress perturbations");
  roll->add_option("--out", out_dir, "output directory");

  CLI::App* atk = app.add_subcommand("attack", "Kalman-filter adversary");
  atk->add_option("--config", config_path, "scenario JSON")->required();
  atk->add_option("--runs", runs, "number of attacked rollouts")
      ->default_val(200);
  atk->add_option("--seed", seed, "master seed");
  atk->add_option("--out", out_dir, "output directory");

  std::string preset;
  CLI::App* exp = app.add_subcommand("experiment", "preset reproduction runs");
  exp->add_option("preset", preset, "fig1|fig2|fig3_table1|fig4|custom")
      ->required();
  exp->add_option("--config", config_path, "experiment config JSON");
  auto* exp_runs = exp->add_option("--runs", runs, "rollouts per sweep point");
  auto* exp_seed = exp->add_option("--seed", seed, "master seed");
  exp->add_option("--b-convention", b_convention, "dt|one")
      ->check(CLI::IsMember({"dt", "one"}));
  auto* exp_tau = exp->add_option("--tau", tau, "mean-budget fraction");
  exp->add_flag("--dump-policy", dump_policy, "write policy JSONs");
  auto* exp_out = exp->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) {
      return cmd_solve(config_path, dump_policy, out_dir);
    }
    if (roll->parsed()) {
      return cmd_rollout(config_path, runs, effective_seed(seed), mode,
                         zero_noise, out_dir);
    }
    if (atk->parsed()) {
      return cmd_attack(config_path, runs, effective_seed(seed), out_dir);
    }
    if (exp->parsed()) {
      return cmd_experiment(preset, config_path, runs, seed,
                            exp_seed->count() > 0, b_convention, tau,
                            exp_tau->count() > 0, exp_runs->count() > 0,
                            dump_policy, out_dir, exp_out->count() > 0);
    }
  } catch (const SolverDegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FilterDegeneracyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const OverConstrainedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const HorizonError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
