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

#include "unpred/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>

#include "unpred/errors.hpp"
#include "unpred/io.hpp"

namespace unpred {

using nlohmann::json;

namespace {

constexpr double kBenchX0 = 20.0;
constexpr double kBenchT = 10.0;
constexpr int kBenchN = 50;

struct SweepPoint {
  std::string label;
  Scenario scenario;
  bool attack = false;
  bool constrained = false;
};

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::Custom: return "custom";
    case Preset::Fig1: return "fig1";
    case Preset::Fig2: return "fig2";
    case Preset::Fig3Table1: return "fig3_table1";
    case Preset::Fig4: return "fig4";
  }
  return "?";
}

std::string trim_number(double v) {
  // Compact labels: 5 -> "5", 0.5 -> "0.5".
  std::string s = format_double(v);
  return s;
}

void apply_parameter(Scenario& sc, const std::string& parameter, double value) {
  if (parameter == "lambda1") {
    sc.cost.lambda1 = value;
  } else if (parameter == "lambda2") {
    sc.cost.lambda2 = value;
  } else if (parameter == "lambda3") {
    sc.cost.lambda3_seq.assign(sc.system.N, value);
  } else if (parameter == "tau") {
    sc.tau = value;
  } else {
    throw ParameterError("unknown sweep parameter \"" + parameter +
                         "\" (expected lambda1, lambda2, lambda3, or tau)");
  }
}

std::vector<SweepPoint> build_points(const ExperimentConfig& config) {
  std::vector<SweepPoint> points;
  const BConvention conv = config.b_convention;

  switch (config.preset) {
    case Preset::Fig1:
      for (double l1 : {5.0, 15.0}) {
        points.push_back({"lambda1=" + trim_number(l1),
                          scalar_benchmark(kBenchX0, kBenchT, kBenchN, l1, 1.0,
                                           0.5, conv),
                          false, false});
      }
      break;
    case Preset::Fig2:
      for (double l3 : {0.2, 0.5, 1.0}) {
        points.push_back({"lambda3=" + trim_number(l3),
                          scalar_benchmark(kBenchX0, kBenchT, kBenchN, 5.0, 1.0,
                                           l3, conv),
                          false, false});
      }
      break;
    case Preset::Fig3Table1:
      for (double l3 : {0.0, 0.2, 0.5, 1.0}) {
        points.push_back({"lambda3=" + trim_number(l3),
                          scalar_benchmark(kBenchX0, kBenchT, kBenchN, 1.0, 1.0,
                                           l3, conv),
                          true, false});
      }
      break;
    case Preset::Fig4: {
      Scenario base =
          scalar_benchmark(kBenchX0, kBenchT, 15, 5.0, 1.0, 0.5, conv);
      Scenario bounded = base;
      bounded.input_bound = Eigen::VectorXd::Constant(1, 4.0);
      bounded.tau = config.tau;
      points.push_back({"constrained", bounded, false, true});
      points.push_back({"unconstrained", base, false, false});
      break;
    }
    case Preset::Custom: {
      if (!config.scenario) {
        throw ParameterError("custom experiment needs a scenario");
      }
      const Scenario& base = *config.scenario;
      if (config.sweep) {
        for (double v : config.sweep->values) {
          SweepPoint pt{config.sweep->parameter + "=" + trim_number(v), base,
                        config.attack, false};
          apply_parameter(pt.scenario, config.sweep->parameter, v);
          pt.constrained = pt.scenario.input_bound.has_value();
          points.push_back(std::move(pt));
        }
      } else {
        points.push_back({"base", base, config.attack,
                          base.input_bound.has_value()});
      }
      break;
    }
  }
  if (points.empty()) throw ParameterError("experiment has no sweep points");
  return points;
}

// --- CSV plumbing -----------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw Error("cannot open " + path + " for writing");
  }
  void field(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
  }
  void field(double v) { field(format_double(v)); }
  void field(int v) { field(std::to_string(v)); }
  void empty() { field(std::string()); }
  void endrow() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

void expand_header(CsvWriter& csv, const std::string& base, int dim) {
  if (dim == 1) {
    csv.field(base);
  } else {
    for (int i = 0; i < dim; ++i) csv.field(base + std::to_string(i));
  }
}

}  // namespace

void write_trajectories_csv(const std::string& path,
                            const std::vector<Trajectory>& trajectories) {
  CsvWriter csv(path);
  if (trajectories.empty()) throw ParameterError("no trajectories to write");
  const int n = static_cast<int>(trajectories[0].states[0].size());
  const int q = static_cast<int>(trajectories[0].outputs[0].size());
  const int m = static_cast<int>(trajectories[0].inputs.empty()
                                     ? 0
                                     : trajectories[0].inputs[0].size());
  csv.field(std::string("run"));
  csv.field(std::string("k"));
  expand_header(csv, "x", n);
  expand_header(csv, "y", q);
  expand_header(csv, "mu", m);
  expand_header(csv, "delta", m);
  expand_header(csv, "u", m);
  csv.endrow();

  for (size_t run = 0; run < trajectories.size(); ++run) {
    const Trajectory& tr = trajectories[run];
    const int N = tr.horizon();
    for (int k = 0; k <= N; ++k) {
      csv.field(static_cast<int>(run));
      csv.field(k);
      for (int i = 0; i < n; ++i) csv.field(tr.states[k][i]);
      for (int i = 0; i < q; ++i) csv.field(tr.outputs[k][i]);
      if (k < N) {
        for (int i = 0; i < m; ++i) csv.field(tr.means[k][i]);
        for (int i = 0; i < m; ++i) csv.field(tr.perturbations[k][i]);
        for (int i = 0; i < m; ++i) csv.field(tr.inputs[k][i]);
      } else {
        for (int i = 0; i < 3 * m; ++i) csv.empty();
      }
      csv.endrow();
    }
  }
}

void write_prediction_csv(const std::string& path,
                          const std::vector<PredictionReport>& reports) {
  CsvWriter csv(path);
  const int q = reports.empty() || reports[0].records.empty()
                    ? 1
                    : static_cast<int>(reports[0].records[0].y_true.size());
  csv.field(std::string("run"));
  csv.field(std::string("k"));
  expand_header(csv, "y_true", q);
  expand_header(csv, "y_hat", q);
  csv.field(std::string("err"));
  csv.field(std::string("err_sq"));
  csv.endrow();
  for (size_t run = 0; run < reports.size(); ++run) {
    for (const PredictionRecord& rec : reports[run].records) {
      csv.field(static_cast<int>(run));
      csv.field(rec.k);
      for (int i = 0; i < q; ++i) csv.field(rec.y_true[i]);
      for (int i = 0; i < q; ++i) csv.field(rec.y_hat[i]);
      csv.field(rec.error);
      csv.field(rec.error_sq);
      csv.endrow();
    }
  }
}

json prediction_summary_json(const std::vector<PredictionReport>& reports,
                             std::uint64_t master_seed, int runs) {
  double avg = 0.0, mx = 0.0, sq = 0.0;
  for (const auto& r : reports) {
    avg += r.avg_error;
    mx += r.max_error;
    sq += r.avg_sq_error;
  }
  const double count = reports.empty() ? 1.0 : static_cast<double>(reports.size());
  return json{{"avg_error", avg / count},
              {"max_error", mx / count},
              {"avg_sq_error", sq / count},
              {"seeds", json{{"master_seed", master_seed},
                             {"runs", runs},
                             {"rollout_streams", "0..runs-1"},
                             {"attacker_streams", "run | 1<<62"}}}};
}

Preset preset_from_name(const std::string& name) {
  if (name == "custom") return Preset::Custom;
  if (name == "fig1") return Preset::Fig1;
  if (name == "fig2") return Preset::Fig2;
  if (name == "fig3_table1") return Preset::Fig3Table1;
  if (name == "fig4") return Preset::Fig4;
  throw ParameterError("unknown preset \"" + name +
                       "\" (expected fig1, fig2, fig3_table1, fig4, custom)");
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("preset")) {
    cfg.preset = preset_from_name(j.at("preset").get<std::string>());
  }
  if (j.contains("scenario")) {
    cfg.scenario = scenario_from_json(j.at("scenario"));
  }
  if (cfg.preset == Preset::Custom && !cfg.scenario) {
    throw ParameterError("custom experiment config needs a \"scenario\"");
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    SweepSpec spec;
    spec.parameter = s.value("parameter", "");
    if (!s.contains("values") || !s.at("values").is_array()) {
      throw ParameterError("sweep needs a \"values\" array");
    }
    for (const auto& v : s.at("values")) spec.values.push_back(v.get<double>());
    cfg.sweep = std::move(spec);
  }
  cfg.runs = j.value("runs", cfg.runs);
  if (cfg.runs <= 0) throw ParameterError("runs must be > 0");
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  if (j.contains("b_convention")) {
    const std::string c = j.at("b_convention").get<std::string>();
    if (c == "dt") {
      cfg.b_convention = BConvention::Dt;
    } else if (c == "one") {
      cfg.b_convention = BConvention::One;
    } else {
      throw ParameterError("b_convention must be \"dt\" or \"one\"");
    }
  }
  cfg.tau = j.value("tau", cfg.tau);
  cfg.dump_policy = j.value("dump_policy", cfg.dump_policy);
  cfg.attack = j.value("attack", cfg.attack);
  if (j.contains("attacker")) {
    const json& a = j.at("attacker");
    cfg.attacker.obs_noise_var =
        a.value("obs_noise_var", cfg.attacker.obs_noise_var);
    if (a.contains("process_noise")) {
      const std::string p = a.at("process_noise").get<std::string>();
      if (p == "zero") {
        cfg.attacker.process_noise = ProcessNoiseRule::Zero;
      } else if (p == "knows_sigma") {
        cfg.attacker.process_noise = ProcessNoiseRule::KnowsSigma;
      } else if (p == "fixed") {
        cfg.attacker.process_noise = ProcessNoiseRule::Fixed;
      } else {
        throw ParameterError("process_noise must be zero|knows_sigma|fixed");
      }
    }
    if (a.contains("fixed_process_cov")) {
      cfg.attacker.fixed_process_cov =
          matrix_from_json(a.at("fixed_process_cov"), "fixed_process_cov");
    }
    if (a.contains("input_rule")) {
      const std::string r = a.at("input_rule").get<std::string>();
      if (r == "knows_mean") {
        cfg.attacker.input_rule = InputRule::KnowsMean;
      } else if (r == "zero") {
        cfg.attacker.input_rule = InputRule::Zero;
      } else {
        throw ParameterError("input_rule must be knows_mean|zero");
      }
    }
    if (a.contains("init_mean")) {
      cfg.attacker.init_mean = vector_from_json(a.at("init_mean"), "init_mean");
    }
    if (a.contains("init_cov")) {
      cfg.attacker.init_cov = matrix_from_json(a.at("init_cov"), "init_cov");
    }
  }
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  return cfg;
}

namespace {

json config_echo(const ExperimentConfig& config) {
  json j{{"preset", preset_name(config.preset)},
         {"runs", config.runs},
         {"master_seed", config.master_seed},
         {"b_convention",
          config.b_convention == BConvention::Dt ? "dt" : "one"},
         {"tau", config.tau},
         {"dump_policy", config.dump_policy},
         {"attack", config.attack},
         {"output_dir", config.output_dir}};
  if (config.scenario) j["scenario"] = scenario_to_json(*config.scenario);
  if (config.sweep) {
    j["sweep"] = json{{"parameter", config.sweep->parameter},
                      {"values", config.sweep->values}};
  }
  json a{{"obs_noise_var", config.attacker.obs_noise_var}};
  switch (config.attacker.process_noise) {
    case ProcessNoiseRule::Zero: a["process_noise"] = "zero"; break;
    case ProcessNoiseRule::KnowsSigma: a["process_noise"] = "knows_sigma"; break;
    case ProcessNoiseRule::Fixed: a["process_noise"] = "fixed"; break;
  }
  a["input_rule"] = config.attacker.input_rule == InputRule::KnowsMean
                        ? "knows_mean"
                        : "zero";
  if (config.attacker.init_mean) {
    a["init_mean"] = vector_to_json(*config.attacker.init_mean);
  }
  if (config.attacker.init_cov) {
    a["init_cov"] = matrix_to_json(*config.attacker.init_cov);
  }
  if (config.attacker.fixed_process_cov) {
    a["fixed_process_cov"] = matrix_to_json(*config.attacker.fixed_process_cov);
  }
  j["attacker"] = std::move(a);
  return j;
}

void write_summary_csv(const std::string& path, const Scenario& scenario,
                       const PolicySchedule& schedule,
                       const std::vector<MomentState>& moments,
                       const CostBreakdown& cost,
                       const std::vector<Eigen::VectorXd>& mu_means,
                       const std::vector<PredictionReport>& reports) {
  CsvWriter csv(path);
  csv.field(std::string("series"));
  csv.field(std::string("k"));
  csv.field(std::string("value"));
  csv.endrow();

  const int n = scenario.system.n;
  const int m = scenario.system.m;
  const int N = scenario.system.N;
  auto series = [&csv](const std::string& name, int k, double v) {
    csv.field(name);
    csv.field(k);
    csv.field(v);
    csv.endrow();
  };

  for (int k = 0; k <= N; ++k) {
    for (int i = 0; i < n; ++i) {
      series("mean_x" + std::to_string(i), k, moments[k].mean[i]);
    }
    for (int i = 0; i < n; ++i) {
      series("var_x" + std::to_string(i), k, moments[k].cov(i, i));
    }
  }
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < m; ++i) {
      series("sigma2_" + std::to_string(i), k, schedule.sigma2_seq[k][i]);
      series("mu_mean_" + std::to_string(i), k, mu_means[k][i]);
    }
  }

  auto scalar_row = [&csv](const std::string& name, double v) {
    csv.field(name);
    csv.empty();
    csv.field(v);
    csv.endrow();
  };
  scalar_row("cost_terminal", cost.terminal);
  scalar_row("cost_running", cost.running);
  scalar_row("cost_utility", cost.utility);
  scalar_row("cost_total", cost.total);

  if (!reports.empty()) {
    double avg = 0.0, mx = 0.0, sq = 0.0;
    for (const auto& r : reports) {
      avg += r.avg_error;
      mx += r.max_error;
      sq += r.avg_sq_error;
    }
    const double c = static_cast<double>(reports.size());
    scalar_row("pred_avg_error", avg / c);
    scalar_row("pred_max_error", mx / c);
    scalar_row("pred_avg_sq_error", sq / c);
  }
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return 0.0;
  const double idx = p * (static_cast<double>(v.size()) - 1.0);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double w = idx - static_cast<double>(lo);
  return v[lo] * (1.0 - w) + v[hi] * w;
}

}  // namespace

ExperimentManifest run_experiment(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const std::vector<SweepPoint> points = build_points(config);
  fs::create_directories(config.output_dir);

  ExperimentManifest manifest;
  manifest.config_echo = config_echo(config);
  manifest.summary = json::array();
  const RandomSource rng(config.master_seed);

  auto out_path = [&config](const std::string& name) {
    return (fs::path(config.output_dir) / name).string();
  };

  // fig3_table1 cross-point table: lambda3, run, avg, max.
  const bool table_mode = config.preset == Preset::Fig3Table1;
  std::unique_ptr<CsvWriter> table_csv;
  if (table_mode) {
    table_csv = std::make_unique<CsvWriter>(out_path("table_prediction_errors.csv"));
    table_csv->field(std::string("lambda3"));
    table_csv->field(std::string("run"));
    table_csv->field(std::string("avg_error"));
    table_csv->field(std::string("max_error"));
    table_csv->endrow();
    manifest.files.push_back("table_prediction_errors.csv");
  }

  for (const SweepPoint& point : points) {
    const Scenario& sc = point.scenario;
    const PolicySchedule schedule = backward_solve(sc);

    std::optional<ConstrainedPolicy> constrained;
    std::optional<MeanBounds> bounds;
    if (point.constrained) {
      constrained = enumerate_feasible(sc, schedule);
      bounds = constrained->bounds;
    }

    if (config.dump_policy) {
      const std::string name = "policy_" + point.label + ".json";
      write_json(constrained ? constrained_to_json(schedule, *constrained)
                             : schedule_to_json(schedule),
                 out_path(name));
      manifest.files.push_back(name);
    }

    // Rollouts: online clamping for constrained points (pathwise |u| <= u_bar),
    // plain schedule otherwise.
    const std::vector<Trajectory> trajs =
        bounds ? rollout_batch_online(sc, schedule, *bounds, rng, 0,
                                      config.runs)
               : rollout_batch(sc, schedule, rng, 0, config.runs);
    const std::string traj_name = "trajectories_" + point.label + ".csv";
    write_trajectories_csv(out_path(traj_name), trajs);
    manifest.files.push_back(traj_name);

    // Exact moments: for constrained points via the offline clamped policy
    // (same noiseless mean path as online clamping).
    const auto [moments, cost] = constrained
                                     ? propagate_moments(sc, *constrained)
                                     : propagate_moments(sc, schedule);
    std::vector<Eigen::VectorXd> mu_means(sc.system.N);
    for (int k = 0; k < sc.system.N; ++k) {
      mu_means[k] = constrained
                        ? Eigen::VectorXd(constrained->Mt_seq[k] -
                                          constrained->Gt_seq[k] *
                                              moments[k].mean)
                        : Eigen::VectorXd(schedule.M_seq[k] -
                                          schedule.G_seq[k] * moments[k].mean);
    }

    std::vector<PredictionReport> reports;
    if (point.attack || config.attack) {
      reports.reserve(config.runs);
      for (int r = 0; r < config.runs; ++r) {
        reports.push_back(attack_run(trajs[r], sc.system, schedule.sigma2_seq,
                                     config.attacker, rng.attacker_stream(r)));
      }
      const std::string pred_name = "predictions_" + point.label + ".csv";
      write_prediction_csv(out_path(pred_name), reports);
      manifest.files.push_back(pred_name);
    }

    const std::string summary_name = "summary_" + point.label + ".csv";
    write_summary_csv(out_path(summary_name), sc, schedule, moments, cost,
                      mu_means, reports);
    manifest.files.push_back(summary_name);

    double realized = 0.0;
    double max_abs_u = 0.0;
    for (const Trajectory& tr : trajs) {
      realized += trajectory_cost(sc, tr);
      for (const auto& u : tr.inputs) {
        max_abs_u = std::max(max_abs_u, u.cwiseAbs().maxCoeff());
      }
    }
    realized = realized / static_cast<double>(config.runs) + cost.utility;

    json point_summary{{"label", point.label},
                       {"value_at_x0", value_function(schedule, sc.x0, 0)},
                       {"cost_terminal", cost.terminal},
                       {"cost_running", cost.running},
                       {"cost_utility", cost.utility},
                       {"cost_total", cost.total},
                       {"avg_realized_cost", realized},
                       {"max_abs_u", max_abs_u}};
    if (constrained) {
      point_summary["assignment"] = constrained->assignment.to_string();
      point_summary["feasible"] = constrained->feasible;
    }
    if (!reports.empty()) {
      point_summary["prediction"] =
          prediction_summary_json(reports, config.master_seed, config.runs);
      if (table_mode) {
        std::vector<double> avgs, maxs;
        for (size_t r = 0; r < reports.size(); ++r) {
          table_csv->field(sc.cost.lambda3_seq[0]);
          table_csv->field(static_cast<int>(r));
          table_csv->field(reports[r].avg_error);
          table_csv->field(reports[r].max_error);
          table_csv->endrow();
          avgs.push_back(reports[r].avg_error);
          maxs.push_back(reports[r].max_error);
        }
        point_summary["avg_error_band"] =
            json::array({quantile(avgs, 0.025), quantile(avgs, 0.975)});
        point_summary["max_error_band"] =
            json::array({quantile(maxs, 0.025), quantile(maxs, 0.975)});
      }
    }
    manifest.summary.push_back(std::move(point_summary));
  }

  manifest.files.push_back("manifest.json");
  json mj{{"config", manifest.config_echo},
          {"files", manifest.files},
          {"summary", manifest.summary}};
  write_json(mj, out_path("manifest.json"));
  return manifest;
}

json PolicyDiff::to_json() const {
  json ratios = json::array();
  for (const auto& r : sigma2_ratio) ratios.push_back(vector_to_json(r));
  return json{{"max_dG", max_dG},
              {"max_dM", max_dM},
              {"max_dP", max_dP},
              {"dG_per_step", dG_per_step},
              {"dM_per_step", dM_per_step},
              {"dP_per_step", dP_per_step},
              {"sigma2_ratio", ratios}};
}

std::vector<int> PolicyDiff::flagged_steps(double threshold) const {
  std::vector<int> flagged;
  for (size_t k = 0; k < dG_per_step.size(); ++k) {
    if (dG_per_step[k] > threshold || dM_per_step[k] > threshold ||
        dP_per_step[k] > threshold) {
      flagged.push_back(static_cast<int>(k));
    }
  }
  return flagged;
}

PolicyDiff diff_policies(const PolicySchedule& a, const PolicySchedule& b) {
  if (a.horizon() != b.horizon()) {
    throw ShapeError("schedules have different horizons");
  }
  PolicyDiff diff;
  for (int k = 0; k < a.horizon(); ++k) {
    if (a.G_seq[k].rows() != b.G_seq[k].rows() ||
        a.G_seq[k].cols() != b.G_seq[k].cols()) {
      throw ShapeError("schedules have different dimensions at step " +
                       std::to_string(k));
    }
    diff.dG_per_step.push_back((a.G_seq[k] - b.G_seq[k]).cwiseAbs().maxCoeff());
    diff.dM_per_step.push_back((a.M_seq[k] - b.M_seq[k]).cwiseAbs().maxCoeff());
    diff.dP_per_step.push_back((a.P_seq[k] - b.P_seq[k]).cwiseAbs().maxCoeff());
    diff.max_dG = std::max(diff.max_dG, diff.dG_per_step.back());
    diff.max_dM = std::max(diff.max_dM, diff.dM_per_step.back());
    diff.max_dP = std::max(diff.max_dP, diff.dP_per_step.back());
    Eigen::VectorXd ratio(a.sigma2_seq[k].size());
    for (Eigen::Index i = 0; i < ratio.size(); ++i) {
      const double sa = a.sigma2_seq[k][i];
      const double sb = b.sigma2_seq[k][i];
      ratio[i] = sa == 0.0 && sb == 0.0 ? 1.0 : sb / sa;
    }
    diff.sigma2_ratio.push_back(std::move(ratio));
  }
  return diff;
}

}  // namespace unpred
