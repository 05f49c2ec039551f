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

// Kalman-filter adversary: observes noisy outputs of a rollout, knows the
// plant and the policy's mean (not the realized perturbations), and scores
// one-step output prediction error.

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "unpred/rng.hpp"
#include "unpred/system.hpp"

namespace unpred {

enum class ProcessNoiseRule {
  Zero,       // attacker assumes a deterministic plant
  KnowsSigma, // adds B_k diag(sigma2_k) B_k' in the time update
  Fixed,      // user-provided constant covariance
};

enum class InputRule {
  KnowsMean,  // u_hat_k = mu_k (policy mean along the realized trajectory)
  Zero,       // u_hat_k = 0
};

struct AttackerConfig {
  double obs_noise_var = 0.5;  // measurement z = y + N(0, obs_noise_var I)
  ProcessNoiseRule process_noise = ProcessNoiseRule::KnowsSigma;
  InputRule input_rule = InputRule::KnowsMean;
  std::optional<Eigen::MatrixXd> fixed_process_cov;  // n x n, for Fixed
  // Filter initialization; defaults: mean = C^+ z_0, cov = I.
  std::optional<Eigen::VectorXd> init_mean;
  std::optional<Eigen::MatrixXd> init_cov;
};

struct KfState {
  Eigen::VectorXd mean;  // n
  Eigen::MatrixXd cov;   // n x n
};

struct KfStepResult {
  KfState posterior;   // after measurement update with z_k
  KfState next_prior;  // after time update through step k
};

struct PredictionRecord {
  int k = 0;                // prediction made after measuring at step k
  Eigen::VectorXd y_true;   // y_{k+1}
  Eigen::VectorXd y_hat;    // C (A_k xhat_{k|k} + B_k u_hat_k)
  double error = 0.0;       // ||y_true - y_hat||_2
  double error_sq = 0.0;    // error^2
};

struct PredictionReport {
  std::vector<PredictionRecord> records;  // N-1 entries (k = 0..N-2)
  double avg_error = 0.0;
  double max_error = 0.0;
  double avg_sq_error = 0.0;
};

// Measurement update with z_k followed by time update through (A_k, B_k)
// with the configured input guess and process noise. Exposed for tests; the
// innovation covariance must be PD unless the filter carries exactly zero
// information (then the gain is zero).
KfStepResult kf_step(const KfState& prior, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& u_hat, const Eigen::VectorXd& sigma2,
                     const AttackerConfig& config,
                     const TimeVaryingLinearSystem& sys, int k);

// One-step output prediction from a posterior state.
Eigen::VectorXd predict_output(const KfState& posterior,
                               const Eigen::VectorXd& u_hat,
                               const TimeVaryingLinearSystem& sys, int k);

// Run the attacker along one realized trajectory. sigma2_seq is the policy's
// perturbation schedule (used by KnowsSigma; pass {} with other rules).
// Measurement noise draws come from `stream`.
PredictionReport attack_run(const Trajectory& traj,
                            const TimeVaryingLinearSystem& sys,
                            const std::vector<Eigen::VectorXd>& sigma2_seq,
                            const AttackerConfig& config, DrawStream stream);

}  // namespace unpred
