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

#include "unpred/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unpred/errors.hpp"

namespace unpred {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

Eigen::MatrixXd process_cov(const AttackerConfig& config,
                            const TimeVaryingLinearSystem& sys,
                            const Eigen::VectorXd& sigma2, int k) {
  switch (config.process_noise) {
    case ProcessNoiseRule::Zero:
      return Eigen::MatrixXd::Zero(sys.n, sys.n);
    case ProcessNoiseRule::KnowsSigma: {
      if (sigma2.size() != sys.m) {
        throw ParameterError(
            "KnowsSigma process noise needs the policy's sigma2 at step " +
            std::to_string(k));
      }
      const Eigen::MatrixXd& B = sys.B_seq[k];
      return B * sigma2.asDiagonal() * B.transpose();
    }
    case ProcessNoiseRule::Fixed: {
      if (!config.fixed_process_cov ||
          config.fixed_process_cov->rows() != sys.n ||
          config.fixed_process_cov->cols() != sys.n) {
        throw ParameterError("Fixed process noise needs an n x n covariance");
      }
      return *config.fixed_process_cov;
    }
  }
  throw ParameterError("unknown process noise rule");
}

}  // namespace

KfStepResult kf_step(const KfState& prior, const Eigen::VectorXd& z,
                     const Eigen::VectorXd& u_hat,
                     const Eigen::VectorXd& sigma2,
                     const AttackerConfig& config,
                     const TimeVaryingLinearSystem& sys, int k) {
  if (k < 0 || k >= sys.N) {
    throw HorizonError("kf_step index " + std::to_string(k) +
                       " outside horizon [0, " + std::to_string(sys.N) + ")");
  }
  if (prior.mean.size() != sys.n || z.size() != sys.q ||
      u_hat.size() != sys.m) {
    throw ShapeError("kf_step dimension mismatch");
  }
  if (config.obs_noise_var < 0.0) {
    throw ParameterError("obs_noise_var must be >= 0");
  }

  const Eigen::MatrixXd& C = sys.C;
  const Eigen::MatrixXd PCt = prior.cov * C.transpose();
  const Eigen::MatrixXd S =
      symmetrize(C * PCt) +
      config.obs_noise_var * Eigen::MatrixXd::Identity(sys.q, sys.q);

  Eigen::MatrixXd K;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) {
    // K = P C' S^-1, via S K' = C P.
    K = llt.solve(PCt.transpose()).transpose();
  } else if (PCt.isZero(0.0)) {
    // Zero innovation covariance with zero cross term: the measurement
    // carries no information the filter doesn't already have.
    K = Eigen::MatrixXd::Zero(sys.n, sys.q);
  } else {
    throw FilterDegeneracyError(
        k, "innovation covariance not positive definite at step " +
               std::to_string(k));
  }

  KfStepResult res;
  res.posterior.mean = prior.mean + K * (z - C * prior.mean);
  res.posterior.cov = symmetrize(
      (Eigen::MatrixXd::Identity(sys.n, sys.n) - K * C) * prior.cov);

  const Eigen::MatrixXd& A = sys.A_seq[k];
  const Eigen::MatrixXd& B = sys.B_seq[k];
  res.next_prior.mean = A * res.posterior.mean + B * u_hat;
  res.next_prior.cov = symmetrize(A * res.posterior.cov * A.transpose() +
                                  process_cov(config, sys, sigma2, k));
  return res;
}

Eigen::VectorXd predict_output(const KfState& posterior,
                               const Eigen::VectorXd& u_hat,
                               const TimeVaryingLinearSystem& sys, int k) {
  if (k < 0 || k >= sys.N) {
    throw HorizonError("predict_output index " + std::to_string(k) +
                       " outside horizon [0, " + std::to_string(sys.N) + ")");
  }
  return sys.C * (sys.A_seq[k] * posterior.mean + sys.B_seq[k] * u_hat);
}

PredictionReport attack_run(const Trajectory& traj,
                            const TimeVaryingLinearSystem& sys,
                            const std::vector<Eigen::VectorXd>& sigma2_seq,
                            const AttackerConfig& config, DrawStream stream) {
  const int N = traj.horizon();
  if (N != sys.N) {
    throw ShapeError("trajectory horizon " + std::to_string(N) +
                     " does not match system horizon " + std::to_string(sys.N));
  }
  if (config.process_noise == ProcessNoiseRule::KnowsSigma &&
      static_cast<int>(sigma2_seq.size()) != N) {
    throw ParameterError("KnowsSigma needs sigma2 for all " +
                         std::to_string(N) + " steps");
  }

  const double sd = std::sqrt(config.obs_noise_var);
  PredictionReport report;
  if (N < 2) return report;  // no one-step prediction to score

  // Noisy measurements z_k = y_k + N(0, var I) for k = 0..N-2.
  std::vector<Eigen::VectorXd> z(N - 1);
  for (int k = 0; k < N - 1; ++k) {
    Eigen::VectorXd noise(sys.q);
    for (int i = 0; i < sys.q; ++i) noise[i] = sd * stream.normal();
    z[k] = traj.outputs[k] + noise;
  }

  KfState state;
  if (config.init_mean) {
    if (config.init_mean->size() != sys.n) {
      throw ShapeError("init_mean has wrong size");
    }
    state.mean = *config.init_mean;
  } else {
    // Lift the first measurement: mean = C^+ z_0.
    state.mean = sys.C.completeOrthogonalDecomposition().solve(z[0]);
  }
  if (config.init_cov) {
    if (config.init_cov->rows() != sys.n || config.init_cov->cols() != sys.n) {
      throw ShapeError("init_cov has wrong shape");
    }
    state.cov = *config.init_cov;
  } else {
    state.cov = Eigen::MatrixXd::Identity(sys.n, sys.n);
  }

  report.records.reserve(N - 1);
  double sum_err = 0.0, sum_sq = 0.0, max_err = 0.0;
  for (int k = 0; k < N - 1; ++k) {
    const Eigen::VectorXd u_hat = config.input_rule == InputRule::KnowsMean
                                      ? traj.means[k]
                                      : Eigen::VectorXd::Zero(sys.m);
    const Eigen::VectorXd s2 =
        config.process_noise == ProcessNoiseRule::KnowsSigma ? sigma2_seq[k]
                                                             : Eigen::VectorXd();
    const KfStepResult step = kf_step(state, z[k], u_hat, s2, config, sys, k);

    PredictionRecord rec;
    rec.k = k;
    rec.y_hat = predict_output(step.posterior, u_hat, sys, k);
    rec.y_true = traj.outputs[k + 1];
    rec.error = (rec.y_true - rec.y_hat).norm();
    rec.error_sq = rec.error * rec.error;
    sum_err += rec.error;
    sum_sq += rec.error_sq;
    max_err = std::max(max_err, rec.error);
    report.records.push_back(std::move(rec));

    state = step.next_prior;
  }

  const double count = static_cast<double>(N - 1);
  report.avg_error = sum_err / count;
  report.max_error = max_err;
  report.avg_sq_error = sum_sq / count;
  return report;
}

}  // namespace unpred
