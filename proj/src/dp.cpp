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

#include "unpred/dp.hpp"

#include <cmath>
#include <string>

#include "unpred/errors.hpp"

namespace unpred {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

}  // namespace

PolicySchedule backward_solve(const Scenario& scenario,
                              const SolveOptions& options) {
  if (options.check_validity) {
    const ValidationReport report = validate(scenario);
    if (!report.ok()) {
      throw ParameterError("invalid scenario: " + report.summary());
    }
  }

  const auto& sys = scenario.system;
  const auto& cost = scenario.cost;
  const int N = sys.N;
  const int m = sys.m;

  PolicySchedule ps;
  ps.G_seq.resize(N);
  ps.M_seq.resize(N);
  ps.P_seq.resize(N);
  ps.sigma2_seq.resize(N);
  ps.aux_seq.resize(N);
  ps.value_seq.resize(N + 1);

  // Terminal coefficients from lambda1 (x - t)'H(x - t) expanded in x.
  Eigen::MatrixXd J1 = symmetrize(cost.lambda1 * cost.H);
  Eigen::RowVectorXd J2 =
      2.0 * cost.lambda1 * (cost.x_target.transpose() * cost.H);
  double J3 = cost.lambda1 * cost.x_target.dot(cost.H * cost.x_target);
  ps.value_seq[N] = {J1, J2, J3};

  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd& A = sys.A_seq[k];
    const Eigen::MatrixXd& B = sys.B_seq[k];
    const double lambda3 = cost.lambda3_seq[k];

    const Eigen::MatrixXd P =
        symmetrize(cost.lambda2 * cost.R_seq[k] + B.transpose() * J1 * B);
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) {
      throw SolverDegeneracyError(
          k, "P_" + std::to_string(k) +
                 " = lambda2 R + B'J1B is not positive definite");
    }

    const Eigen::MatrixXd G = llt.solve(B.transpose() * J1.transpose() * A);
    const Eigen::VectorXd M = 0.5 * llt.solve(B.transpose() * J2.transpose());

    Eigen::VectorXd sigma2(m);
    double utility_gain = 0.0;  // 2 sum_i sqrt(lambda3 P_ii)
    for (int i = 0; i < m; ++i) {
      if (lambda3 > 0.0) {
        sigma2[i] = std::sqrt(lambda3 / P(i, i));
        utility_gain += 2.0 * std::sqrt(lambda3 * P(i, i));
      } else {
        sigma2[i] = 0.0;
      }
    }

    const Eigen::MatrixXd W = cost.lambda2 * cost.Q_seq[k] +
                              A.transpose() * J1 * A;
    const Eigen::RowVectorXd Z = J2 * A;
    const Eigen::MatrixXd AtJ1B = A.transpose() * J1 * B;
    const Eigen::RowVectorXd J2B = J2 * B;

    const Eigen::MatrixXd J1_next = symmetrize(W - AtJ1B * G);
    const Eigen::RowVectorXd J2_next = Z - J2B * G;
    // Completing the square over mu leaves the constant -1/2 J2 B M (the
    // x-free part of -1/4 K P^{-1} K'); the perturbation budget contributes
    // lambda3/sigma2 + sigma2 P_ii = 2 sqrt(lambda3 P_ii) at the optimum.
    const double J3_next = -0.5 * (J2B * M).value() + utility_gain + J3;

    ps.G_seq[k] = G;
    ps.M_seq[k] = M;
    ps.P_seq[k] = P;
    ps.sigma2_seq[k] = sigma2;
    ps.aux_seq[k] = {W, Z, AtJ1B, J2B};
    ps.value_seq[k] = {J1_next, J2_next, J3_next};

    J1 = J1_next;
    J2 = J2_next;
    J3 = J3_next;
  }

  return ps;
}

double value_function(const PolicySchedule& schedule, const Eigen::VectorXd& x,
                      int k) {
  const int N = schedule.horizon();
  if (k < 0 || k > N) {
    throw HorizonError("value index " + std::to_string(k) +
                       " outside [0, " + std::to_string(N) + "]");
  }
  const ValueCoefficients& v = schedule.value_seq[k];
  if (x.size() != v.J1.rows()) {
    throw ShapeError("state has size " + std::to_string(x.size()) +
                     ", expected " + std::to_string(v.J1.rows()));
  }
  return x.dot(v.J1 * x) - (v.J2 * x).value() + v.J3;
}

Eigen::VectorXd control_mean(const PolicySchedule& schedule,
                             const Eigen::VectorXd& x, int k) {
  const int N = schedule.horizon();
  if (k < 0 || k >= N) {
    throw HorizonError("control index " + std::to_string(k) +
                       " outside [0, " + std::to_string(N) + ")");
  }
  if (x.size() != schedule.G_seq[k].cols()) {
    throw ShapeError("state has size " + std::to_string(x.size()) +
                     ", expected " +
                     std::to_string(schedule.G_seq[k].cols()));
  }
  return schedule.M_seq[k] - schedule.G_seq[k] * x;
}

}  // namespace unpred
