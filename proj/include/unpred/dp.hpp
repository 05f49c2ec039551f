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

// Backward dynamic-programming solve for the unpredictability-augmented
// finite-horizon tracking problem.
//
// The value function stays in the quadratic family
//   V_k(x) = x' J1_k x - J2_k x + J3_k,
// and the optimal randomized control at step k is
//   u_k = mu_k + delta_k,  mu_k = -G_k x + M_k,
//   delta_{k,i} ~ U[-sqrt(3 sigma2_{k,i}), +sqrt(3 sigma2_{k,i})]
// with the closed-form schedule
//   P_k = lambda2 R_k + B_k' J1_{k+1} B_k
//   G_k = P_k^{-1} B_k' J1_{k+1}' A_k
//   M_k = 1/2 P_k^{-1} B_k' J2_{k+1}'
//   sigma2_{k,i} = sqrt(lambda3_k / P_{k,ii}).

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "unpred/system.hpp"

namespace unpred {

struct ValueCoefficients {
  Eigen::MatrixXd J1;     // n x n, symmetric PSD
  Eigen::RowVectorXd J2;  // 1 x n
  double J3 = 0.0;
};

// Per-step intermediates kept for diagnostics: W_k = lambda2 Q_k + A'J1A,
// Z_k = J2 A, and the builders of the linear-in-mu coefficient
// K_k(x) = 2 x' (A'J1B) - (J2B).
struct PolicyStepAux {
  Eigen::MatrixXd W;       // n x n
  Eigen::RowVectorXd Z;    // 1 x n
  Eigen::MatrixXd AtJ1B;   // n x m
  Eigen::RowVectorXd J2B;  // 1 x m
};

struct PolicySchedule {
  std::vector<Eigen::MatrixXd> G_seq;       // N, m x n
  std::vector<Eigen::VectorXd> M_seq;       // N, m
  std::vector<Eigen::MatrixXd> P_seq;       // N, m x m, PD
  std::vector<Eigen::VectorXd> sigma2_seq;  // N, m, >= 0
  std::vector<ValueCoefficients> value_seq; // N+1 (index k = coefficients of V_k)
  std::vector<PolicyStepAux> aux_seq;       // N

  int horizon() const { return static_cast<int>(G_seq.size()); }
};

struct SolveOptions {
  // Run validate(scenario) first and throw ParameterError on any violation.
  // With validation on, P_k is provably PD, so SolverDegeneracyError can only
  // fire when this is disabled (exercised in tests).
  bool check_validity = true;
};

// O(N n^3) backward recursion. Symmetrizes J1 every step.
PolicySchedule backward_solve(const Scenario& scenario,
                              const SolveOptions& options = {});

// V_k(x). k in [0, N], x of size n.
double value_function(const PolicySchedule& schedule, const Eigen::VectorXd& x,
                      int k);

// mu_k(x) = -G_k x + M_k. k in [0, N).
Eigen::VectorXd control_mean(const PolicySchedule& schedule,
                             const Eigen::VectorXd& x, int k);

}  // namespace unpred
