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

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace unpred {

// Discrete linear time-varying plant
//   x_{k+1} = A_k x_k + B_k u_k,   y_k = C x_k,   k = 0..N-1.
struct TimeVaryingLinearSystem {
  int n = 0;  // state dimension
  int m = 0;  // input dimension
  int q = 0;  // output dimension
  int N = 0;  // horizon (number of steps)
  std::vector<Eigen::MatrixXd> A_seq;  // N matrices, n x n
  std::vector<Eigen::MatrixXd> B_seq;  // N matrices, n x m
  Eigen::MatrixXd C;                   // q x n, time-invariant

  // Time-invariant convenience constructor: replicates A and B over N steps.
  static TimeVaryingLinearSystem constant(const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& B,
                                          const Eigen::MatrixXd& C, int N);
};

// Cost weights for
//   J = lambda1 (x_N - t)'H(x_N - t)
//     + lambda2 sum_k (x_k'Q_k x_k + u_k'R_k u_k)
//     + sum_k sum_i lambda3_k / sigma2_{k,i}.
struct CostSpec {
  Eigen::MatrixXd H;                   // n x n, PSD
  std::vector<Eigen::MatrixXd> Q_seq;  // N matrices, n x n, PSD
  std::vector<Eigen::MatrixXd> R_seq;  // N matrices, m x m, PD
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  std::vector<double> lambda3_seq;     // N values, >= 0
  Eigen::VectorXd x_target;            // n
};

enum class BConvention {
  Dt,   // B = dt (literal forward-Euler input matrix)
  One,  // B = 1  (unit input gain)
};

struct Scenario {
  TimeVaryingLinearSystem system;
  CostSpec cost;
  Eigen::VectorXd x0;
  double T = 1.0;  // total duration; dt = T / N
  std::optional<Eigen::VectorXd> input_bound;  // u_bar, elementwise, > 0
  double tau = 1.0;  // fraction of the perturbation range reserved inside u_bar

  double dt() const { return T / system.N; }
};

// One realized closed-loop run.
struct Trajectory {
  std::vector<Eigen::VectorXd> states;         // N+1
  std::vector<Eigen::VectorXd> outputs;        // N+1
  std::vector<Eigen::VectorXd> means;          // N   (mu_k)
  std::vector<Eigen::VectorXd> perturbations;  // N   (delta_k)
  std::vector<Eigen::VectorXd> inputs;         // N   (u_k = mu_k + delta_k)

  int horizon() const { return static_cast<int>(inputs.size()); }
};

struct Violation {
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// One plant step. Throws HorizonError for k outside [0, N), ShapeError on
// dimension mismatch.
Eigen::VectorXd step(const TimeVaryingLinearSystem& sys,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& u, int k);

// y = C x. Throws ShapeError on dimension mismatch.
Eigen::VectorXd observe(const TimeVaryingLinearSystem& sys,
                        const Eigen::VectorXd& x);

// Structural and numerical checks: dimensions consistent, H/Q PSD, R PD,
// lambda1/lambda2 > 0, lambda3 >= 0, T > 0, bounds positive, tau in [0,1].
ValidationReport validate(const Scenario& scenario);

// The scalar double-integrator-style benchmark: continuous plant xdot = x + u
// discretized with dt = T/N as A = 1 + dt and B per `conv`, C = 1, H = 1,
// Q = 0, R = dt, x_target = 0.
Scenario scalar_benchmark(double x0, double T, int N, double lambda1,
                          double lambda2, double lambda3,
                          BConvention conv = BConvention::Dt);

// Symmetric-part PSD/PD tests used by validate() (exposed for tests).
bool is_psd(const Eigen::MatrixXd& M, double tol = 1e-10);
bool is_pd(const Eigen::MatrixXd& M, double tol = 1e-10);

}  // namespace unpred
