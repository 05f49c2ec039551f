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

// Random scenario builders shared by the unit and acceptance tests.

#pragma once

#include <Eigen/Dense>
#include <random>

#include "unpred/system.hpp"

namespace unpred::test {

struct RandomLtvOptions {
  int n_max = 4;
  int m_max = 2;
  int N_max = 50;
  bool lambda3_zero = false;   // force the pure LQ case
  bool x_target_zero = false;
  double a_scale = 1.0;        // entry range for A (kept modest: LTV products)
};

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, int rows, int cols,
                                     double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Eigen::MatrixXd M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) M(r, c) = dist(gen);
  }
  return M;
}

// Random PSD/PD matrices via X'X (+ ridge).
inline Eigen::MatrixXd random_psd(std::mt19937_64& gen, int n, double ridge) {
  const Eigen::MatrixXd X = random_matrix(gen, n, n, -1.0, 1.0);
  return X.transpose() * X + ridge * Eigen::MatrixXd::Identity(n, n);
}

inline Scenario random_ltv_scenario(std::mt19937_64& gen,
                                    const RandomLtvOptions& opt = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = 1 + static_cast<int>(gen() % opt.n_max);
  const int m = 1 + static_cast<int>(gen() % opt.m_max);
  const int N = 1 + static_cast<int>(gen() % opt.N_max);
  const int q = 1 + static_cast<int>(gen() % n);

  Scenario sc;
  sc.system.n = n;
  sc.system.m = m;
  sc.system.q = q;
  sc.system.N = N;
  sc.system.C = Eigen::MatrixXd::Identity(q, n);
  sc.T = 0.1 * N;
  for (int k = 0; k < N; ++k) {
    // Keep the A product bounded so long horizons stay numerically sane.
    Eigen::MatrixXd A =
        random_matrix(gen, n, n, -0.6 * opt.a_scale, 0.6 * opt.a_scale) +
        0.5 * Eigen::MatrixXd::Identity(n, n);
    sc.system.A_seq.push_back(A);
    sc.system.B_seq.push_back(random_matrix(gen, n, m, -1.0, 1.0));
    sc.cost.Q_seq.push_back(random_psd(gen, n, 0.0));
    sc.cost.R_seq.push_back(random_psd(gen, m, 0.3));
    sc.cost.lambda3_seq.push_back(opt.lambda3_zero ? 0.0
                                                   : 0.1 + 1.4 * unit(gen));
  }
  sc.cost.H = random_psd(gen, n, 0.0);
  sc.cost.lambda1 = 0.5 + 2.5 * unit(gen);
  sc.cost.lambda2 = 0.5 + 1.5 * unit(gen);
  sc.cost.x_target =
      opt.x_target_zero
          ? Eigen::VectorXd(Eigen::VectorXd::Zero(n))
          : Eigen::VectorXd(random_matrix(gen, n, 1, -2.0, 2.0).col(0));
  sc.x0 = random_matrix(gen, n, 1, -3.0, 3.0).col(0);
  return sc;
}

// Scalar scenario with every weight drawn from the documented benchmark-ish
// ranges; used against the grid oracle.
inline Scenario random_scalar_scenario(std::mt19937_64& gen, int N) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto U = [&](double lo, double hi) { return lo + (hi - lo) * unit(gen); };

  Scenario sc;
  sc.system.n = sc.system.m = sc.system.q = 1;
  sc.system.N = N;
  sc.system.C = Eigen::MatrixXd::Identity(1, 1);
  sc.T = 0.2 * N;
  for (int k = 0; k < N; ++k) {
    sc.system.A_seq.push_back(Eigen::MatrixXd::Constant(1, 1, U(0.6, 1.3)));
    sc.system.B_seq.push_back(Eigen::MatrixXd::Constant(1, 1, U(0.5, 1.5)));
    sc.cost.Q_seq.push_back(Eigen::MatrixXd::Constant(1, 1, U(0.0, 2.0)));
    sc.cost.R_seq.push_back(Eigen::MatrixXd::Constant(1, 1, U(0.5, 2.0)));
    sc.cost.lambda3_seq.push_back(U(0.1, 1.5));
  }
  sc.cost.H = Eigen::MatrixXd::Constant(1, 1, U(0.0, 2.0));
  sc.cost.lambda1 = U(0.5, 3.0);
  sc.cost.lambda2 = U(0.5, 2.0);
  sc.cost.x_target = Eigen::VectorXd::Constant(1, U(-2.0, 2.0));
  sc.x0 = Eigen::VectorXd::Constant(1, U(-3.0, 3.0));
  return sc;
}

}  // namespace unpred::test
