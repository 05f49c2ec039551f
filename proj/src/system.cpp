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

#include "unpred/system.hpp"

#include <cmath>
#include <sstream>

#include "unpred/errors.hpp"

namespace unpred {

namespace {

std::string dims(const Eigen::MatrixXd& M) {
  std::ostringstream os;
  os << M.rows() << "x" << M.cols();
  return os.str();
}

}  // namespace

TimeVaryingLinearSystem TimeVaryingLinearSystem::constant(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
    const Eigen::MatrixXd& C, int N) {
  TimeVaryingLinearSystem sys;
  sys.n = static_cast<int>(A.rows());
  sys.m = static_cast<int>(B.cols());
  sys.q = static_cast<int>(C.rows());
  sys.N = N;
  sys.A_seq.assign(N, A);
  sys.B_seq.assign(N, B);
  sys.C = C;
  return sys;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].field << ": " << violations[i].message;
  }
  return os.str();
}

Eigen::VectorXd step(const TimeVaryingLinearSystem& sys,
                     const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                     int k) {
  if (k < 0 || k >= sys.N) {
    throw HorizonError("step index " + std::to_string(k) +
                       " outside horizon [0, " + std::to_string(sys.N) + ")");
  }
  if (x.size() != sys.n) {
    throw ShapeError("state has size " + std::to_string(x.size()) +
                     ", expected " + std::to_string(sys.n));
  }
  if (u.size() != sys.m) {
    throw ShapeError("input has size " + std::to_string(u.size()) +
                     ", expected " + std::to_string(sys.m));
  }
  return sys.A_seq[k] * x + sys.B_seq[k] * u;
}

Eigen::VectorXd observe(const TimeVaryingLinearSystem& sys,
                        const Eigen::VectorXd& x) {
  if (x.size() != sys.C.cols()) {
    throw ShapeError("state has size " + std::to_string(x.size()) +
                     ", expected " + std::to_string(sys.C.cols()));
  }
  return sys.C * x;
}

bool is_psd(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol;
}

bool is_pd(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) return false;
  const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() > tol;
}

ValidationReport validate(const Scenario& scenario) {
  ValidationReport report;
  auto flag = [&report](const std::string& field, const std::string& message) {
    report.violations.push_back({field, message});
  };

  const auto& sys = scenario.system;
  const auto& cost = scenario.cost;
  const int n = sys.n, m = sys.m, q = sys.q, N = sys.N;

  if (n <= 0) flag("system.n", "state dimension must be positive");
  if (m <= 0) flag("system.m", "input dimension must be positive");
  if (q <= 0) flag("system.q", "output dimension must be positive");
  if (N <= 0) flag("system.N", "horizon must be positive");
  if (!report.ok()) return report;  // dimension checks below would be noise

  if (static_cast<int>(sys.A_seq.size()) != N)
    flag("system.A_seq", "expected " + std::to_string(N) + " matrices");
  if (static_cast<int>(sys.B_seq.size()) != N)
    flag("system.B_seq", "expected " + std::to_string(N) + " matrices");
  for (int k = 0; k < static_cast<int>(sys.A_seq.size()); ++k) {
    if (sys.A_seq[k].rows() != n || sys.A_seq[k].cols() != n)
      flag("system.A_seq[" + std::to_string(k) + "]",
           "is " + dims(sys.A_seq[k]) + ", expected " + std::to_string(n) +
               "x" + std::to_string(n));
  }
  for (int k = 0; k < static_cast<int>(sys.B_seq.size()); ++k) {
    if (sys.B_seq[k].rows() != n || sys.B_seq[k].cols() != m)
      flag("system.B_seq[" + std::to_string(k) + "]",
           "is " + dims(sys.B_seq[k]) + ", expected " + std::to_string(n) +
               "x" + std::to_string(m));
  }
  if (q > n) flag("system.q", "output dimension must satisfy q <= n");
  if (sys.C.rows() != q || sys.C.cols() != n) {
    flag("system.C", "is " + dims(sys.C) + ", expected " + std::to_string(q) +
                         "x" + std::to_string(n));
  } else if (q <= n) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(q, n);
    block.leftCols(q).setIdentity();
    if ((sys.C - block).cwiseAbs().maxCoeff() != 0.0)
      flag("system.C", "must equal the block [I_q | 0]");
  }

  if (cost.H.rows() != n || cost.H.cols() != n)
    flag("cost.H", "is " + dims(cost.H) + ", expected " + std::to_string(n) +
                       "x" + std::to_string(n));
  else if (!is_psd(cost.H))
    flag("cost.H", "not positive semidefinite");

  if (static_cast<int>(cost.Q_seq.size()) != N)
    flag("cost.Q_seq", "expected " + std::to_string(N) + " matrices");
  for (int k = 0; k < static_cast<int>(cost.Q_seq.size()); ++k) {
    const auto& Q = cost.Q_seq[k];
    const std::string field = "cost.Q_seq[" + std::to_string(k) + "]";
    if (Q.rows() != n || Q.cols() != n)
      flag(field, "is " + dims(Q) + ", expected square of size " +
                      std::to_string(n));
    else if (!is_psd(Q))
      flag(field, "not positive semidefinite");
  }
  if (static_cast<int>(cost.R_seq.size()) != N)
    flag("cost.R_seq", "expected " + std::to_string(N) + " matrices");
  for (int k = 0; k < static_cast<int>(cost.R_seq.size()); ++k) {
    const auto& R = cost.R_seq[k];
    const std::string field = "cost.R_seq[" + std::to_string(k) + "]";
    if (R.rows() != m || R.cols() != m)
      flag(field, "is " + dims(R) + ", expected square of size " +
                      std::to_string(m));
    else if (!is_pd(R))
      flag(field, "not positive definite");
  }

  if (!(cost.lambda1 > 0) || !std::isfinite(cost.lambda1))
    flag("cost.lambda1", "must be finite and > 0");
  if (!(cost.lambda2 > 0) || !std::isfinite(cost.lambda2))
    flag("cost.lambda2", "must be finite and > 0");
  if (static_cast<int>(cost.lambda3_seq.size()) != N)
    flag("cost.lambda3_seq", "expected " + std::to_string(N) + " values");
  for (int k = 0; k < static_cast<int>(cost.lambda3_seq.size()); ++k) {
    const double l3 = cost.lambda3_seq[k];
    if (!(l3 >= 0) || !std::isfinite(l3))
      flag("cost.lambda3_seq[" + std::to_string(k) + "]",
           "must be finite and >= 0");
  }

  if (cost.x_target.size() != n)
    flag("cost.x_target", "has size " + std::to_string(cost.x_target.size()) +
                              ", expected " + std::to_string(n));
  if (scenario.x0.size() != n)
    flag("x0", "has size " + std::to_string(scenario.x0.size()) +
                   ", expected " + std::to_string(n));
  if (!(scenario.T > 0) || !std::isfinite(scenario.T))
    flag("T", "must be finite and > 0");
  if (scenario.input_bound) {
    if (scenario.input_bound->size() != m)
      flag("input_bound", "has size " +
                              std::to_string(scenario.input_bound->size()) +
                              ", expected " + std::to_string(m));
    else if (!(scenario.input_bound->minCoeff() > 0))
      flag("input_bound", "entries must be > 0");
  }
  if (!(scenario.tau >= 0 && scenario.tau <= 1))
    flag("tau", "must lie in [0, 1]");

  return report;
}

Scenario scalar_benchmark(double x0, double T, int N, double lambda1,
                          double lambda2, double lambda3, BConvention conv) {
  if (N <= 0) throw ParameterError("benchmark horizon must be positive");
  if (!(T > 0)) throw ParameterError("benchmark duration must be positive");
  const double dt = T / N;
  Eigen::MatrixXd A(1, 1), B(1, 1), C(1, 1);
  A << 1.0 + dt;
  B << (conv == BConvention::Dt ? dt : 1.0);
  C << 1.0;

  Scenario sc;
  sc.system = TimeVaryingLinearSystem::constant(A, B, C, N);
  sc.cost.H = Eigen::MatrixXd::Identity(1, 1);
  sc.cost.Q_seq.assign(N, Eigen::MatrixXd::Zero(1, 1));
  sc.cost.R_seq.assign(N, Eigen::MatrixXd::Constant(1, 1, dt));
  sc.cost.lambda1 = lambda1;
  sc.cost.lambda2 = lambda2;
  sc.cost.lambda3_seq.assign(N, lambda3);
  sc.cost.x_target = Eigen::VectorXd::Zero(1);
  sc.x0 = Eigen::VectorXd::Constant(1, x0);
  sc.T = T;
  return sc;
}

}  // namespace unpred
