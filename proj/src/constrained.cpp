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

#include "unpred/constrained.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "unpred/errors.hpp"

namespace unpred {

char mode_letter(ClampMode mode) {
  switch (mode) {
    case ClampMode::Interior: return 'I';
    case ClampMode::SatLow: return 'L';
    case ClampMode::SatHigh: return 'H';
  }
  return '?';
}

std::string BranchAssignment::to_string() const {
  std::string s;
  for (size_t k = 0; k < modes.size(); ++k) {
    if (k) s += '|';
    for (ClampMode mode : modes[k]) s += mode_letter(mode);
  }
  return s;
}

MeanBounds conservative_bounds(const PolicySchedule& schedule,
                               const Eigen::VectorXd& u_bar, double tau) {
  const int N = schedule.horizon();
  if (N == 0) throw ParameterError("empty schedule");
  const int m = static_cast<int>(schedule.G_seq[0].rows());
  if (u_bar.size() != m) {
    throw ParameterError("u_bar has size " + std::to_string(u_bar.size()) +
                         ", expected " + std::to_string(m));
  }
  if (!(u_bar.minCoeff() > 0)) {
    throw ParameterError("u_bar entries must be > 0");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw ParameterError("tau must lie in [0, 1]");
  }

  MeanBounds bounds;
  bounds.u_bar = u_bar;
  bounds.tau = tau;
  bounds.delta_bar_seq.resize(N);
  bounds.mu_bar_seq.resize(N);
  for (int k = 0; k < N; ++k) {
    Eigen::VectorXd delta_bar(m), mu_bar(m);
    for (int i = 0; i < m; ++i) {
      delta_bar[i] = std::sqrt(3.0 * schedule.sigma2_seq[k][i]);
      mu_bar[i] = u_bar[i] - tau * delta_bar[i];
      if (mu_bar[i] < 0.0) {
        std::ostringstream os;
        os << "no mean budget at step " << k << ", channel " << i
           << ": u_bar = " << u_bar[i] << " < tau * delta_bar = "
           << tau * delta_bar[i]
           << " (raise u_bar, lower tau, or lower lambda3)";
        throw OverConstrainedError(k, i, os.str());
      }
    }
    bounds.delta_bar_seq[k] = delta_bar;
    bounds.mu_bar_seq[k] = mu_bar;
  }
  return bounds;
}

ClampResult clamp_step(const Eigen::MatrixXd& G, const Eigen::VectorXd& M,
                       const Eigen::VectorXd& x,
                       const Eigen::VectorXd& mu_bar) {
  const int m = static_cast<int>(G.rows());
  if (M.size() != m || mu_bar.size() != m || x.size() != G.cols()) {
    throw ShapeError("clamp_step dimension mismatch");
  }
  ClampResult res;
  res.Gt = G;
  res.Mt = M;
  res.modes.assign(m, ClampMode::Interior);
  for (int i = 0; i < m; ++i) {
    const double mu = M[i] - G.row(i).dot(x);
    if (mu < -mu_bar[i]) {
      res.Gt.row(i).setZero();
      res.Mt[i] = -mu_bar[i];
      res.modes[i] = ClampMode::SatLow;
    } else if (mu > mu_bar[i]) {
      res.Gt.row(i).setZero();
      res.Mt[i] = mu_bar[i];
      res.modes[i] = ClampMode::SatHigh;
    }
  }
  return res;
}

namespace {

// mu for one channel under a fixed mode, plus whether the mode is admissible
// at the current mean state. The three mode conditions partition the line,
// so with consistency required exactly one mode per channel is admissible.
bool channel_mu(ClampMode mode, double mu_unc, double mu_bar,
                bool require_consistency, double* mu_out) {
  switch (mode) {
    case ClampMode::Interior:
      // Bounds and self-consistency coincide here: mu = mu_unc in the box.
      if (!(mu_unc >= -mu_bar && mu_unc <= mu_bar)) return false;
      *mu_out = mu_unc;
      return true;
    case ClampMode::SatLow:
      if (require_consistency && !(mu_unc < -mu_bar)) return false;
      *mu_out = -mu_bar;
      return true;
    case ClampMode::SatHigh:
      if (require_consistency && !(mu_unc > mu_bar)) return false;
      *mu_out = mu_bar;
      return true;
  }
  return false;
}

}  // namespace

bool feasibility_check(const BranchAssignment& assignment,
                       const PolicySchedule& schedule, const MeanBounds& bounds,
                       const Scenario& scenario, bool require_consistency,
                       FeasibilityTrace* trace) {
  const auto& sys = scenario.system;
  const int N = sys.N;
  const int m = sys.m;
  if (assignment.horizon() != N) {
    throw ShapeError("assignment covers " +
                     std::to_string(assignment.horizon()) + " steps, expected " +
                     std::to_string(N));
  }

  if (trace) {
    trace->mean_states.clear();
    trace->mu_seq.clear();
    trace->first_violation_step = -1;
    trace->reason.clear();
  }

  Eigen::VectorXd mean = scenario.x0;
  if (trace) trace->mean_states.push_back(mean);

  for (int k = 0; k < N; ++k) {
    if (static_cast<int>(assignment.modes[k].size()) != m) {
      throw ShapeError("assignment step " + std::to_string(k) + " has " +
                       std::to_string(assignment.modes[k].size()) +
                       " channels, expected " + std::to_string(m));
    }
    Eigen::VectorXd mu(m);
    for (int i = 0; i < m; ++i) {
      const double mu_unc =
          schedule.M_seq[k][i] - schedule.G_seq[k].row(i).dot(mean);
      if (!channel_mu(assignment.modes[k][i], mu_unc,
                      bounds.mu_bar_seq[k][i], require_consistency, &mu[i])) {
        if (trace) {
          trace->first_violation_step = k;
          std::ostringstream os;
          os << "step " << k << " channel " << i << " mode "
             << mode_letter(assignment.modes[k][i])
             << " inadmissible: unconstrained mean " << mu_unc
             << " vs mu_bar " << bounds.mu_bar_seq[k][i];
          trace->reason = os.str();
        }
        return false;
      }
    }
    mean = sys.A_seq[k] * mean + sys.B_seq[k] * mu;
    if (trace) {
      trace->mu_seq.push_back(mu);
      trace->mean_states.push_back(mean);
    }
  }
  return true;
}

namespace {

struct Dfs {
  const Scenario& scenario;
  const PolicySchedule& schedule;
  const MeanBounds& bounds;
  bool require_consistency = true;
  bool count_all = false;

  long long feasible_count = 0;
  long long nodes = 0;
  std::vector<std::vector<ClampMode>> modes = {};
  bool found = false;

  // Returns true to cut the search (first feasible leaf, non-counting mode).
  bool step(int k, const Eigen::VectorXd& mean) {
    const int N = scenario.system.N;
    if (k == N) {
      ++feasible_count;
      if (count_all) return false;
      found = true;
      return true;
    }
    Eigen::VectorXd mu(scenario.system.m);
    return channel(k, 0, mean, mu);
  }

  bool channel(int k, int i, const Eigen::VectorXd& mean, Eigen::VectorXd& mu) {
    const int m = scenario.system.m;
    if (i == m) {
      const Eigen::VectorXd next = scenario.system.A_seq[k] * mean +
                                   scenario.system.B_seq[k] * mu;
      return step(k + 1, next);
    }
    const double mu_unc =
        schedule.M_seq[k][i] - schedule.G_seq[k].row(i).dot(mean);
    for (ClampMode mode :
         {ClampMode::Interior, ClampMode::SatLow, ClampMode::SatHigh}) {
      ++nodes;
      if (!channel_mu(mode, mu_unc, bounds.mu_bar_seq[k][i],
                      require_consistency, &mu[i])) {
        continue;  // prunes the whole subtree under this prefix
      }
      modes[k][i] = mode;
      if (channel(k, i + 1, mean, mu)) return true;
    }
    return false;
  }
};

Dfs run_dfs(const Scenario& scenario, const PolicySchedule& schedule,
            const MeanBounds& bounds, bool require_consistency, bool count_all,
            int max_depth) {
  const int depth = scenario.system.N * scenario.system.m;
  if (depth > max_depth) {
    throw CapacityError(
        "mode enumeration over 3^" + std::to_string(depth) +
        " assignments exceeds the guard of 3^" + std::to_string(max_depth) +
        "; raise EnumerateOptions::max_depth or use online clamping");
  }
  Dfs dfs{scenario, schedule, bounds, require_consistency, count_all};
  dfs.modes.assign(scenario.system.N,
                   std::vector<ClampMode>(scenario.system.m,
                                          ClampMode::Interior));
  dfs.step(0, scenario.x0);
  return dfs;
}

}  // namespace

ConstrainedPolicy enumerate_feasible(const Scenario& scenario,
                                     const PolicySchedule& schedule,
                                     const EnumerateOptions& options) {
  if (!scenario.input_bound) {
    throw ParameterError("scenario has no input_bound");
  }
  const MeanBounds bounds =
      conservative_bounds(schedule, *scenario.input_bound, scenario.tau);

  Dfs dfs = run_dfs(scenario, schedule, bounds, /*require_consistency=*/true,
                    /*count_all=*/false, options.max_depth);

  ConstrainedPolicy policy;
  policy.bounds = bounds;
  policy.sigma2_seq = schedule.sigma2_seq;
  policy.feasible = dfs.found;

  std::ostringstream diag;
  if (!dfs.found) {
    // Unreachable for valid bounds (the three mode conditions partition the
    // line, so a self-consistent assignment always exists), but reported
    // honestly if it ever happens.
    diag << "no feasible assignment after " << dfs.nodes << " nodes";
    policy.diagnostics = diag.str();
    return policy;
  }

  policy.assignment.modes = dfs.modes;
  const int N = scenario.system.N;
  const int m = scenario.system.m;
  policy.Gt_seq.resize(N);
  policy.Mt_seq.resize(N);
  FeasibilityTrace trace;
  feasibility_check(policy.assignment, schedule, bounds, scenario, true,
                    &trace);
  for (int k = 0; k < N; ++k) {
    Eigen::MatrixXd Gt = schedule.G_seq[k];
    Eigen::VectorXd Mt = schedule.M_seq[k];
    for (int i = 0; i < m; ++i) {
      switch (policy.assignment.modes[k][i]) {
        case ClampMode::Interior:
          break;
        case ClampMode::SatLow:
          Gt.row(i).setZero();
          Mt[i] = -bounds.mu_bar_seq[k][i];
          break;
        case ClampMode::SatHigh:
          Gt.row(i).setZero();
          Mt[i] = bounds.mu_bar_seq[k][i];
          break;
      }
    }
    policy.Gt_seq[k] = Gt;
    policy.Mt_seq[k] = Mt;
  }

  diag << "assignment " << policy.assignment.to_string() << " found after "
       << dfs.nodes << " DFS nodes";
  policy.diagnostics = diag.str();
  return policy;
}

long long count_feasible(const Scenario& scenario,
                         const PolicySchedule& schedule,
                         bool require_consistency,
                         const EnumerateOptions& options) {
  if (!scenario.input_bound) {
    throw ParameterError("scenario has no input_bound");
  }
  const MeanBounds bounds =
      conservative_bounds(schedule, *scenario.input_bound, scenario.tau);
  const bool consistency =
      options.bounds_only ? false : require_consistency;
  Dfs dfs = run_dfs(scenario, schedule, bounds, consistency,
                    /*count_all=*/true, options.max_depth);
  return dfs.feasible_count;
}

}  // namespace unpred
