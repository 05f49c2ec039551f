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

#include "unpred/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kernels/lane_ref.hpp"
#include "unpred/errors.hpp"

namespace unpred {

namespace {

constexpr int kBatchLanes = 1024;  // chunk size for kernel-backed batches

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

void check_policy_shape(const Scenario& scenario, int policy_horizon,
                        Eigen::Index gcols) {
  if (policy_horizon != scenario.system.N) {
    throw ShapeError("policy horizon " + std::to_string(policy_horizon) +
                     " does not match system horizon " +
                     std::to_string(scenario.system.N));
  }
  if (gcols != scenario.system.n) {
    throw ShapeError("policy state dimension " + std::to_string(gcols) +
                     " does not match system dimension " +
                     std::to_string(scenario.system.n));
  }
}

bool scalar_plan_applicable(const Scenario& scenario) {
  return scenario.system.n == 1 && scenario.system.m == 1 &&
         scenario.system.q == 1;
}

// Deterministic utility term sum_k sum_i lambda3_k / sigma2_{k,i}.
double utility_term(const Scenario& scenario,
                    const std::vector<Eigen::VectorXd>& sigma2_seq) {
  double utility = 0.0;
  for (int k = 0; k < scenario.system.N; ++k) {
    const double lambda3 = scenario.cost.lambda3_seq[k];
    if (lambda3 <= 0.0) continue;
    for (Eigen::Index i = 0; i < sigma2_seq[k].size(); ++i) {
      const double s2 = sigma2_seq[k][i];
      utility += s2 > 0.0 ? lambda3 / s2
                          : std::numeric_limits<double>::infinity();
    }
  }
  return utility;
}

}  // namespace

Eigen::VectorXd sample_perturbation(const Eigen::VectorXd& sigma2,
                                    DrawStream& stream) {
  Eigen::VectorXd delta(sigma2.size());
  for (Eigen::Index i = 0; i < sigma2.size(); ++i) {
    const double s2 = sigma2[i];
    if (s2 < 0.0 || !std::isfinite(s2)) {
      throw ParameterError("sigma2[" + std::to_string(i) +
                           "] must be finite and >= 0");
    }
    const double su = stream.signed_unit();  // consume even when s2 == 0
    const double bound = std::sqrt(3.0 * s2);
    delta[i] = bound > 0.0 ? bound * su : 0.0;
  }
  return delta;
}

Trajectory rollout_view(const Scenario& scenario, const PolicyView& view,
                        const RandomSource& rng, std::uint64_t run,
                        bool zero_noise) {
  const auto& sys = scenario.system;
  check_policy_shape(scenario, static_cast<int>(view.G->size()),
                     view.G->front().cols());

  DrawStream stream = rng.rollout_stream(run);
  Trajectory tr;
  tr.states.reserve(sys.N + 1);
  tr.outputs.reserve(sys.N + 1);
  tr.means.reserve(sys.N);
  tr.perturbations.reserve(sys.N);
  tr.inputs.reserve(sys.N);

  Eigen::VectorXd x = scenario.x0;
  tr.states.push_back(x);
  tr.outputs.push_back(observe(sys, x));

  for (int k = 0; k < sys.N; ++k) {
    const Eigen::VectorXd& s2 = (*view.sigma2)[k];
    Eigen::VectorXd delta(sys.m);
    for (int i = 0; i < sys.m; ++i) {
      const double su = stream.signed_unit();
      const double bound = std::sqrt(3.0 * s2[i]);
      delta[i] = (!zero_noise && bound > 0.0) ? bound * su : 0.0;
    }
    Eigen::VectorXd mu = (*view.M)[k] - (*view.G)[k] * x;
    if (view.mu_bar != nullptr) {
      const Eigen::VectorXd& mb = (*view.mu_bar)[k];
      for (int i = 0; i < sys.m; ++i) {
        mu[i] = kernels::detail::tie_min(
            kernels::detail::tie_max(mu[i], -mb[i]), mb[i]);
      }
    }
    const Eigen::VectorXd u = mu + delta;
    x = sys.A_seq[k] * x + sys.B_seq[k] * u;
    tr.means.push_back(mu);
    tr.perturbations.push_back(delta);
    tr.inputs.push_back(u);
    tr.states.push_back(x);
    tr.outputs.push_back(observe(sys, x));
  }
  return tr;
}

std::vector<Trajectory> rollout_view_batch(const Scenario& scenario,
                                           const PolicyView& view,
                                           const RandomSource& rng,
                                           std::uint64_t run0, int count,
                                           bool zero_noise,
                                           const kernels::KernelTable& kt) {
  std::vector<Trajectory> out;
  out.reserve(count);

  if (!scalar_plan_applicable(scenario)) {
    for (int r = 0; r < count; ++r) {
      out.push_back(rollout_view(scenario, view, rng, run0 + r, zero_noise));
    }
    return out;
  }

  const auto& sys = scenario.system;
  const int N = sys.N;
  const double c = sys.C(0, 0);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> a(N), b(N), g(N), m(N), db(N), mb(N);
  for (int k = 0; k < N; ++k) {
    a[k] = sys.A_seq[k](0, 0);
    b[k] = sys.B_seq[k](0, 0);
    g[k] = (*view.G)[k](0, 0);
    m[k] = (*view.M)[k](0);
    const double bound = std::sqrt(3.0 * (*view.sigma2)[k](0));
    db[k] = zero_noise ? 0.0 : bound;
    mb[k] = view.mu_bar != nullptr ? (*view.mu_bar)[k](0) : inf;
  }
  kernels::ScalarRolloutPlan plan{N,       a.data(), b.data(),
                                  g.data(), m.data(), db.data(),
                                  mb.data()};

  std::vector<double> xbuf, mubuf, debuf, ubuf;
  for (int done = 0; done < count;) {
    const int lanes = std::min(kBatchLanes, count - done);
    xbuf.assign(static_cast<std::size_t>(N + 1) * lanes, 0.0);
    mubuf.assign(static_cast<std::size_t>(N) * lanes, 0.0);
    debuf.assign(static_cast<std::size_t>(N) * lanes, 0.0);
    ubuf.assign(static_cast<std::size_t>(N) * lanes, 0.0);
    kernels::ScalarRolloutBatch batch{lanes, xbuf.data(), mubuf.data(),
                                      debuf.data(), ubuf.data()};
    kt.rollout(plan, scenario.x0[0], rng.master_seed(),
               run0 + static_cast<std::uint64_t>(done), batch);

    for (int r = 0; r < lanes; ++r) {
      Trajectory tr;
      tr.states.reserve(N + 1);
      tr.outputs.reserve(N + 1);
      tr.means.reserve(N);
      tr.perturbations.reserve(N);
      tr.inputs.reserve(N);
      for (int k = 0; k <= N; ++k) {
        const double xv = xbuf[static_cast<std::size_t>(k) * lanes + r];
        tr.states.push_back(Eigen::VectorXd::Constant(1, xv));
        tr.outputs.push_back(Eigen::VectorXd::Constant(1, c * xv));
      }
      for (int k = 0; k < N; ++k) {
        const std::size_t at = static_cast<std::size_t>(k) * lanes + r;
        tr.means.push_back(Eigen::VectorXd::Constant(1, mubuf[at]));
        tr.perturbations.push_back(Eigen::VectorXd::Constant(1, debuf[at]));
        tr.inputs.push_back(Eigen::VectorXd::Constant(1, ubuf[at]));
      }
      out.push_back(std::move(tr));
    }
    done += lanes;
  }
  return out;
}

Trajectory rollout(const Scenario& scenario, const PolicySchedule& schedule,
                   const RandomSource& rng, std::uint64_t run,
                   bool zero_noise) {
  const PolicyView view{&schedule.G_seq, &schedule.M_seq, &schedule.sigma2_seq,
                        nullptr};
  return rollout_view(scenario, view, rng, run, zero_noise);
}

Trajectory rollout(const Scenario& scenario, const ConstrainedPolicy& policy,
                   const RandomSource& rng, std::uint64_t run,
                   bool zero_noise) {
  const PolicyView view{&policy.Gt_seq, &policy.Mt_seq, &policy.sigma2_seq,
                        nullptr};
  return rollout_view(scenario, view, rng, run, zero_noise);
}

Trajectory rollout_online(const Scenario& scenario,
                          const PolicySchedule& schedule,
                          const MeanBounds& bounds, const RandomSource& rng,
                          std::uint64_t run, bool zero_noise) {
  const PolicyView view{&schedule.G_seq, &schedule.M_seq, &schedule.sigma2_seq,
                        &bounds.mu_bar_seq};
  return rollout_view(scenario, view, rng, run, zero_noise);
}

std::vector<Trajectory> rollout_batch(const Scenario& scenario,
                                      const PolicySchedule& schedule,
                                      const RandomSource& rng,
                                      std::uint64_t run0, int count,
                                      bool zero_noise) {
  const PolicyView view{&schedule.G_seq, &schedule.M_seq, &schedule.sigma2_seq,
                        nullptr};
  return rollout_view_batch(scenario, view, rng, run0, count, zero_noise,
                            kernels::active());
}

std::vector<Trajectory> rollout_batch_online(const Scenario& scenario,
                                             const PolicySchedule& schedule,
                                             const MeanBounds& bounds,
                                             const RandomSource& rng,
                                             std::uint64_t run0, int count,
                                             bool zero_noise) {
  const PolicyView view{&schedule.G_seq, &schedule.M_seq, &schedule.sigma2_seq,
                        &bounds.mu_bar_seq};
  return rollout_view_batch(scenario, view, rng, run0, count, zero_noise,
                            kernels::active());
}

namespace {

std::pair<std::vector<MomentState>, CostBreakdown> propagate_linear(
    const Scenario& scenario, const std::vector<Eigen::MatrixXd>& G_seq,
    const std::vector<Eigen::VectorXd>& M_seq,
    const std::vector<Eigen::VectorXd>& sigma2_seq) {
  const auto& sys = scenario.system;
  const auto& cost = scenario.cost;
  const int N = sys.N;
  check_policy_shape(scenario, static_cast<int>(G_seq.size()),
                     G_seq.front().cols());

  std::vector<MomentState> moments;
  moments.reserve(N + 1);
  Eigen::VectorXd mean = scenario.x0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(sys.n, sys.n);
  moments.push_back({mean, cov});

  CostBreakdown cb;
  for (int k = 0; k < N; ++k) {
    const Eigen::MatrixXd& A = sys.A_seq[k];
    const Eigen::MatrixXd& B = sys.B_seq[k];
    const Eigen::MatrixXd& G = G_seq[k];
    const Eigen::VectorXd& M = M_seq[k];
    const Eigen::MatrixXd Sigma = sigma2_seq[k].asDiagonal();

    // E[x'Qx] = m'Qm + tr(QS); u = -Gx + M + delta gives
    // E[u'Ru] = mu'R mu + tr(R (G S G' + Sigma)) with mu = M - G m.
    const Eigen::VectorXd mu_mean = M - G * mean;
    const double e_xqx = mean.dot(cost.Q_seq[k] * mean) +
                         (cost.Q_seq[k] * cov).trace();
    const Eigen::MatrixXd u_cov = G * cov * G.transpose() + Sigma;
    const double e_uru = mu_mean.dot(cost.R_seq[k] * mu_mean) +
                         (cost.R_seq[k] * u_cov).trace();
    cb.running += cost.lambda2 * (e_xqx + e_uru);

    const Eigen::MatrixXd Acl = A - B * G;
    mean = Acl * mean + B * M;
    cov = symmetrize(Acl * cov * Acl.transpose() +
                     B * Sigma * B.transpose());
    moments.push_back({mean, cov});
  }

  cb.utility = utility_term(scenario, sigma2_seq);
  const Eigen::VectorXd err = mean - cost.x_target;
  cb.terminal = cost.lambda1 *
                (err.dot(cost.H * err) + (cost.H * cov).trace());
  cb.total = cb.terminal + cb.running + cb.utility;
  return {std::move(moments), cb};
}

}  // namespace

std::pair<std::vector<MomentState>, CostBreakdown> propagate_moments(
    const Scenario& scenario, const PolicySchedule& schedule) {
  return propagate_linear(scenario, schedule.G_seq, schedule.M_seq,
                          schedule.sigma2_seq);
}

std::pair<std::vector<MomentState>, CostBreakdown> propagate_moments(
    const Scenario& scenario, const ConstrainedPolicy& policy) {
  return propagate_linear(scenario, policy.Gt_seq, policy.Mt_seq,
                          policy.sigma2_seq);
}

double trajectory_cost(const Scenario& scenario, const Trajectory& traj) {
  const auto& cost = scenario.cost;
  const int N = scenario.system.N;
  if (traj.horizon() != N) {
    throw ShapeError("trajectory horizon " + std::to_string(traj.horizon()) +
                     " does not match system horizon " + std::to_string(N));
  }
  double running = 0.0;
  for (int k = 0; k < N; ++k) {
    running += traj.states[k].dot(cost.Q_seq[k] * traj.states[k]) +
               traj.inputs[k].dot(cost.R_seq[k] * traj.inputs[k]);
  }
  const Eigen::VectorXd err = traj.states[N] - cost.x_target;
  return cost.lambda2 * running + cost.lambda1 * err.dot(cost.H * err);
}

namespace {

MonteCarloResult monte_carlo_view(const Scenario& scenario,
                                  const PolicyView& view,
                                  const RandomSource& rng, int runs) {
  if (runs <= 0) throw ParameterError("monte carlo needs runs > 0");

  const double utility = utility_term(scenario, *view.sigma2);

  // Welford accumulation in run order: deterministic for a fixed seed
  // regardless of chunking or kernel backend.
  double mean = 0.0, m2 = 0.0;
  long long n = 0;
  for (int done = 0; done < runs;) {
    const int chunk = std::min(kBatchLanes, runs - done);
    const auto trajs = rollout_view_batch(scenario, view, rng, done, chunk,
                                          /*zero_noise=*/false,
                                          kernels::active());
    for (const Trajectory& tr : trajs) {
      const double c = trajectory_cost(scenario, tr);
      n += 1;
      const double d = c - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (c - mean);
    }
    done += chunk;
  }

  MonteCarloResult res;
  res.runs = runs;
  res.utility = utility;
  res.mean = mean + utility;
  res.std_error =
      runs > 1 ? std::sqrt(m2 / (static_cast<double>(runs) *
                                 static_cast<double>(runs - 1)))
               : 0.0;
  return res;
}

}  // namespace

MonteCarloResult monte_carlo_cost(const Scenario& scenario,
                                  const PolicySchedule& schedule,
                                  const RandomSource& rng, int runs) {
  const PolicyView view{&schedule.G_seq, &schedule.M_seq, &schedule.sigma2_seq,
                        nullptr};
  return monte_carlo_view(scenario, view, rng, runs);
}

MonteCarloResult monte_carlo_cost(const Scenario& scenario,
                                  const ConstrainedPolicy& policy,
                                  const RandomSource& rng, int runs) {
  const PolicyView view{&policy.Gt_seq, &policy.Mt_seq, &policy.sigma2_seq,
                        nullptr};
  return monte_carlo_view(scenario, view, rng, runs);
}

}  // namespace unpred
