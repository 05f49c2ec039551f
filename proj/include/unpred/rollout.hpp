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

// Seeded closed-loop rollouts, exact moment propagation, and Monte Carlo
// cost estimation for a solved policy.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "unpred/constrained.hpp"
#include "unpred/dp.hpp"
#include "unpred/kernels/rollout_kernels.hpp"
#include "unpred/rng.hpp"
#include "unpred/system.hpp"

namespace unpred {

// How the control mean is formed during a rollout.
enum class RolloutMode {
  Unconstrained,  // mu = -G x + M from the schedule
  Offline,        // mu = -Gt x + Mt from a fixed constrained policy
  Online,         // mu = clamp(-G x + M, +-mu_bar) at the realized state
};

// delta_i ~ U[-sqrt(3 s2_i), +sqrt(3 s2_i)); exactly 0 where s2_i == 0.
// Consumes one draw per component. Throws ParameterError on negative s2.
Eigen::VectorXd sample_perturbation(const Eigen::VectorXd& sigma2,
                                    DrawStream& stream);

// One seeded rollout; run r reads perturbations from stream r.
Trajectory rollout(const Scenario& scenario, const PolicySchedule& schedule,
                   const RandomSource& rng, std::uint64_t run,
                   bool zero_noise = false);
Trajectory rollout(const Scenario& scenario, const ConstrainedPolicy& policy,
                   const RandomSource& rng, std::uint64_t run,
                   bool zero_noise = false);
// Online clamping against the realized state: |u| <= u_bar holds pathwise.
Trajectory rollout_online(const Scenario& scenario,
                          const PolicySchedule& schedule,
                          const MeanBounds& bounds, const RandomSource& rng,
                          std::uint64_t run, bool zero_noise = false);

// Batched rollouts [run0, run0 + count). Scalar systems go through the
// runtime-dispatched SIMD kernels; results are bit-identical to the per-run
// overloads above.
std::vector<Trajectory> rollout_batch(const Scenario& scenario,
                                      const PolicySchedule& schedule,
                                      const RandomSource& rng,
                                      std::uint64_t run0, int count,
                                      bool zero_noise = false);
std::vector<Trajectory> rollout_batch_online(const Scenario& scenario,
                                             const PolicySchedule& schedule,
                                             const MeanBounds& bounds,
                                             const RandomSource& rng,
                                             std::uint64_t run0, int count,
                                             bool zero_noise = false);

struct MomentState {
  Eigen::VectorXd mean;  // E[x_k]
  Eigen::MatrixXd cov;   // Cov[x_k]
};

struct CostBreakdown {
  double terminal = 0.0;  // lambda1 E[(x_N - t)'H(x_N - t)]
  double running = 0.0;   // lambda2 sum E[x'Qx + u'Ru]
  double utility = 0.0;   // sum_k sum_i lambda3_k / sigma2_{k,i}
  double total = 0.0;
};

// Exact first/second moments of the closed loop under a fixed linear policy,
// plus the exact expected cost. Covariances start at zero (deterministic x0).
std::pair<std::vector<MomentState>, CostBreakdown> propagate_moments(
    const Scenario& scenario, const PolicySchedule& schedule);
std::pair<std::vector<MomentState>, CostBreakdown> propagate_moments(
    const Scenario& scenario, const ConstrainedPolicy& policy);

// Realized quadratic cost of one trajectory (no utility term).
double trajectory_cost(const Scenario& scenario, const Trajectory& traj);

struct MonteCarloResult {
  double mean = 0.0;        // average total cost (incl. analytic utility term)
  double std_error = 0.0;   // standard error of the realized quadratic part
  double utility = 0.0;     // analytic utility term added to every run
  int runs = 0;
};

// Mean cost over `runs` seeded rollouts (runs use streams 0..runs-1). The
// utility term sum lambda3/sigma2 is deterministic and added analytically.
MonteCarloResult monte_carlo_cost(const Scenario& scenario,
                                  const PolicySchedule& schedule,
                                  const RandomSource& rng, int runs);
MonteCarloResult monte_carlo_cost(const Scenario& scenario,
                                  const ConstrainedPolicy& policy,
                                  const RandomSource& rng, int runs);

// Internal: linear policy view shared by every rollout mode (exposed for the
// kernel equivalence tests).
struct PolicyView {
  const std::vector<Eigen::MatrixXd>* G;
  const std::vector<Eigen::VectorXd>* M;
  const std::vector<Eigen::VectorXd>* sigma2;
  const std::vector<Eigen::VectorXd>* mu_bar;  // nullptr = unconstrained
};

Trajectory rollout_view(const Scenario& scenario, const PolicyView& view,
                        const RandomSource& rng, std::uint64_t run,
                        bool zero_noise);
std::vector<Trajectory> rollout_view_batch(const Scenario& scenario,
                                           const PolicyView& view,
                                           const RandomSource& rng,
                                           std::uint64_t run0, int count,
                                           bool zero_noise,
                                           const kernels::KernelTable& kt);

}  // namespace unpred
