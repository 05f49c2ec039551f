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

// Input-constrained variant: enforce |u_{k,i}| <= u_bar_i by reserving the
// perturbation range and clamping the control mean,
//   delta_bar_{k,i} = sqrt(3 sigma2_{k,i})
//   mu_bar_{k,i}    = u_bar_i - tau * delta_bar_{k,i}   (must be >= 0)
//   mu_{k,i} = clamp(-G_k x + M_k, -mu_bar_{k,i}, +mu_bar_{k,i}).
//
// Clamping a channel replaces its feedback row with a constant, so a fixed
// ("offline") policy needs one saturation mode per (step, channel); along the
// noiseless mean path exactly one assignment is self-consistent, and
// enumerate_feasible finds it.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unpred/dp.hpp"
#include "unpred/system.hpp"

namespace unpred {

struct MeanBounds {
  std::vector<Eigen::VectorXd> delta_bar_seq;  // N, m
  std::vector<Eigen::VectorXd> mu_bar_seq;     // N, m, >= 0
  Eigen::VectorXd u_bar;                       // m
  double tau = 1.0;
};

enum class ClampMode : std::uint8_t {
  Interior,  // |mu_unc| <= mu_bar: keep (G row, M entry)
  SatLow,    // mu_unc < -mu_bar:  row -> 0, offset -> -mu_bar
  SatHigh,   // mu_unc > +mu_bar:  row -> 0, offset -> +mu_bar
};

char mode_letter(ClampMode mode);  // 'I', 'L', 'H'

// One saturation mode per (step, channel).
struct BranchAssignment {
  std::vector<std::vector<ClampMode>> modes;  // N x m

  int horizon() const { return static_cast<int>(modes.size()); }
  std::string to_string() const;  // e.g. "HI|II|II" (steps joined by '|')
};

struct ConstrainedPolicy {
  std::vector<Eigen::MatrixXd> Gt_seq;      // N, m x n (clamped rows zeroed)
  std::vector<Eigen::VectorXd> Mt_seq;      // N, m
  std::vector<Eigen::VectorXd> sigma2_seq;  // N, m — identical to unconstrained
  MeanBounds bounds;
  BranchAssignment assignment;
  bool feasible = false;
  std::string diagnostics;
};

struct ClampResult {
  Eigen::MatrixXd Gt;            // m x n
  Eigen::VectorXd Mt;            // m
  std::vector<ClampMode> modes;  // m
};

// Noiseless mean path under a fixed assignment, for inspection.
struct FeasibilityTrace {
  std::vector<Eigen::VectorXd> mean_states;  // N+1
  std::vector<Eigen::VectorXd> mu_seq;       // N
  int first_violation_step = -1;             // -1 when feasible
  std::string reason;
};

// delta_bar / mu_bar per step. Throws ParameterError (u_bar <= 0, tau outside
// [0,1], size mismatch) or OverConstrainedError naming (step, channel) when
// mu_bar would go negative.
MeanBounds conservative_bounds(const PolicySchedule& schedule,
                               const Eigen::VectorXd& u_bar, double tau);

// Componentwise clamp of mu = -G x + M at a concrete state.
ClampResult clamp_step(const Eigen::MatrixXd& G, const Eigen::VectorXd& M,
                       const Eigen::VectorXd& x, const Eigen::VectorXd& mu_bar);

// Check a fixed assignment along the noiseless mean path: bounds
// -mu_bar <= mu_k <= mu_bar every step, and (optionally) self-consistency of
// each channel's mode with the unclamped mean at the realized mean state.
bool feasibility_check(const BranchAssignment& assignment,
                       const PolicySchedule& schedule, const MeanBounds& bounds,
                       const Scenario& scenario, bool require_consistency = true,
                       FeasibilityTrace* trace = nullptr);

struct EnumerateOptions {
  // Depth-first search node guard: throws CapacityError when N*m exceeds it.
  int max_depth = 16;
  // Visit the full 3^(N*m) tree and count feasible assignments instead of
  // stopping at the first self-consistent one (diagnostics; small N only).
  bool exhaustive = false;
  // With exhaustive on: drop the self-consistency requirement and count
  // assignments that merely satisfy the box bounds (shows non-uniqueness).
  bool bounds_only = false;
};

// Build the offline constrained policy. Tries Interior first per channel, so
// the self-consistent assignment is found with almost no backtracking.
ConstrainedPolicy enumerate_feasible(const Scenario& scenario,
                                     const PolicySchedule& schedule,
                                     const EnumerateOptions& options = {});

// Number of feasible assignments found by an exhaustive search (diagnostics).
long long count_feasible(const Scenario& scenario,
                         const PolicySchedule& schedule, bool require_consistency,
                         const EnumerateOptions& options = {});

}  // namespace unpred
