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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "unpred/constrained.hpp"
#include "unpred/dp.hpp"
#include "unpred/errors.hpp"
#include "unpred/rollout.hpp"
#include "unpred/system.hpp"

using namespace unpred;

namespace {

PolicySchedule fixed_scalar_schedule(const std::vector<double>& sigma2) {
  PolicySchedule s;
  for (double v : sigma2) {
    s.G_seq.push_back(Eigen::MatrixXd::Constant(1, 1, 0.5));
    s.M_seq.push_back(Eigen::VectorXd::Zero(1));
    s.P_seq.push_back(Eigen::MatrixXd::Identity(1, 1));
    s.sigma2_seq.push_back(Eigen::VectorXd::Constant(1, v));
  }
  return s;
}

Scenario benchmark_with_bound(double x0, int N, double u_bar, double tau) {
  Scenario sc = scalar_benchmark(x0, 10.0, N, 5.0, 1.0, 0.5);
  sc.input_bound = Eigen::VectorXd::Constant(1, u_bar);
  sc.tau = tau;
  return sc;
}

}  // namespace

TEST_CASE("conservative bounds split u_bar between mean and perturbation") {
  const auto s = fixed_scalar_schedule({1.0 / 3.0, 16.0 / 3.0});
  const Eigen::VectorXd u_bar = Eigen::VectorXd::Constant(1, 4.0);

  const MeanBounds full = conservative_bounds(s, u_bar, 1.0);
  CHECK(full.delta_bar_seq[0][0] == doctest::Approx(1.0));
  CHECK(full.mu_bar_seq[0][0] == doctest::Approx(3.0));
  CHECK(full.delta_bar_seq[1][0] == doctest::Approx(4.0));
  CHECK(full.mu_bar_seq[1][0] == doctest::Approx(0.0));  // boundary is legal

  // tau = 0 reserves nothing for the perturbation.
  const MeanBounds none = conservative_bounds(s, u_bar, 0.0);
  CHECK(none.mu_bar_seq[0][0] == doctest::Approx(4.0));
  CHECK(none.mu_bar_seq[1][0] == doctest::Approx(4.0));
}

TEST_CASE("over-budget perturbation reports step and channel") {
  const auto s = fixed_scalar_schedule({0.1, 6.0});  // delta_bar_1 > 4
  try {
    conservative_bounds(s, Eigen::VectorXd::Constant(1, 4.0), 1.0);
    FAIL("expected OverConstrainedError");
  } catch (const OverConstrainedError& e) {
    CHECK(e.step() == 1);
    CHECK(e.channel() == 0);
  }
  CHECK_THROWS_AS(
      conservative_bounds(s, Eigen::VectorXd::Constant(1, -1.0), 1.0),
      ParameterError);
  CHECK_THROWS_AS(
      conservative_bounds(s, Eigen::VectorXd::Constant(1, 4.0), 1.5),
      ParameterError);
}

TEST_CASE("clamp_step zeroes the gain row of saturated channels") {
  Eigen::MatrixXd G(1, 1);
  G << 1.0;
  Eigen::VectorXd M = Eigen::VectorXd::Constant(1, 0.5);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 2.0);  // mu_unc = -1.5

  SUBCASE("interior when the bound is loose") {
    const ClampResult r =
        clamp_step(G, M, x, Eigen::VectorXd::Constant(1, 2.0));
    CHECK(r.modes[0] == ClampMode::Interior);
    CHECK(r.Gt == G);
    CHECK(r.Mt == M);
  }
  SUBCASE("saturates low") {
    const ClampResult r =
        clamp_step(G, M, x, Eigen::VectorXd::Constant(1, 1.0));
    CHECK(r.modes[0] == ClampMode::SatLow);
    CHECK(r.Gt(0, 0) == 0.0);
    CHECK(r.Mt[0] == -1.0);
  }
  SUBCASE("saturates high") {
    const ClampResult r = clamp_step(G, M, -x,  // mu_unc = +2.5
                                     Eigen::VectorXd::Constant(1, 1.0));
    CHECK(r.modes[0] == ClampMode::SatHigh);
    CHECK(r.Gt(0, 0) == 0.0);
    CHECK(r.Mt[0] == 1.0);
  }
}

TEST_CASE("assignment letters read step by step") {
  BranchAssignment a;
  a.modes = {{ClampMode::SatHigh, ClampMode::Interior},
             {ClampMode::Interior, ClampMode::SatLow}};
  CHECK(a.to_string() == "HI|IL");
}

TEST_CASE("enumerate with a loose bound returns the unconstrained policy") {
  const Scenario sc = benchmark_with_bound(20.0, 10, 1e6, 1.0);
  const PolicySchedule s = backward_solve(sc);
  const ConstrainedPolicy policy = enumerate_feasible(sc, s);

  CHECK(policy.feasible);
  for (int k = 0; k < 10; ++k) {
    CHECK(policy.assignment.modes[k][0] == ClampMode::Interior);
    CHECK(policy.Gt_seq[k] == s.G_seq[k]);
    CHECK(policy.Mt_seq[k] == s.M_seq[k]);
    // The perturbation budget is untouched by the mean clamp.
    CHECK(policy.sigma2_seq[k] == s.sigma2_seq[k]);
  }
}

TEST_CASE("benchmark with a binding bound saturates early then frees up") {
  const Scenario sc = benchmark_with_bound(2.0, 15, 4.0, 1.0);
  const PolicySchedule s = backward_solve(sc);
  const ConstrainedPolicy policy = enumerate_feasible(sc, s);

  REQUIRE(policy.feasible);
  CHECK(policy.assignment.modes[0][0] == ClampMode::SatLow);
  for (int k = 1; k < 15; ++k) {
    CHECK(policy.assignment.modes[k][0] == ClampMode::Interior);
  }
  // Saturated step: gain row zeroed, mean pinned to the bound.
  CHECK(policy.Gt_seq[0](0, 0) == 0.0);
  CHECK(policy.Mt_seq[0][0] == doctest::Approx(-policy.bounds.mu_bar_seq[0][0]));
}

TEST_CASE("offline assignment reproduces the online clamp, noiselessly") {
  for (double x0 : {2.0, 20.0}) {
    const Scenario sc = benchmark_with_bound(x0, 15, 4.0, 1.0);
    const PolicySchedule s = backward_solve(sc);
    const ConstrainedPolicy policy = enumerate_feasible(sc, s);
    REQUIRE(policy.feasible);

    const MeanBounds bounds = conservative_bounds(s, *sc.input_bound, sc.tau);
    const RandomSource rng(1);
    const Trajectory online = rollout_online(sc, s, bounds, rng, 0, true);
    const Trajectory offline = rollout(sc, policy, rng, 0, true);
    for (int k = 0; k < 15; ++k) {
      CHECK(std::abs(online.means[k][0] - offline.means[k][0]) <= 1e-10);
      CHECK(std::abs(online.states[k][0] - offline.states[k][0]) <= 1e-10);
    }
  }
}

TEST_CASE("feasibility check walks the mean path") {
  const Scenario sc = benchmark_with_bound(2.0, 15, 4.0, 1.0);
  const PolicySchedule s = backward_solve(sc);
  const MeanBounds bounds = conservative_bounds(s, *sc.input_bound, sc.tau);

  BranchAssignment good;
  good.modes.assign(15, {ClampMode::Interior});
  good.modes[0][0] = ClampMode::SatLow;
  FeasibilityTrace trace;
  CHECK(feasibility_check(good, s, bounds, sc, true, &trace));
  CHECK(trace.first_violation_step == -1);
  REQUIRE(static_cast<int>(trace.mu_seq.size()) == 15);
  for (int k = 0; k < 15; ++k) {
    CHECK(std::abs(trace.mu_seq[k][0]) <=
          bounds.mu_bar_seq[k][0] + 1e-12);
  }

  // All-Interior is inconsistent at step 0 (the unclamped mean is outside).
  BranchAssignment bad;
  bad.modes.assign(15, {ClampMode::Interior});
  FeasibilityTrace bad_trace;
  CHECK_FALSE(feasibility_check(bad, s, bounds, sc, true, &bad_trace));
  CHECK(bad_trace.first_violation_step == 0);
  CHECK_FALSE(bad_trace.reason.empty());
}

TEST_CASE("doubling the initial state keeps the search feasible") {
  // A harder start just saturates longer; the box conditions partition the
  // real line, so some assignment is always self-consistent.
  for (double x0 : {20.0, 40.0}) {
    const Scenario sc = benchmark_with_bound(x0, 15, 4.0, 1.0);
    const PolicySchedule s = backward_solve(sc);
    const ConstrainedPolicy policy = enumerate_feasible(sc, s);
    CHECK(policy.feasible);
  }
}

TEST_CASE("the self-consistent assignment is unique") {
  const Scenario sc = benchmark_with_bound(2.0, 5, 4.0, 1.0);
  const PolicySchedule s = backward_solve(sc);
  CHECK(count_feasible(sc, s, true) == 1);
  // Dropping self-consistency leaves the whole box-feasible family.
  CHECK(count_feasible(sc, s, false) >= 1);
}

TEST_CASE("deep horizons need an explicit capacity override") {
  const Scenario sc = benchmark_with_bound(2.0, 17, 4.0, 1.0);
  const PolicySchedule s = backward_solve(sc);
  CHECK_THROWS_AS(static_cast<void>(enumerate_feasible(sc, s)), CapacityError);

  EnumerateOptions opt;
  opt.max_depth = 17;
  const ConstrainedPolicy policy = enumerate_feasible(sc, s, opt);
  CHECK(policy.feasible);
}

TEST_CASE("enumerate requires an input bound") {
  Scenario sc = scalar_benchmark(2.0, 10.0, 5, 5.0, 1.0, 0.5);
  const PolicySchedule s = backward_solve(sc);
  CHECK_THROWS_AS(static_cast<void>(enumerate_feasible(sc, s)),
                  ParameterError);
}

TEST_CASE("online rollouts never leave the input box") {
  const Scenario sc = benchmark_with_bound(20.0, 15, 4.0, 1.0);
  const PolicySchedule s = backward_solve(sc);
  const MeanBounds bounds = conservative_bounds(s, *sc.input_bound, sc.tau);
  const RandomSource rng(77);
  for (const auto& traj : rollout_batch_online(sc, s, bounds, rng, 0, 64)) {
    for (const auto& u : traj.inputs) CHECK(std::abs(u[0]) <= 4.0);
  }
}
