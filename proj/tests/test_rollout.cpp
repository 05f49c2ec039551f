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
#include <algorithm>
#include <cmath>

#include "support/scenario_factory.hpp"
#include "unpred/constrained.hpp"
#include "unpred/dp.hpp"
#include "unpred/errors.hpp"
#include "unpred/rollout.hpp"
#include "unpred/system.hpp"

using namespace unpred;

namespace {

Scenario one_step_scenario() {
  Scenario sc;
  sc.system = TimeVaryingLinearSystem::constant(
      Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
      Eigen::MatrixXd::Identity(1, 1), 1);
  sc.cost.H = Eigen::MatrixXd::Identity(1, 1);
  sc.cost.Q_seq.assign(1, Eigen::MatrixXd::Zero(1, 1));
  sc.cost.R_seq.assign(1, Eigen::MatrixXd::Identity(1, 1));
  sc.cost.lambda1 = 1.0;
  sc.cost.lambda2 = 1.0;
  sc.cost.lambda3_seq.assign(1, 0.5);
  sc.cost.x_target = Eigen::VectorXd::Zero(1);
  sc.x0 = Eigen::VectorXd::Constant(1, 2.0);
  sc.T = 1.0;
  return sc;
}

}  // namespace

TEST_CASE("perturbations are uniform with the requested variance") {
  DrawStream stream(99, 0);
  const Eigen::VectorXd s2 = Eigen::VectorXd::Constant(1, 0.75);
  const double half_width = std::sqrt(3.0 * 0.75);  // 1.5

  const int draws = 200000;
  double sum = 0.0, sum_sq = 0.0, max_abs = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double d = sample_perturbation(s2, stream)[0];
    sum += d;
    sum_sq += d * d;
    max_abs = std::max(max_abs, std::abs(d));
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(max_abs <= half_width);
  CHECK(std::abs(var - 0.75) <= 0.01 * 0.75);
  // SE of the mean is sqrt(0.75/draws) ~ 1.9e-3.
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(0.75 / draws));
}

TEST_CASE("zero variance draws are exactly zero but still advance the stream") {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  DrawStream a(5, 3), b(5, 3);
  const Eigen::VectorXd d = sample_perturbation(zero, a);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  b.skip(2);
  // Both streams must now be at the same position.
  CHECK(a.take_bits() == b.take_bits());
}

TEST_CASE("negative or non-finite variances are rejected") {
  DrawStream stream(1, 1);
  CHECK_THROWS_AS(
      static_cast<void>(
          sample_perturbation(Eigen::VectorXd::Constant(1, -0.1), stream)),
      ParameterError);
  CHECK_THROWS_AS(
      static_cast<void>(sample_perturbation(
          Eigen::VectorXd::Constant(1, std::nan("")), stream)),
      ParameterError);
}

TEST_CASE("rollouts are reproducible and order-independent") {
  const Scenario sc = scalar_benchmark(20.0, 10.0, 50, 5.0, 1.0, 0.5);
  const PolicySchedule s = backward_solve(sc);
  const RandomSource rng(12345);

  const Trajectory direct = rollout(sc, s, rng, 5);
  const auto batch = rollout_batch(sc, s, rng, 0, 10);
  REQUIRE(static_cast<int>(batch.size()) == 10);
  for (int k = 0; k <= 50; ++k) {
    CHECK(batch[5].states[k][0] == direct.states[k][0]);
  }
  for (int k = 0; k < 50; ++k) {
    CHECK(batch[5].inputs[k][0] == direct.inputs[k][0]);
    CHECK(batch[5].perturbations[k][0] == direct.perturbations[k][0]);
  }
  // Same run re-simulated: identical. Different run: different noise.
  const Trajectory again = rollout(sc, s, rng, 5);
  CHECK(again.states[50][0] == direct.states[50][0]);
  const Trajectory other = rollout(sc, s, rng, 6);
  CHECK(other.perturbations[0][0] != direct.perturbations[0][0]);
}

TEST_CASE("trajectories obey the plant recursion and the output map") {
  std::mt19937_64 gen(11);
  test::RandomLtvOptions opt;
  opt.N_max = 12;
  const Scenario sc = test::random_ltv_scenario(gen, opt);
  const PolicySchedule s = backward_solve(sc);
  const Trajectory traj = rollout(sc, s, RandomSource(3), 0);

  REQUIRE(traj.horizon() == sc.system.N);
  CHECK(traj.states[0] == sc.x0);
  for (int k = 0; k < sc.system.N; ++k) {
    CHECK(traj.inputs[k] == traj.means[k] + traj.perturbations[k]);
    const Eigen::VectorXd expect = step(sc.system, traj.states[k],
                                        traj.inputs[k], k);
    CHECK((traj.states[k + 1] - expect).norm() == 0.0);
    CHECK((traj.outputs[k] - sc.system.C * traj.states[k]).norm() == 0.0);
    // Perturbations respect the schedule's support.
    for (int i = 0; i < sc.system.m; ++i) {
      CHECK(std::abs(traj.perturbations[k][i]) <=
            std::sqrt(3.0 * s.sigma2_seq[k][i]));
    }
  }
}

TEST_CASE("lambda3 = 0 rollouts are deterministic across seeds") {
  const Scenario sc = scalar_benchmark(20.0, 10.0, 30, 5.0, 1.0, 0.0);
  const PolicySchedule s = backward_solve(sc);
  const Trajectory a = rollout(sc, s, RandomSource(1), 0);
  const Trajectory b = rollout(sc, s, RandomSource(999), 42);
  for (int k = 0; k <= 30; ++k) CHECK(a.states[k][0] == b.states[k][0]);
  for (int k = 0; k < 30; ++k) CHECK(a.perturbations[k][0] == 0.0);
}

TEST_CASE("zero-noise flag freezes the mean path") {
  const Scenario sc = scalar_benchmark(20.0, 10.0, 30, 5.0, 1.0, 0.5);
  const PolicySchedule s = backward_solve(sc);
  const Trajectory traj = rollout(sc, s, RandomSource(8), 0, true);
  const auto [moments, cost] = propagate_moments(sc, s);
  for (int k = 0; k <= 30; ++k) {
    CHECK(traj.states[k][0] == doctest::Approx(moments[k].mean[0]));
  }
}

TEST_CASE("one-step moments and cost, worked by hand") {
  // x0 = 2, A = B = 1, G = 1/2, M = 0, sigma2 = 1/2:
  //   E[x1] = 1, Var[x1] = 1/2,
  //   terminal = 1 + 1/2, running = 1 + 1/2, utility = 1, total = 4.
  const Scenario sc = one_step_scenario();
  const PolicySchedule s = backward_solve(sc);
  const auto [moments, cost] = propagate_moments(sc, s);

  REQUIRE(static_cast<int>(moments.size()) == 2);
  CHECK(moments[0].mean[0] == 2.0);
  CHECK(moments[0].cov(0, 0) == 0.0);
  CHECK(moments[1].mean[0] == doctest::Approx(1.0));
  CHECK(moments[1].cov(0, 0) == doctest::Approx(0.5));
  CHECK(cost.terminal == doctest::Approx(1.5));
  CHECK(cost.running == doctest::Approx(1.5));
  CHECK(cost.utility == doctest::Approx(1.0));
  CHECK(cost.total == doctest::Approx(4.0));
}

TEST_CASE("realized quadratic cost of the noiseless run") {
  const Scenario sc = one_step_scenario();
  const PolicySchedule s = backward_solve(sc);
  const Trajectory traj = rollout(sc, s, RandomSource(0), 0, true);
  // u = -1, x1 = 1: running 1, terminal 1.
  CHECK(trajectory_cost(sc, traj) == doctest::Approx(2.0));
}

TEST_CASE("Monte Carlo mean agrees with the exact moments") {
  const Scenario sc = one_step_scenario();
  const PolicySchedule s = backward_solve(sc);
  const auto [moments, cost] = propagate_moments(sc, s);
  const MonteCarloResult mc = monte_carlo_cost(sc, s, RandomSource(4), 20000);

  CHECK(mc.runs == 20000);
  CHECK(mc.utility == doctest::Approx(1.0));
  CHECK(std::abs(mc.mean - cost.total) <= 4.0 * mc.std_error);

  const Scenario bench = scalar_benchmark(20.0, 10.0, 50, 5.0, 1.0, 0.5);
  const PolicySchedule bs = backward_solve(bench);
  const auto [bm, bc] = propagate_moments(bench, bs);
  const MonteCarloResult bmc =
      monte_carlo_cost(bench, bs, RandomSource(4), 4000);
  CHECK(std::abs(bmc.mean - bc.total) <= 4.0 * bmc.std_error);
}

TEST_CASE("constrained moments agree with constrained Monte Carlo") {
  Scenario sc = scalar_benchmark(2.0, 10.0, 15, 5.0, 1.0, 0.5);
  sc.input_bound = Eigen::VectorXd::Constant(1, 4.0);
  const PolicySchedule s = backward_solve(sc);
  const ConstrainedPolicy policy = enumerate_feasible(sc, s);
  REQUIRE(policy.feasible);

  const auto [moments, cost] = propagate_moments(sc, policy);
  const MonteCarloResult mc =
      monte_carlo_cost(sc, policy, RandomSource(21), 4000);
  CHECK(std::abs(mc.mean - cost.total) <= 4.0 * mc.std_error);
  // The offline policy's sigma2 equals the unconstrained one, so the
  // utility terms coincide.
  const auto [um, uc] = propagate_moments(sc, s);
  CHECK(cost.utility == doctest::Approx(uc.utility));
}

TEST_CASE("standard normal helper has the right first two moments") {
  DrawStream stream(123, 7);
  const int draws = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double z = stream.normal();
    sum += z;
    sum_sq += z * z;
  }
  const double mean = sum / draws;
  const double var = sum_sq / draws - mean * mean;
  CHECK(std::abs(mean) <= 4.0 / std::sqrt(static_cast<double>(draws)));
  CHECK(std::abs(var - 1.0) <= 0.02);
}
