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

// Brute-force value iteration for scalar (n = m = 1) scenarios. Knows nothing
// about the solver's closed forms: the value function lives on an x-grid, the
// expectation over the uniform perturbation is Gauss-Legendre quadrature, and
// the per-state (mu, sigma2) minimization is scan + golden-section + a final
// parabolic polish. Quadratic interpolation between grid nodes reproduces
// polynomials of degree <= 2 exactly, so the only error left is the inner
// optimizer's, which lands near machine precision on these convex objectives.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "unpred/system.hpp"

namespace unpred::test {

namespace bellman_detail {

// Gauss-Legendre nodes/weights, order 8, on [-1, 1].
inline constexpr double kGlNode[8] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
inline constexpr double kGlWeight[8] = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// Quadratic (3-point) Lagrange interpolation on a uniform grid; queries
// outside the grid extrapolate with the edge stencil, which is still exact
// for globally quadratic data.
inline double interp3(const std::vector<double>& xs,
                      const std::vector<double>& vs, double x) {
  const int n = static_cast<int>(xs.size());
  const double h = xs[1] - xs[0];
  int i = static_cast<int>(std::lround((x - xs[0]) / h));
  i = std::clamp(i, 1, n - 2);
  const double x0 = xs[i - 1], x1 = xs[i], x2 = xs[i + 1];
  const double l0 = (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2));
  const double l1 = (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2));
  const double l2 = (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
  return l0 * vs[i - 1] + l1 * vs[i] + l2 * vs[i + 1];
}

// Golden-section minimum of f on [lo, hi] (f unimodal there).
inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, int iters, double* arg = nullptr) {
  const double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < iters && b - a > 0.0; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  if (arg != nullptr) *arg = mid;
  return f(mid);
}

// One exact parabola-vertex step from three samples around x (final polish;
// lands on the vertex when f is quadratic).
inline double parabolic_polish(const std::function<double(double)>& f,
                               double x, double h, double* arg = nullptr) {
  const double f0 = f(x - h), f1 = f(x), f2 = f(x + h);
  const double denom = f0 - 2.0 * f1 + f2;
  double xv = x;
  if (denom > 0.0) xv = x + 0.5 * h * (f0 - f2) / denom;
  const double fv = f(xv);
  if (arg != nullptr) *arg = fv < f1 ? xv : x;
  return std::min(fv, f1);
}

}  // namespace bellman_detail

struct BellmanOracleOptions {
  int nodes = 161;       // x-grid size (odd)
  double span = 0.0;     // half-width of the grid; 0 = auto from x0/x_target
  int sweeps = 3;        // coordinate-descent sweeps over (mu, sigma2)
  int golden_iters = 120;
};

// True optimal expected cost from x0 for a scalar scenario, by numeric
// closed-loop dynamic programming. Ignores input bounds.
inline double bellman_oracle_value(const Scenario& sc, double x0,
                                   const BellmanOracleOptions& opt = {}) {
  using namespace bellman_detail;
  const auto& sys = sc.system;
  const auto& cost = sc.cost;
  if (sys.n != 1 || sys.m != 1) {
    throw std::invalid_argument("bellman oracle is scalar-only");
  }
  const int N = sys.N;
  const double t = cost.x_target[0];

  double span = opt.span;
  if (span <= 0.0) span = 8.0 * std::max({1.0, std::abs(x0), std::abs(t)});
  const int nodes = opt.nodes;
  std::vector<double> xs(nodes);
  for (int i = 0; i < nodes; ++i) {
    xs[i] = -span + 2.0 * span * static_cast<double>(i) / (nodes - 1);
  }

  // Terminal layer.
  std::vector<double> V(nodes), Vnext(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double d = xs[i] - t;
    Vnext[i] = cost.lambda1 * cost.H(0, 0) * d * d;
  }

  for (int k = N - 1; k >= 0; --k) {
    const double A = sys.A_seq[k](0, 0);
    const double B = sys.B_seq[k](0, 0);
    const double Q = cost.Q_seq[k](0, 0);
    const double R = cost.R_seq[k](0, 0);
    const double l2 = cost.lambda2;
    const double l3 = cost.lambda3_seq[k];

    for (int i = 0; i < nodes; ++i) {
      const double x = xs[i];
      // Expected stage-plus-future cost of playing (mu, sigma2) at x, with
      // the expectation over delta ~ U[-sqrt(3 sigma2), sqrt(3 sigma2)]
      // taken by quadrature against the interpolated next layer.
      const auto objective = [&](double mu, double s2) {
        double val = l2 * Q * x * x;
        if (s2 > 0.0) {
          val += l3 / s2;
          const double db = std::sqrt(3.0 * s2);
          double acc = 0.0;
          for (int j = 0; j < 8; ++j) {
            const double u = mu + db * kGlNode[j];
            acc += kGlWeight[j] *
                   (l2 * R * u * u + interp3(xs, Vnext, A * x + B * u));
          }
          val += 0.5 * acc;  // weights sum to 2
        } else {
          if (l3 > 0.0) return std::numeric_limits<double>::infinity();
          val += l2 * R * mu * mu + interp3(xs, Vnext, A * x + B * mu);
        }
        return val;
      };

      double mu = 0.0, s2 = l3 > 0.0 ? 0.5 : 0.0;
      for (int sweep = 0; sweep < opt.sweeps; ++sweep) {
        // mu pass: widen the bracket until the minimum is interior.
        double r = 10.0 * (1.0 + (std::abs(A * x) + std::abs(t) + 1.0) /
                                     std::max(std::abs(B), 0.2));
        const auto fmu = [&](double m) { return objective(m, s2); };
        for (int tries = 0; tries < 8; ++tries) {
          double best = mu;
          double fbest = std::numeric_limits<double>::infinity();
          for (int s = 0; s <= 40; ++s) {
            const double cand = mu - r + 2.0 * r * s / 40.0;
            const double fc = fmu(cand);
            if (fc < fbest) {
              fbest = fc;
              best = cand;
            }
          }
          if (std::abs(best - mu) < 0.9 * r) {
            const double h = r / 20.0;
            golden_min(fmu, best - h, best + h, opt.golden_iters, &mu);
            parabolic_polish(fmu, mu, 1e-4 * (1.0 + std::abs(mu)), &mu);
            break;
          }
          mu = best;
          r *= 2.0;
        }
        if (l3 > 0.0) {
          // sigma2 pass in log space (objective ~ c/s2 + d*s2, convex).
          const auto fs2 = [&](double y) { return objective(mu, std::exp(y)); };
          double y = 0.0;
          golden_min(fs2, std::log(1e-7), std::log(40.0), 160, &y);
          s2 = std::exp(y);
          const auto fs = [&](double s) {
            return s > 0.0 ? objective(mu, s)
                           : std::numeric_limits<double>::infinity();
          };
          parabolic_polish(fs, s2, 1e-5 * s2, &s2);
        }
      }
      V[i] = objective(mu, s2);
    }
    std::swap(V, Vnext);
  }
  return interp3(xs, Vnext, x0);
}

}  // namespace unpred::test
