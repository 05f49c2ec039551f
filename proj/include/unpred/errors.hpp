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

#include <stdexcept>
#include <string>

namespace unpred {

// Base class for every error thrown by the library. The CLI maps these to
// process exit codes; see tools/main.cpp.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix or vector has the wrong dimensions for the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A step index k lies outside the horizon of the object it addresses.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or parameter values (bad weights, bad JSON, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be positive definite failed its Cholesky factorization.
class SolverDegeneracyError : public Error {
 public:
  SolverDegeneracyError(int step, const std::string& what)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Input bound minus the perturbation allowance went negative: no mean budget
// is left at (step, channel).
class OverConstrainedError : public Error {
 public:
  OverConstrainedError(int step, int channel, const std::string& what)
      : Error(what), step_(step), channel_(channel) {}
  int step() const { return step_; }
  int channel() const { return channel_; }

 private:
  int step_;
  int channel_;
};

// A combinatorial search would exceed its configured size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The Kalman filter's innovation covariance is not invertible and the
// situation is not the benign zero-information case.
class FilterDegeneracyError : public Error {
 public:
  FilterDegeneracyError(int step, const std::string& what)
      : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace unpred
