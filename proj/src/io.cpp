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

#include "unpred/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include "unpred/errors.hpp"

namespace unpred {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw Error("to_chars failed");
  return std::string(buf, res.ptr);
}

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw ParameterError(field + ": expected a nested (row-major) array");
  }
  const size_t rows = j.size();
  const size_t cols = j.front().size();
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ParameterError(field + ": ragged rows");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) throw ParameterError(field + ": non-numeric entry");
      M(r, c) = j[r][c].get<double>();
    }
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ParameterError(field + ": expected an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParameterError(field + ": non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

namespace {

bool is_constant_form(const json& j) {
  return j.is_object() && j.value("constant", false);
}

std::vector<Eigen::MatrixXd> matrix_seq_from_json(const json& j,
                                                  const std::string& field,
                                                  int N) {
  std::vector<Eigen::MatrixXd> seq;
  if (is_constant_form(j)) {
    if (!j.contains("value")) {
      throw ParameterError(field + ": constant form needs a \"value\" key");
    }
    seq.assign(N, matrix_from_json(j.at("value"), field));
  } else if (j.is_array()) {
    for (size_t k = 0; k < j.size(); ++k) {
      seq.push_back(matrix_from_json(j[k], field + "[" + std::to_string(k) + "]"));
    }
  } else {
    throw ParameterError(field + ": expected a sequence or constant form");
  }
  return seq;
}

std::vector<double> scalar_seq_from_json(const json& j,
                                         const std::string& field, int N) {
  std::vector<double> seq;
  if (is_constant_form(j)) {
    if (!j.contains("value") || !j.at("value").is_number()) {
      throw ParameterError(field + ": constant form needs a numeric \"value\"");
    }
    seq.assign(N, j.at("value").get<double>());
  } else if (j.is_array()) {
    for (size_t k = 0; k < j.size(); ++k) {
      if (!j[k].is_number()) throw ParameterError(field + ": non-numeric entry");
      seq.push_back(j[k].get<double>());
    }
  } else {
    throw ParameterError(field + ": expected a sequence or constant form");
  }
  return seq;
}

json matrix_seq_to_json(const std::vector<Eigen::MatrixXd>& seq) {
  bool uniform = true;
  for (size_t k = 1; k < seq.size(); ++k) {
    if (seq[k] != seq[0]) {
      uniform = false;
      break;
    }
  }
  if (uniform && !seq.empty()) {
    return json{{"constant", true}, {"value", matrix_to_json(seq[0])}};
  }
  json arr = json::array();
  for (const auto& M : seq) arr.push_back(matrix_to_json(M));
  return arr;
}

json scalar_seq_to_json(const std::vector<double>& seq) {
  bool uniform = true;
  for (size_t k = 1; k < seq.size(); ++k) {
    if (seq[k] != seq[0]) {
      uniform = false;
      break;
    }
  }
  if (uniform && !seq.empty()) {
    return json{{"constant", true}, {"value", seq[0]}};
  }
  return json(seq);
}

template <typename T>
T require(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ParameterError("missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParameterError("key \"" + key + "\" has the wrong type");
  }
}

}  // namespace

json scenario_to_json(const Scenario& scenario) {
  const auto& sys = scenario.system;
  const auto& cost = scenario.cost;
  json j{{"n", sys.n},
         {"m", sys.m},
         {"q", sys.q},
         {"N", sys.N},
         {"T", scenario.T},
         {"A_seq", matrix_seq_to_json(sys.A_seq)},
         {"B_seq", matrix_seq_to_json(sys.B_seq)},
         {"H", matrix_to_json(cost.H)},
         {"Q_seq", matrix_seq_to_json(cost.Q_seq)},
         {"R_seq", matrix_seq_to_json(cost.R_seq)},
         {"lambda1", cost.lambda1},
         {"lambda2", cost.lambda2},
         {"lambda3_seq", scalar_seq_to_json(cost.lambda3_seq)},
         {"x0", vector_to_json(scenario.x0)},
         {"x_target", vector_to_json(cost.x_target)}};
  if (scenario.input_bound) {
    j["input_bound"] = vector_to_json(*scenario.input_bound);
    j["tau"] = scenario.tau;
  }
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  auto& sys = sc.system;
  sys.n = require<int>(j, "n");
  sys.m = require<int>(j, "m");
  sys.q = require<int>(j, "q");
  sys.N = require<int>(j, "N");
  sc.T = require<double>(j, "T");
  if (sys.n <= 0 || sys.m <= 0 || sys.q <= 0 || sys.N <= 0) {
    throw ParameterError("dimensions n, m, q, N must be positive");
  }
  if (sys.q > sys.n) throw ParameterError("q must satisfy q <= n");

  if (!j.contains("A_seq")) throw ParameterError("missing key \"A_seq\"");
  sys.A_seq = matrix_seq_from_json(j.at("A_seq"), "A_seq", sys.N);
  if (!j.contains("B_seq")) throw ParameterError("missing key \"B_seq\"");
  sys.B_seq = matrix_seq_from_json(j.at("B_seq"), "B_seq", sys.N);
  sys.C = Eigen::MatrixXd::Zero(sys.q, sys.n);
  sys.C.leftCols(sys.q).setIdentity();

  auto& cost = sc.cost;
  if (!j.contains("H")) throw ParameterError("missing key \"H\"");
  cost.H = matrix_from_json(j.at("H"), "H");
  if (!j.contains("Q_seq")) throw ParameterError("missing key \"Q_seq\"");
  cost.Q_seq = matrix_seq_from_json(j.at("Q_seq"), "Q_seq", sys.N);
  if (!j.contains("R_seq")) throw ParameterError("missing key \"R_seq\"");
  cost.R_seq = matrix_seq_from_json(j.at("R_seq"), "R_seq", sys.N);
  cost.lambda1 = require<double>(j, "lambda1");
  cost.lambda2 = require<double>(j, "lambda2");
  if (!j.contains("lambda3_seq")) {
    throw ParameterError("missing key \"lambda3_seq\"");
  }
  cost.lambda3_seq = scalar_seq_from_json(j.at("lambda3_seq"), "lambda3_seq",
                                          sys.N);
  if (!j.contains("x0")) throw ParameterError("missing key \"x0\"");
  sc.x0 = vector_from_json(j.at("x0"), "x0");
  if (!j.contains("x_target")) throw ParameterError("missing key \"x_target\"");
  cost.x_target = vector_from_json(j.at("x_target"), "x_target");

  if (j.contains("input_bound") && !j.at("input_bound").is_null()) {
    sc.input_bound = vector_from_json(j.at("input_bound"), "input_bound");
  }
  if (j.contains("tau")) sc.tau = require<double>(j, "tau");
  return sc;
}

Scenario load_scenario(const std::string& path) {
  return scenario_from_json(read_json(path));
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_json(scenario_to_json(scenario), path);
}

namespace {

json value_to_json(const ValueCoefficients& v) {
  json row = json::array();
  for (Eigen::Index i = 0; i < v.J2.size(); ++i) row.push_back(v.J2[i]);
  return json{{"J1", matrix_to_json(v.J1)}, {"J2", row}, {"J3", v.J3}};
}

json schedule_steps_json(const PolicySchedule& schedule) {
  json steps = json::array();
  for (int k = 0; k < schedule.horizon(); ++k) {
    json step = value_to_json(schedule.value_seq[k]);
    step["k"] = k;
    step["G"] = matrix_to_json(schedule.G_seq[k]);
    step["M"] = vector_to_json(schedule.M_seq[k]);
    step["P"] = matrix_to_json(schedule.P_seq[k]);
    step["sigma2"] = vector_to_json(schedule.sigma2_seq[k]);
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace

json schedule_to_json(const PolicySchedule& schedule) {
  return json{{"N", schedule.horizon()},
              {"steps", schedule_steps_json(schedule)},
              {"terminal", value_to_json(schedule.value_seq.back())}};
}

json constrained_to_json(const PolicySchedule& schedule,
                         const ConstrainedPolicy& policy) {
  json j = schedule_to_json(schedule);
  json& steps = j["steps"];
  const int covered = static_cast<int>(policy.Gt_seq.size());
  for (int k = 0; k < covered; ++k) {
    steps[k]["Gt"] = matrix_to_json(policy.Gt_seq[k]);
    steps[k]["Mt"] = vector_to_json(policy.Mt_seq[k]);
    steps[k]["mu_bar"] = vector_to_json(policy.bounds.mu_bar_seq[k]);
    std::string modes;
    for (ClampMode mode : policy.assignment.modes[k]) {
      modes += mode_letter(mode);
    }
    steps[k]["mode"] = modes;
  }
  j["u_bar"] = vector_to_json(policy.bounds.u_bar);
  j["tau"] = policy.bounds.tau;
  j["feasible"] = policy.feasible;
  j["diagnostics"] = policy.diagnostics;
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw Error("short write to " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParameterError(path + ": " + e.what());
  }
}

}  // namespace unpred
