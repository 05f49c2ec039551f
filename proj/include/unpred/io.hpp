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

// JSON serialization of scenarios and solved policies.
//
// Scenario files carry row-major nested arrays; a time-varying sequence may
// be abbreviated as {"constant": true, "value": <matrix>}. See
// tests/data/*.json for samples.

#pragma once

#include <string>

#include "json.hpp"
#include "unpred/constrained.hpp"
#include "unpred/dp.hpp"
#include "unpred/system.hpp"

namespace unpred {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& field);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& field);

nlohmann::json scenario_to_json(const Scenario& scenario);
// Throws ParameterError with the offending key on malformed input.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& scenario, const std::string& path);

// Per-step records {k, G, M, P, sigma2, J1, J2, J3} plus terminal value
// coefficients; the constrained form extends each step with
// {Gt, Mt, mode, mu_bar}.
nlohmann::json schedule_to_json(const PolicySchedule& schedule);
nlohmann::json constrained_to_json(const PolicySchedule& schedule,
                                   const ConstrainedPolicy& policy);

void write_json(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json(const std::string& path);

// Shortest-roundtrip decimal form of a double (std::to_chars), locale-free.
std::string format_double(double value);

}  // namespace unpred
