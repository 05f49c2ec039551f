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

#include "lane_ref.hpp"
#include "unpred/kernels/rollout_kernels.hpp"

namespace unpred::kernels {

void rollout_scalar(const ScalarRolloutPlan& plan, double x0,
                    std::uint64_t seed, std::uint64_t stream0,
                    ScalarRolloutBatch& out) {
  detail::rollout_lanes_ref(plan, x0, seed, stream0, out, 0, out.lanes);
}

void uniform_scalar(std::uint64_t seed, std::uint64_t stream,
                    std::uint64_t index0, double bound, int count,
                    double* out) {
  detail::uniform_lanes_ref(seed, stream, index0, bound, 0, count, out);
}

}  // namespace unpred::kernels
