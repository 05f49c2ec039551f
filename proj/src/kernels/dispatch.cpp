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

#include <cstdlib>
#include <string>

#include "unpred/errors.hpp"
#include "unpred/kernels/rollout_kernels.hpp"

namespace unpred::kernels {

void rollout_scalar(const ScalarRolloutPlan&, double, std::uint64_t,
                    std::uint64_t, ScalarRolloutBatch&);
void uniform_scalar(std::uint64_t, std::uint64_t, std::uint64_t, double, int,
                    double*);
#if defined(UNPRED_HAVE_AVX2)
void rollout_avx2(const ScalarRolloutPlan&, double, std::uint64_t,
                  std::uint64_t, ScalarRolloutBatch&);
void uniform_avx2(std::uint64_t, std::uint64_t, std::uint64_t, double, int,
                  double*);
#endif

namespace {

const KernelTable kScalarTable{rollout_scalar, uniform_scalar, "scalar"};
#if defined(UNPRED_HAVE_AVX2)
const KernelTable kAvx2Table{rollout_avx2, uniform_avx2, "avx2"};
#endif

}  // namespace

bool avx2_available() {
#if defined(UNPRED_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable& table(Backend backend) {
#if defined(UNPRED_HAVE_AVX2)
  if (backend == Backend::Avx2 && avx2_available()) return kAvx2Table;
#else
  (void)backend;
#endif
  return kScalarTable;
}

const KernelTable& active() {
  static const KernelTable* selected = [] {
    if (const char* env = std::getenv("UNPRED_KERNEL")) {
      const std::string want(env);
      if (want == "scalar") return &kScalarTable;
      if (want == "avx2") {
        if (!avx2_available()) {
          throw ParameterError("UNPRED_KERNEL=avx2 but AVX2 is unavailable");
        }
        return &table(Backend::Avx2);
      }
      throw ParameterError("unknown UNPRED_KERNEL value '" + want +
                           "' (expected scalar or avx2)");
    }
    return &table(avx2_available() ? Backend::Avx2 : Backend::Scalar);
  }();
  return *selected;
}

}  // namespace unpred::kernels
