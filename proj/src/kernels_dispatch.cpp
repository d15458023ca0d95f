#include <cstdlib>
#include <stdexcept>

#include "rqpd/kernels.hpp"

namespace rqpd::kern {

#ifdef RQPD_BUILD_AVX2
const Kernels& avx2_kernels();
#endif

bool avx2_available() {
#ifdef RQPD_BUILD_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {
const Kernels& select() {
  const char* env = std::getenv("RQPD_KERNELS");
  if (env) {
    std::string want(env);
    if (want == "scalar") return scalar_kernels();
#ifdef RQPD_BUILD_AVX2
    if (want == "avx2" && avx2_available()) return avx2_kernels();
#endif
  }
#ifdef RQPD_BUILD_AVX2
  if (avx2_available()) return avx2_kernels();
#endif
  return scalar_kernels();
}
}  // namespace

const Kernels& active() {
  static const Kernels& k = select();
  return k;
}

const Kernels& lane(const std::string& name) {
  if (name == "scalar") return scalar_kernels();
#ifdef RQPD_BUILD_AVX2
  if (name == "avx2" && avx2_available()) return avx2_kernels();
#endif
  throw std::runtime_error("kernel lane not available: " + name);
}

}  // namespace rqpd::kern
