#ifndef RQPD_KERNELS_HPP
#define RQPD_KERNELS_HPP

#include <complex>
#include <cstddef>
#include <string>

namespace rqpd::kern {

using cplx = std::complex<double>;

// Low-level dense kernels behind all matrix arithmetic. Scalar versions are
// the reference semantics; vector variants must agree with them to roundoff
// and are selected once at startup based on the host CPU (override with
// RQPD_KERNELS=scalar|avx2 in the environment).
struct Kernels {
  // C (m x n) = A (m x k) * B (k x n), row-major contiguous. beta=0 overwrites,
  // beta=1 accumulates into C.
  void (*zgemm)(std::size_t m, std::size_t k, std::size_t n, const cplx* A,
                const cplx* B, cplx* C, bool accumulate);
  // y += a * x
  void (*zaxpy)(std::size_t n, cplx a, const cplx* x, cplx* y);
  // sum conj(x[i]) * y[i]
  cplx (*zdotc)(std::size_t n, const cplx* x, const cplx* y);
  double (*ddot)(std::size_t n, const double* x, const double* y);
  void (*daxpy)(std::size_t n, double a, const double* x, double* y);
  const char* name;
};

const Kernels& active();
const Kernels& scalar_kernels();
bool avx2_available();
// For tests: fetch a specific lane ("scalar", "avx2"); throws if not built in.
const Kernels& lane(const std::string& name);

}  // namespace rqpd::kern

#endif
