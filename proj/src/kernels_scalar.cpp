#include "rqpd/kernels.hpp"

namespace rqpd::kern {

namespace {

void zgemm_scalar(std::size_t m, std::size_t k, std::size_t n, const cplx* A,
                  const cplx* B, cplx* C, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) C[i] = cplx(0.0, 0.0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const cplx* arow = A + i * k;
    cplx* crow = C + i * n;
    for (std::size_t l = 0; l < k; ++l) {
      const cplx a = arow[l];
      if (a == cplx(0.0, 0.0)) continue;
      const cplx* brow = B + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += a * brow[j];
    }
  }
}

void zaxpy_scalar(std::size_t n, cplx a, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

cplx zdotc_scalar(std::size_t n, const cplx* x, const cplx* y) {
  cplx s(0.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double ddot_scalar(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void daxpy_scalar(std::size_t n, double a, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {zgemm_scalar, zaxpy_scalar, zdotc_scalar,
                            ddot_scalar,  daxpy_scalar, "scalar"};
  return k;
}

}  // namespace rqpd::kern
