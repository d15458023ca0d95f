#include <immintrin.h>

#include "rqpd/kernels.hpp"

// AVX2 lane. A complex<double> is two adjacent doubles (re, im); one __m256d
// holds two complex values. Complex multiply-accumulate uses the usual
// permute + fmaddsub pattern.

namespace rqpd::kern {

namespace {

// c += a * b for two packed complex values.
inline __m256d cmul_acc(__m256d c, __m256d are, __m256d aim, __m256d b) {
  __m256d bsw = _mm256_permute_pd(b, 0x5);  // swap re/im within each complex
  // are*b +/- aim*bsw with (-,+) pattern: (ar*br - ai*bi, ar*bi + ai*br)
  return _mm256_add_pd(c, _mm256_fmaddsub_pd(are, b, _mm256_mul_pd(aim, bsw)));
}

void zgemm_avx2(std::size_t m, std::size_t k, std::size_t n, const cplx* A,
                const cplx* B, cplx* C, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) C[i] = cplx(0.0, 0.0);
  }
  const double* b = reinterpret_cast<const double*>(B);
  const std::size_t n2 = (n / 2) * 2;
  for (std::size_t i = 0; i < m; ++i) {
    const cplx* arow = A + i * k;
    double* crow = reinterpret_cast<double*>(C + i * n);
    for (std::size_t l = 0; l < k; ++l) {
      const cplx a = arow[l];
      if (a == cplx(0.0, 0.0)) continue;
      const __m256d are = _mm256_set1_pd(a.real());
      const __m256d aim = _mm256_set1_pd(a.imag());
      const double* brow = b + 2 * l * n;
      std::size_t j = 0;
      for (; j + 4 <= n2; j += 4) {
        __m256d c0 = _mm256_loadu_pd(crow + 2 * j);
        __m256d c1 = _mm256_loadu_pd(crow + 2 * j + 4);
        c0 = cmul_acc(c0, are, aim, _mm256_loadu_pd(brow + 2 * j));
        c1 = cmul_acc(c1, are, aim, _mm256_loadu_pd(brow + 2 * j + 4));
        _mm256_storeu_pd(crow + 2 * j, c0);
        _mm256_storeu_pd(crow + 2 * j + 4, c1);
      }
      for (; j < n2; j += 2) {
        __m256d c0 = _mm256_loadu_pd(crow + 2 * j);
        c0 = cmul_acc(c0, are, aim, _mm256_loadu_pd(brow + 2 * j));
        _mm256_storeu_pd(crow + 2 * j, c0);
      }
      for (; j < n; ++j) {
        C[i * n + j] += a * B[l * n + j];
      }
    }
  }
}

void zaxpy_avx2(std::size_t n, cplx a, const cplx* x, cplx* y) {
  const __m256d are = _mm256_set1_pd(a.real());
  const __m256d aim = _mm256_set1_pd(a.imag());
  const double* xd = reinterpret_cast<const double*>(x);
  double* yd = reinterpret_cast<double*>(y);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    yv = cmul_acc(yv, are, aim, _mm256_loadu_pd(xd + 2 * i));
    _mm256_storeu_pd(yd + 2 * i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

cplx zdotc_avx2(std::size_t n, const cplx* x, const cplx* y) {
  const double* xd = reinterpret_cast<const double*>(x);
  const double* yd = reinterpret_cast<const double*>(y);
  // accumulate (xr*yr + xi*yi) into re slots and (xr*yi - xi*yr) into im slots
  __m256d accre = _mm256_setzero_pd();
  __m256d accim = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    __m256d yv = _mm256_loadu_pd(yd + 2 * i);
    __m256d ysw = _mm256_permute_pd(yv, 0x5);
    accre = _mm256_fmadd_pd(xv, yv, accre);    // xr*yr, xi*yi pairs
    accim = _mm256_fmadd_pd(xv, ysw, accim);   // xr*yi, xi*yr pairs
  }
  double re4[4], im4[4];
  _mm256_storeu_pd(re4, accre);
  _mm256_storeu_pd(im4, accim);
  double re = re4[0] + re4[1] + re4[2] + re4[3];
  double im = (im4[0] - im4[1]) + (im4[2] - im4[3]);
  cplx s(re, im);
  for (; i < n; ++i) s += std::conj(x[i]) * y[i];
  return s;
}

double ddot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double a4[4];
  _mm256_storeu_pd(a4, acc);
  double s = a4[0] + a4[1] + a4[2] + a4[3];
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void daxpy_avx2(std::size_t n, double a, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels k = {zgemm_avx2, zaxpy_avx2, zdotc_avx2,
                            ddot_avx2,  daxpy_avx2, "avx2"};
  return k;
}

}  // namespace rqpd::kern
