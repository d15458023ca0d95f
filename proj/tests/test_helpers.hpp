#ifndef RQPD_TEST_HELPERS_HPP
#define RQPD_TEST_HELPERS_HPP

#include <random>

#include "rqpd/matrix.hpp"
#include "rqpd/operator_core.hpp"

namespace rqpd::test {

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Mat random_matrix(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline Mat random_hermitian(int d, std::mt19937_64& rng) {
  Mat g = random_matrix(d, d, rng);
  return g.hermitize();
}

inline Mat random_density(int d, std::mt19937_64& rng) {
  Mat g = random_matrix(d, d, rng);
  Mat r = g * g.dagger();
  r *= cplx(1.0 / r.trace().real(), 0.0);
  return r;
}

inline Mat random_pure(int d, std::mt19937_64& rng) {
  Mat v = random_matrix(d, 1, rng);
  double nrm = v.frob_norm();
  v *= cplx(1.0 / nrm, 0.0);
  return v * v.dagger();
}

inline Mat random_unitary(int d, std::mt19937_64& rng) {
  // Gram-Schmidt on a random Gaussian matrix
  Mat g = random_matrix(d, d, rng);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < j; ++k) {
      cplx ov(0.0);
      for (int i = 0; i < d; ++i) ov += std::conj(g(i, k)) * g(i, j);
      for (int i = 0; i < d; ++i) g(i, j) -= ov * g(i, k);
    }
    double nrm = 0.0;
    for (int i = 0; i < d; ++i) nrm += std::norm(g(i, j));
    nrm = std::sqrt(nrm);
    for (int i = 0; i < d; ++i) g(i, j) /= nrm;
  }
  return g;
}

// Common gates
inline Mat gate_X() {
  Mat m(2, 2);
  m(0, 1) = 1;
  m(1, 0) = 1;
  return m;
}
inline Mat gate_Y() {
  Mat m(2, 2);
  m(0, 1) = cplx(0, -1);
  m(1, 0) = cplx(0, 1);
  return m;
}
inline Mat gate_Z() {
  Mat m(2, 2);
  m(0, 0) = 1;
  m(1, 1) = -1;
  return m;
}
inline Mat gate_H() {
  Mat m(2, 2);
  double s = 1.0 / std::sqrt(2.0);
  m(0, 0) = s;
  m(0, 1) = s;
  m(1, 0) = s;
  m(1, 1) = -s;
  return m;
}
inline Mat gate_CNOT() {
  Mat m = Mat::identity(4);
  m(2, 2) = 0;
  m(3, 3) = 0;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

}  // namespace rqpd::test

#endif
