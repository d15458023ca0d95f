#include "rqpd/sampling.hpp"

#include <cmath>

namespace rqpd {

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t index) {
  // splitmix-style mixing of (seed, index) into one stream seed
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z = z ^ (z >> 31);
  return std::mt19937_64(z);
}

Mat haar_ket(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat v(d, 1);
  for (int i = 0; i < d; ++i) v(i, 0) = cplx(n(rng), n(rng));
  double nrm = v.frob_norm();
  v *= cplx(1.0 / nrm, 0.0);
  return v;
}

Mat haar_pure(int d, std::mt19937_64& rng) {
  Mat v = haar_ket(d, rng);
  return v * v.dagger();
}

Mat random_density_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
  Mat r = g * g.dagger();
  r *= cplx(1.0 / r.trace().real(), 0.0);
  return r;
}

Mat random_hermitian_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
  return g.hermitize();
}

Mat random_unitary_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
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

}  // namespace rqpd
