#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "rqpd/kernels.hpp"

using namespace rqpd;
using kern::cplx;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& x : v) x = cplx(d(rng), d(rng));
  return v;
}

std::vector<double> random_dvec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("vector lanes agree with the scalar reference") {
  const auto& ref = kern::scalar_kernels();
  std::vector<const kern::Kernels*> lanes{&kern::active()};
  if (kern::avx2_available()) lanes.push_back(&kern::lane("avx2"));

  std::mt19937_64 rng(12345);
  for (const auto* k : lanes) {
    // zgemm over assorted shapes, including odd sizes and empty-ish ones
    for (auto [m, kk, n] : {std::tuple{1, 1, 1}, {2, 3, 5}, {7, 4, 9}, {8, 8, 8},
                            {13, 17, 11}, {32, 32, 32}, {5, 1, 6}}) {
      auto A = random_vec(std::size_t(m) * kk, rng);
      auto B = random_vec(std::size_t(kk) * n, rng);
      std::vector<cplx> C1(std::size_t(m) * n), C2(std::size_t(m) * n);
      ref.zgemm(m, kk, n, A.data(), B.data(), C1.data(), false);
      k->zgemm(m, kk, n, A.data(), B.data(), C2.data(), false);
      for (std::size_t i = 0; i < C1.size(); ++i)
        CHECK(std::abs(C1[i] - C2[i]) < 1e-11);
      // accumulate path
      auto D1 = C1, D2 = C2;
      ref.zgemm(m, kk, n, A.data(), B.data(), D1.data(), true);
      k->zgemm(m, kk, n, A.data(), B.data(), D2.data(), true);
      for (std::size_t i = 0; i < D1.size(); ++i)
        CHECK(std::abs(D1[i] - D2[i]) < 1e-11);
    }
    for (std::size_t n : {1u, 2u, 3u, 17u, 64u, 255u}) {
      auto x = random_vec(n, rng);
      auto y1 = random_vec(n, rng);
      auto y2 = y1;
      cplx a(0.7, -1.3);
      ref.zaxpy(n, a, x.data(), y1.data());
      k->zaxpy(n, a, x.data(), y2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) < 1e-12);
      auto z = random_vec(n, rng);
      CHECK(std::abs(ref.zdotc(n, x.data(), z.data()) - k->zdotc(n, x.data(), z.data())) <
            1e-10 * (1 + double(n)));
      auto dx = random_dvec(n, rng), dy = random_dvec(n, rng);
      CHECK(ref.ddot(n, dx.data(), dy.data()) ==
            doctest::Approx(k->ddot(n, dx.data(), dy.data())).epsilon(1e-12));
      auto dy1 = dy, dy2 = dy;
      ref.daxpy(n, 0.37, dx.data(), dy1.data());
      k->daxpy(n, 0.37, dx.data(), dy2.data());
      for (std::size_t i = 0; i < n; ++i) CHECK(dy1[i] == doctest::Approx(dy2[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("zgemm matches hand-computed 2x2 product") {
  const auto& k = kern::active();
  std::vector<cplx> A{{1, 1}, {0, 2}, {3, 0}, {-1, 0}};
  std::vector<cplx> B{{0, 1}, {2, 0}, {1, 0}, {0, -1}};
  std::vector<cplx> C(4);
  k.zgemm(2, 2, 2, A.data(), B.data(), C.data(), false);
  // row0: (1+i)(i) + (2i)(1) = -1+3i ; (1+i)(2) + (2i)(-i) = 4+2i
  CHECK(std::abs(C[0] - cplx(-1, 3)) < 1e-14);
  CHECK(std::abs(C[1] - cplx(4, 2)) < 1e-14);
  // row1: 3i + (-1) ; 6 + i
  CHECK(std::abs(C[2] - cplx(-1, 3)) < 1e-14);
  CHECK(std::abs(C[3] - cplx(6, 1)) < 1e-14);
}
