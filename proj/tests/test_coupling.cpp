#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "rqpd/coupling.hpp"
#include "rqpd/operator_core.hpp"
#include "test_helpers.hpp"

using namespace rqpd;
using namespace rqpd::test;

namespace {
Mat half_identity(int d) { return Mat::identity(d) * cplx(1.0 / d, 0.0); }

Mat fact_objective() {
  Mat a(4, 4);
  a(0, 0) = 2;
  a(1, 1) = 1;
  a(2, 2) = 1;
  a(3, 3) = 2;
  a(0, 3) = 1;
  a(3, 0) = 1;
  return a * cplx(1.0 / 3.0, 0.0);
}
}  // namespace

TEST_CASE("coupling constructions have the right marginals") {
  auto rng = make_rng(101);
  SpaceShape sh22({2, 2});
  Mat r1 = random_density(2, rng), r2 = random_density(2, rng);
  Mat t = tensor_coupling(r1, r2);
  CHECK(partial_trace(t, sh22, {0}).approx_equal(r1, 1e-12));
  CHECK(partial_trace(t, sh22, {1}).approx_equal(r2, 1e-12));

  Mat rho = random_density(3, rng);
  Mat idc = basis_identity_coupling(rho);
  SpaceShape sh33({3, 3});
  CHECK(partial_trace(idc, sh33, {0}).approx_equal(rho, 1e-10));
  CHECK(partial_trace(idc, sh33, {1}).approx_equal(rho, 1e-10));

  // U = I gives (|00><00| + |11><11|)/2
  Mat uu = unitary_unif_coupling(2, Mat::identity(2));
  Mat expect(4, 4);
  expect(0, 0) = 0.5;
  expect(3, 3) = 0.5;
  CHECK(uu.approx_equal(expect, 1e-14));

  // U = H: marginals are both the uniform state
  Mat uh = unitary_unif_coupling(2, gate_H());
  CHECK(partial_trace(uh, sh22, {0}).approx_equal(half_identity(2), 1e-12));
  CHECK(partial_trace(uh, sh22, {1}).approx_equal(half_identity(2), 1e-12));

  Mat v(2, 2);
  v(0, 0) = 1;
  v(0, 1) = 1;
  v(1, 1) = 1;
  CHECK_THROWS(unitary_unif_coupling(2, v));
}

TEST_CASE("appendix Fact: entangled max 1, PPT-restricted max 2/3") {
  CouplingProblem p;
  p.rho1 = half_identity(2);
  p.rho2 = half_identity(2);
  p.objective = fact_objective();
  auto s = max_coupling_value(p);
  REQUIRE(s.status == CouplingStatus::Optimal);
  CHECK(s.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(s.marginal_residual < 1e-6);
  CHECK(s.psd_residual < 1e-7);

  p.ppt = true;
  auto sp = max_coupling_value(p);
  REQUIRE(sp.status == CouplingStatus::Optimal);
  CHECK(sp.value == doctest::Approx(2.0 / 3.0).epsilon(1e-4));
  CHECK(sp.value <= s.value + 1e-8);
}

TEST_CASE("objective = I gives the shared trace") {
  auto rng = make_rng(103);
  for (int t = 0; t < 5; ++t) {
    CouplingProblem p;
    p.rho1 = random_density(2, rng) * cplx(0.7, 0.0);
    p.rho2 = random_density(3, rng) * cplx(0.7, 0.0);
    p.objective = Mat::identity(6);
    auto s = max_coupling_value(p);
    REQUIRE(s.status == CouplingStatus::Optimal);
    CHECK(s.value == doctest::Approx(0.7).epsilon(1e-7));
  }
}

TEST_CASE("trace-mismatched marginals are rejected") {
  CouplingProblem p;
  p.rho1 = half_identity(2);
  p.rho2 = half_identity(2) * cplx(0.5, 0.0);
  p.objective = Mat::identity(4);
  CHECK(max_coupling_value(p).status == CouplingStatus::Infeasible);
}

TEST_CASE("equality liftings via =_sym and =_B") {
  // rho (=_B)# rho for rho = diag(p, 1-p): witness in the computational basis
  Mat rho(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.7;
  Mat eqB(4, 4);
  eqB(0, 0) = 1;
  eqB(3, 3) = 1;
  auto s = lifting_exists(rho, rho, eqB);
  CHECK((s.status == CouplingStatus::Optimal || s.status == CouplingStatus::Feasible));

  // rho1 (=_sym)# rho2 iff rho1 == rho2
  Mat r1(2, 2), r2(2, 2);
  r1(0, 0) = 0.6;
  r1(1, 1) = 0.4;
  r2(0, 0) = 0.4;
  r2(1, 1) = 0.6;
  auto bad = lifting_exists(r1, r2, sym_projector(2));
  CHECK(bad.status == CouplingStatus::Infeasible);
  auto good = lifting_exists(r1, r1, sym_projector(2));
  CHECK((good.status == CouplingStatus::Optimal || good.status == CouplingStatus::Feasible));

  // full space: always feasible (tensor coupling)
  auto rng = make_rng(107);
  Mat a = random_density(2, rng), b = random_density(2, rng);
  auto full = lifting_exists(a, b, Mat::identity(4));
  CHECK((full.status == CouplingStatus::Optimal || full.status == CouplingStatus::Feasible));
}

TEST_CASE("support-constrained solves") {
  // restrict to =_B with diagonal marginals; compare against full-space value
  Mat rho(2, 2);
  rho(0, 0) = 0.5;
  rho(1, 1) = 0.5;
  Mat eqB(4, 4);
  eqB(0, 0) = 1;
  eqB(3, 3) = 1;
  auto rng = make_rng(109);
  Mat b = random_hermitian(4, rng);
  CouplingProblem p;
  p.rho1 = rho;
  p.rho2 = rho;
  p.objective = b;
  auto free = max_coupling_value(p);
  p.support = eqB;
  auto sup = max_coupling_value(p);
  REQUIRE((sup.status == CouplingStatus::Optimal || sup.status == CouplingStatus::Feasible));
  CHECK(sup.value <= free.value + 1e-6);
  // witness must live inside the support
  Mat leak = (Mat::identity(4) - eqB) * sup.witness * (Mat::identity(4) - eqB);
  CHECK(leak.max_norm() < 1e-6);
  // infeasible support: off-diagonal projector cannot hold these marginals
  Mat off = Mat::identity(4) - eqB;
  Mat pure00(2, 2);
  pure00(0, 0) = 1.0;
  CouplingProblem q;
  q.rho1 = pure00;
  q.rho2 = pure00;
  q.objective = b;
  q.support = off;
  CHECK(max_coupling_value(q).status == CouplingStatus::Infeasible);
}

TEST_CASE("PPT separability test on 2x2") {
  Mat phi(4, 1);
  phi(0, 0) = 1 / std::sqrt(2.0);
  phi(3, 0) = 1 / std::sqrt(2.0);
  CHECK_FALSE(is_separable_2x2(phi * phi.dagger()));
  Mat rs(4, 4);
  rs(0, 0) = rs(1, 1) = rs(2, 2) = rs(3, 3) = 0.25;
  rs(0, 3) = rs(3, 0) = 0.25;
  CHECK(is_separable_2x2(rs));
  auto rng = make_rng(113);
  for (int t = 0; t < 5; ++t)
    CHECK(is_separable_2x2(tensor(random_density(2, rng), random_density(2, rng))));
  CHECK_THROWS(is_separable_2x2(Mat::identity(6)));
}

TEST_CASE("solver matches the Burer-Monteiro oracle on random 2x2 problems") {
  auto rng = make_rng(127);
  for (int t = 0; t < 6; ++t) {
    CouplingProblem p;
    p.rho1 = random_density(2, rng);
    p.rho2 = random_density(2, rng);
    // align traces exactly
    p.rho2 *= cplx(p.rho1.trace().real() / p.rho2.trace().real(), 0.0);
    p.objective = random_hermitian(4, rng);
    auto s = max_coupling_value(p);
    REQUIRE(s.status == CouplingStatus::Optimal);
    double oracle = bm_max_coupling(p.rho1, p.rho2, p.objective, 24, 1000 + t);
    CHECK(s.value == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("value function is superadditive under mixing") {
  auto rng = make_rng(131);
  for (int t = 0; t < 4; ++t) {
    Mat a1 = random_density(2, rng), a2 = random_density(2, rng);
    a2 *= cplx(a1.trace().real() / a2.trace().real(), 0.0);
    Mat b1 = random_density(2, rng), b2 = random_density(2, rng);
    b2 *= cplx(b1.trace().real() / b2.trace().real(), 0.0);
    Mat obj = random_hermitian(4, rng);
    double lam = 0.3;
    auto va = max_coupling_value({a1, a2, obj, {}, false});
    auto vb = max_coupling_value({b1, b2, obj, {}, false});
    Mat m1 = a1 * cplx(lam, 0.0) + b1 * cplx(1 - lam, 0.0);
    Mat m2 = a2 * cplx(lam, 0.0) + b2 * cplx(1 - lam, 0.0);
    auto vm = max_coupling_value({m1, m2, obj, {}, false});
    CHECK(vm.value >= lam * va.value + (1 - lam) * vb.value - 1e-6);
  }
}

TEST_CASE("witness quality across random problems including degenerate marginals") {
  auto rng = make_rng(137);
  for (int t = 0; t < 6; ++t) {
    int d1 = 2 + int(rng() % 2), d2 = 2 + int(rng() % 3);
    CouplingProblem p;
    p.rho1 = (t % 2 == 0) ? random_pure(d1, rng) : random_density(d1, rng);
    p.rho2 = random_density(d2, rng);
    p.rho2 *= cplx(p.rho1.trace().real() / p.rho2.trace().real(), 0.0);
    p.objective = random_hermitian(d1 * d2, rng);
    auto s = max_coupling_value(p);
    REQUIRE((s.status == CouplingStatus::Optimal || s.status == CouplingStatus::Feasible));
    CHECK(s.marginal_residual <= 1e-6);
    CHECK(s.psd_residual <= 1e-7);
  }
}
