#include "rqpd/eigen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rqpd {

namespace {

double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction of a real symmetric matrix to tridiagonal form,
// accumulating the transformation (EISPACK tred2 lineage).
void tred2(std::vector<double>& z, int n, std::vector<double>& d, std::vector<double>& e) {
  auto Z = [&](int i, int j) -> double& { return z[std::size_t(i) * n + j]; };
  for (int i = n - 1; i > 0; --i) {
    int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::fabs(Z(i, k));
      if (scale == 0.0) {
        e[i] = Z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          Z(i, k) /= scale;
          h += Z(i, k) * Z(i, k);
        }
        double f = Z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        Z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          Z(j, i) = Z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += Z(j, k) * Z(i, k);
          for (int k = j + 1; k <= l; ++k) g += Z(k, j) * Z(i, k);
          e[j] = g / h;
          f += e[j] * Z(i, j);
        }
        double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = Z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) Z(j, k) -= (f * e[k] + g * Z(i, k));
        }
      }
    } else {
      e[i] = Z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += Z(i, k) * Z(k, j);
        for (int k = 0; k <= l; ++k) Z(k, j) -= g * Z(k, i);
      }
    }
    d[i] = Z(i, i);
    Z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) Z(j, i) = Z(i, j) = 0.0;
  }
}

// Implicit-shift QL on a symmetric tridiagonal matrix, rotating the
// eigenvector accumulator along (EISPACK tql2 lineage).
void tql2(std::vector<double>& z, int n, std::vector<double>& d, std::vector<double>& e) {
  auto Z = [&](int i, int j) -> double& { return z[std::size_t(i) * n + j]; };
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 80) throw std::runtime_error("eig_hermitian: QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = Z(k, i + 1);
            Z(k, i + 1) = s * Z(k, i) + c * f;
            Z(k, i) = c * Z(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // sort ascending, carrying vectors
  for (int i = 0; i < n - 1; ++i) {
    int k = i;
    double p = d[i];
    for (int j = i + 1; j < n; ++j)
      if (d[j] < p) { k = j; p = d[j]; }
    if (k != i) {
      std::swap(d[k], d[i]);
      for (int j = 0; j < n; ++j) std::swap(Z(j, i), Z(j, k));
    }
  }
}

}  // namespace

HermEig eig_hermitian(const Mat& h) {
  if (!h.square()) throw std::invalid_argument("eig_hermitian: not square");
  const int d = h.rows();
  if (d == 0) return {{}, Mat(0, 0)};
  const int n = 2 * d;
  // real embedding [[Re, -Im], [Im, Re]]
  std::vector<double> z(std::size_t(n) * n, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const cplx v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      z[std::size_t(i) * n + j] = v.real();
      z[std::size_t(i) * n + (j + d)] = -v.imag();
      z[std::size_t(i + d) * n + j] = v.imag();
      z[std::size_t(i + d) * n + (j + d)] = v.real();
    }
  }
  std::vector<double> w(n), e(n);
  tred2(z, n, w, e);
  tql2(z, n, w, e);

  // Each complex eigenvector appears twice in the embedding ((x;y),(-y;x)).
  // Walk eigenvalues ascending, map (x;y) -> x+iy, keep a vector when it has
  // significant component outside the span already accepted.
  HermEig out;
  out.vectors = Mat(d, d);
  out.values.reserve(d);
  std::vector<Mat> accepted;
  for (int col = 0; col < n && int(out.values.size()) < d; ++col) {
    Mat v(d, 1);
    for (int i = 0; i < d; ++i)
      v(i, 0) = cplx(z[std::size_t(i) * n + col], z[std::size_t(i + d) * n + col]);
    // project out accepted vectors
    for (const Mat& u : accepted) {
      cplx ov = u.inner(v);
      kern::active().zaxpy(v.size(), -ov, u.data(), v.data());
    }
    double nrm = v.frob_norm();
    if (nrm < 1e-6) continue;
    v *= cplx(1.0 / nrm, 0.0);
    // second orthogonalization pass for numerical hygiene
    for (const Mat& u : accepted) {
      cplx ov = u.inner(v);
      kern::active().zaxpy(v.size(), -ov, u.data(), v.data());
    }
    nrm = v.frob_norm();
    if (nrm < 0.5) continue;
    v *= cplx(1.0 / nrm, 0.0);
    int k = int(out.values.size());
    for (int i = 0; i < d; ++i) out.vectors(i, k) = v(i, 0);
    out.values.push_back(w[col]);
    accepted.push_back(std::move(v));
  }
  if (int(out.values.size()) != d)
    throw std::runtime_error("eig_hermitian: failed to extract full eigenbasis");
  return out;
}

std::vector<double> eigenvalues_hermitian(const Mat& h) {
  // same path; vector extraction is cheap relative to QL at these sizes
  return eig_hermitian(h).values;
}

namespace {

// Reduce to upper Hessenberg by complex Householder reflections, accumulating Q.
void hessenberg(Mat& a, Mat& q) {
  const int n = a.rows();
  q = Mat::identity(n);
  for (int k = 0; k < n - 2; ++k) {
    // Householder vector for column k below diagonal
    double scale = 0.0;
    for (int i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
    if (scale < 1e-300) continue;
    Mat v(n, 1);
    double norm2 = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v(i, 0) = a(i, k) / scale;
      norm2 += std::norm(v(i, 0));
    }
    double alpha = std::sqrt(norm2);
    cplx x0 = v(k + 1, 0);
    cplx phase = (std::abs(x0) > 1e-300) ? x0 / std::abs(x0) : cplx(1.0);
    v(k + 1, 0) += phase * alpha;
    double vn2 = 0.0;
    for (int i = k + 1; i < n; ++i) vn2 += std::norm(v(i, 0));
    if (vn2 < 1e-300) continue;
    // H = I - 2 v v^dag / |v|^2 ; apply H A H and Q H
    auto applyLeft = [&](Mat& m) {
      for (int j = 0; j < m.cols(); ++j) {
        cplx s(0.0);
        for (int i = k + 1; i < n; ++i) s += std::conj(v(i, 0)) * m(i, j);
        s *= 2.0 / vn2;
        for (int i = k + 1; i < n; ++i) m(i, j) -= s * v(i, 0);
      }
    };
    auto applyRight = [&](Mat& m) {
      for (int i = 0; i < m.rows(); ++i) {
        cplx s(0.0);
        for (int j = k + 1; j < n; ++j) s += m(i, j) * v(j, 0);
        s *= 2.0 / vn2;
        for (int j = k + 1; j < n; ++j) m(i, j) -= s * std::conj(v(j, 0));
      }
    };
    applyLeft(a);
    applyRight(a);
    applyRight(q);
  }
}

}  // namespace

ComplexEig eig_general(const Mat& a_in, bool want_vectors) {
  if (!a_in.square()) throw std::invalid_argument("eig_general: not square");
  const int n = a_in.rows();
  ComplexEig out;
  out.values.resize(n);
  if (n == 0) return out;
  Mat t = a_in;
  Mat q;
  hessenberg(t, q);

  // Shifted QR with deflation on the Hessenberg matrix, complex Givens form.
  const double eps = 2.3e-16;
  int hi = n - 1;
  int iter_total = 0;
  const int iter_cap = 80 * n + 200;
  while (hi >= 0) {
    // deflate
    int lo = hi;
    while (lo > 0) {
      double s = std::abs(t(lo - 1, lo - 1)) + std::abs(t(lo, lo));
      if (s == 0.0) s = 1.0;
      if (std::abs(t(lo, lo - 1)) <= eps * s) {
        t(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      out.values[hi] = t(hi, hi);
      --hi;
      continue;
    }
    if (++iter_total > iter_cap)
      throw std::runtime_error("eig_general: QR did not converge");
    // Wilkinson shift from trailing 2x2
    cplx a = t(hi - 1, hi - 1), b = t(hi - 1, hi), c = t(hi, hi - 1), d = t(hi, hi);
    cplx tr = a + d, det = a * d - b * c;
    cplx disc = std::sqrt(tr * tr - 4.0 * det);
    cplx l1 = (tr + disc) * 0.5, l2 = (tr - disc) * 0.5;
    cplx shift = (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
    if (iter_total % 17 == 0) {
      // occasional exceptional shift to break cycles
      shift = cplx(std::abs(t(hi, hi - 1)) + std::abs(t(hi, hi)), 0.0);
    }
    // implicit single-shift QR sweep on rows lo..hi via Givens rotations
    std::vector<std::array<cplx, 2>> rots(hi - lo);
    cplx x = t(lo, lo) - shift;
    cplx y = t(lo + 1, lo);
    for (int k = lo; k < hi; ++k) {
      // Givens zeroing y against x
      double nx = std::abs(x), ny = std::abs(y);
      double r = std::hypot(nx, ny);
      cplx cs, sn;
      if (r < 1e-300) {
        cs = 1.0;
        sn = 0.0;
      } else {
        cs = nx / r;
        cplx phase = (nx > 1e-300) ? x / nx : cplx(1.0);
        sn = phase * std::conj(y) / r;
      }
      rots[k - lo] = {cs, sn};
      // apply rotation to rows k,k+1 (left): [cs, sn; -conj(sn), cs]
      for (int j = std::max(0, k - 1); j < n; ++j) {
        cplx t1 = t(k, j), t2 = t(k + 1, j);
        t(k, j) = cs * t1 + sn * t2;
        t(k + 1, j) = -std::conj(sn) * t1 + cs * t2;
      }
      // apply to columns k,k+1 (right)
      int rmax = std::min(hi, k + 2);
      for (int i = 0; i <= rmax; ++i) {
        cplx t1 = t(i, k), t2 = t(i, k + 1);
        t(i, k) = t1 * cs + t2 * std::conj(sn);
        t(i, k + 1) = -t1 * sn + t2 * cs;
      }
      if (want_vectors) {
        for (int i = 0; i < n; ++i) {
          cplx q1 = q(i, k), q2 = q(i, k + 1);
          q(i, k) = q1 * cs + q2 * std::conj(sn);
          q(i, k + 1) = -q1 * sn + q2 * cs;
        }
      }
      if (k < hi - 1) {
        x = t(k + 1, k);
        y = t(k + 2, k);
      }
    }
  }
  if (!want_vectors) return out;

  // Eigenvectors of the (numerically) triangular T by back substitution,
  // then map through Q. T may retain tiny subdiagonals; ignore them.
  Mat v(n, n);
  for (int k = 0; k < n; ++k) {
    cplx lam = out.values[k];
    Mat y(n, 1);
    y(k, 0) = 1.0;
    for (int i = k - 1; i >= 0; --i) {
      cplx s(0.0);
      for (int j = i + 1; j <= k; ++j) s += t(i, j) * y(j, 0);
      cplx diag = t(i, i) - lam;
      if (std::abs(diag) < 1e-13) diag += cplx(1e-13, 0);
      y(i, 0) = -s / diag;
    }
    double nrm = y.frob_norm();
    for (int i = 0; i < n; ++i) y(i, 0) /= nrm;
    for (int i = 0; i < n; ++i) {
      cplx s(0.0);
      for (int j = 0; j <= k; ++j) s += q(i, j) * y(j, 0);
      v(i, k) = s;
    }
  }
  out.vectors = std::move(v);
  return out;
}

double spectral_radius(const Mat& a) {
  auto e = eig_general(a, false);
  double r = 0.0;
  for (const cplx& v : e.values) r = std::max(r, std::abs(v));
  return r;
}

bool try_cholesky(const Mat& a, Mat& l) {
  const int n = a.rows();
  l = Mat(n, n);
  for (int j = 0; j < n; ++j) {
    double djj = a(j, j).real();
    for (int k = 0; k < j; ++k) djj -= std::norm(l(j, k));
    if (djj <= 0.0 || !std::isfinite(djj)) return false;
    double s = std::sqrt(djj);
    l(j, j) = s;
    for (int i = j + 1; i < n; ++i) {
      cplx v = a(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
      l(i, j) = v / s;
    }
  }
  return true;
}

Mat cholesky(const Mat& a) {
  Mat l;
  if (!try_cholesky(a, l)) throw std::runtime_error("cholesky: matrix not positive definite");
  return l;
}

Mat lu_solve(const Mat& a_in, const Mat& b_in) {
  if (!a_in.square() || a_in.rows() != b_in.rows())
    throw std::invalid_argument("lu_solve: shape mismatch");
  const int n = a_in.rows();
  Mat a = a_in;
  Mat b = b_in;
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > best) { best = std::abs(a(i, k)); p = i; }
    if (best < 1e-300) throw std::runtime_error("lu_solve: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (int j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
    }
    for (int i = k + 1; i < n; ++i) {
      cplx f = a(i, k) / a(k, k);
      a(i, k) = f;
      if (f == cplx(0.0)) continue;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (int j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < b.cols(); ++j) {
      cplx s = b(k, j);
      for (int i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
      b(k, j) = s / a(k, k);
    }
  }
  return b;
}

Mat inverse(const Mat& a) { return lu_solve(a, Mat::identity(a.rows())); }

}  // namespace rqpd
