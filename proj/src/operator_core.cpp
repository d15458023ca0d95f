#include "rqpd/operator_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rqpd {

Mat tensor(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      const cplx av = a(i, j);
      if (av == cplx(0.0)) continue;
      for (int k = 0; k < b.rows(); ++k)
        for (int l = 0; l < b.cols(); ++l)
          r(i * b.rows() + k, j * b.cols() + l) = av * b(k, l);
    }
  return r;
}

Mat tensor(const std::vector<Mat>& ms) {
  if (ms.empty()) return Mat::identity(1);
  Mat r = ms[0];
  for (std::size_t i = 1; i < ms.size(); ++i) r = tensor(r, ms[i]);
  return r;
}

namespace {

void check_shape(const Mat& m, const SpaceShape& shape) {
  if (!m.square() || m.rows() != shape.total())
    throw std::invalid_argument("shape mismatch: operator dim != product of factors");
}

// decode flat index into factor digits
void decode(int idx, const std::vector<int>& dims, std::vector<int>& digits) {
  for (int k = int(dims.size()) - 1; k >= 0; --k) {
    digits[k] = idx % dims[k];
    idx /= dims[k];
  }
}

int encode(const std::vector<int>& digits, const std::vector<int>& dims) {
  int idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
  return idx;
}

}  // namespace

Mat partial_trace(const Mat& m, const SpaceShape& shape, const std::vector<int>& keep) {
  check_shape(m, shape);
  const auto& dims = shape.factor_dims;
  const int nf = shape.factors();
  std::vector<bool> kept(nf, false);
  for (int k : keep) {
    if (k < 0 || k >= nf) throw std::invalid_argument("partial_trace: bad factor index");
    kept[k] = true;
  }
  std::vector<int> keep_dims, trace_idx;
  for (int k = 0; k < nf; ++k)
    if (kept[k]) keep_dims.push_back(dims[k]);
    else trace_idx.push_back(k);
  int dkeep = 1;
  for (int d : keep_dims) dkeep *= d;
  int dtr = 1;
  for (int k : trace_idx) dtr *= dims[k];

  Mat r(dkeep, dkeep);
  std::vector<int> di(nf), dj(nf), kd(keep.size()), tl(trace_idx.size());
  std::vector<int> tdims(trace_idx.size());
  for (std::size_t t = 0; t < trace_idx.size(); ++t) tdims[t] = dims[trace_idx[t]];
  std::vector<int> kdims = keep_dims;
  for (int ik = 0; ik < dkeep; ++ik) {
    std::vector<int> kdig(keep.size());
    if (!keep.empty()) decode(ik, kdims, kdig);
    for (int jk = 0; jk < dkeep; ++jk) {
      std::vector<int> kdj(keep.size());
      if (!keep.empty()) decode(jk, kdims, kdj);
      cplx s(0.0);
      for (int t = 0; t < dtr; ++t) {
        std::vector<int> tdig(trace_idx.size());
        if (!trace_idx.empty()) decode(t, tdims, tdig);
        int ci = 0, cj = 0, kk = 0, tt = 0;
        for (int f = 0; f < nf; ++f) {
          if (kept[f]) {
            di[f] = kdig[kk];
            dj[f] = kdj[kk];
            ++kk;
          } else {
            di[f] = tdig[tt];
            dj[f] = tdig[tt];
            ++tt;
          }
        }
        ci = encode(di, dims);
        cj = encode(dj, dims);
        s += m(ci, cj);
      }
      r(ik, jk) = s;
    }
  }
  return r;
}

Mat partial_transpose(const Mat& m, const SpaceShape& shape, const std::vector<int>& which) {
  check_shape(m, shape);
  const auto& dims = shape.factor_dims;
  const int nf = shape.factors();
  std::vector<bool> tp(nf, false);
  for (int k : which) {
    if (k < 0 || k >= nf) throw std::invalid_argument("partial_transpose: bad factor index");
    tp[k] = true;
  }
  const int D = shape.total();
  Mat r(D, D);
  std::vector<int> di(nf), dj(nf);
  for (int i = 0; i < D; ++i) {
    decode(i, dims, di);
    for (int j = 0; j < D; ++j) {
      decode(j, dims, dj);
      std::vector<int> si = di, sj = dj;
      for (int f = 0; f < nf; ++f)
        if (tp[f]) std::swap(si[f], sj[f]);
      r(encode(si, dims), encode(sj, dims)) = m(i, j);
    }
  }
  return r;
}

Mat embed_on(const Mat& op, const SpaceShape& shape, const std::vector<int>& positions) {
  const auto& dims = shape.factor_dims;
  const int nf = shape.factors();
  int dop = 1;
  for (int p : positions) {
    if (p < 0 || p >= nf) throw std::invalid_argument("embed_on: bad position");
    dop *= dims[p];
  }
  if (op.rows() != dop || op.cols() != dop)
    throw std::invalid_argument("embed_on: operator dim does not match selected factors");
  std::vector<bool> sel(nf, false);
  for (int p : positions) {
    if (sel[p]) throw std::invalid_argument("embed_on: duplicate position");
    sel[p] = true;
  }
  std::vector<int> rest;
  for (int f = 0; f < nf; ++f)
    if (!sel[f]) rest.push_back(f);
  std::vector<int> opdims;
  for (int p : positions) opdims.push_back(dims[p]);
  std::vector<int> restdims;
  for (int f : rest) restdims.push_back(dims[f]);
  int drest = 1;
  for (int d : restdims) drest *= d;

  const int D = shape.total();
  Mat r(D, D);
  std::vector<int> odig_i(positions.size()), odig_j(positions.size());
  std::vector<int> rdig(rest.size());
  std::vector<int> full_i(nf), full_j(nf);
  for (int oi = 0; oi < dop; ++oi) {
    if (!positions.empty()) decode(oi, opdims, odig_i);
    for (int oj = 0; oj < dop; ++oj) {
      const cplx v = op(oi, oj);
      if (v == cplx(0.0)) continue;
      if (!positions.empty()) decode(oj, opdims, odig_j);
      for (int rr = 0; rr < drest; ++rr) {
        if (!rest.empty()) decode(rr, restdims, rdig);
        for (std::size_t k = 0; k < positions.size(); ++k) {
          full_i[positions[k]] = odig_i[k];
          full_j[positions[k]] = odig_j[k];
        }
        for (std::size_t k = 0; k < rest.size(); ++k) {
          full_i[rest[k]] = rdig[k];
          full_j[rest[k]] = rdig[k];
        }
        r(encode(full_i, dims), encode(full_j, dims)) = v;
      }
    }
  }
  return r;
}

Mat permute_factors(const Mat& m, const SpaceShape& shape, const std::vector<int>& perm) {
  check_shape(m, shape);
  const auto& dims = shape.factor_dims;
  const int nf = shape.factors();
  if (int(perm.size()) != nf) throw std::invalid_argument("permute_factors: bad perm");
  std::vector<int> ndims(nf);
  for (int k = 0; k < nf; ++k) ndims[k] = dims[perm[k]];
  const int D = shape.total();
  Mat r(D, D);
  std::vector<int> di(nf), dj(nf), pi(nf), pj(nf);
  for (int i = 0; i < D; ++i) {
    decode(i, dims, di);
    for (int j = 0; j < D; ++j) {
      decode(j, dims, dj);
      for (int k = 0; k < nf; ++k) {
        pi[k] = di[perm[k]];
        pj[k] = dj[perm[k]];
      }
      r(encode(pi, ndims), encode(pj, ndims)) = m(i, j);
    }
  }
  return r;
}

bool loewner_leq(const Mat& a, const Mat& b, double tol) {
  if (!a.same_shape(b)) throw std::invalid_argument("loewner_leq: dim mismatch");
  return loewner_margin(a, b) >= -tol;
}

double loewner_margin(const Mat& a, const Mat& b) {
  Mat d = b - a;
  auto w = eigenvalues_hermitian(d.hermitize());
  return w.front();
}

Mat support_projector(const Mat& a, double rank_tol) {
  auto eg = eig_hermitian(a.hermitize());
  double lmax = 0.0;
  for (double w : eg.values) lmax = std::max(lmax, w);
  if (!eg.values.empty() && eg.values.front() < -1e-8 * std::max(1.0, lmax))
    throw std::invalid_argument("support_projector: operator not PSD within tolerance");
  const int d = a.rows();
  Mat p(d, d);
  double cut = rank_tol * std::max(lmax, 1e-300);
  for (int k = 0; k < d; ++k) {
    if (eg.values[k] <= cut) continue;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        p(i, j) += eg.vectors(i, k) * std::conj(eg.vectors(j, k));
  }
  return p;
}

Mat swap_operator(int d) {
  Mat s(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i * d + j, j * d + i) = 1.0;
  return s;
}

Mat sym_projector(int d) {
  Mat s = swap_operator(d);
  Mat r = Mat::identity(d * d) + s;
  r *= 0.5;
  return r;
}

Mat vec(const Mat& m) {
  Mat v(m.rows() * m.cols(), 1);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) v(i * m.cols() + j, 0) = m(i, j);
  return v;
}

Mat unvec(const Mat& v, int rows, int cols) {
  if (v.cols() != 1 || v.rows() != rows * cols)
    throw std::invalid_argument("unvec: shape mismatch");
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = v(i * cols + j, 0);
  return m;
}

Mat superop_matrix(const std::vector<Mat>& kraus) {
  if (kraus.empty()) throw std::invalid_argument("superop_matrix: no Kraus operators");
  const int dout = kraus[0].rows(), din = kraus[0].cols();
  Mat s(dout * dout, din * din);
  for (const Mat& e : kraus) {
    if (e.rows() != dout || e.cols() != din)
      throw std::invalid_argument("superop_matrix: Kraus shape mismatch");
    s += tensor(e, e.conj());
  }
  return s;
}

Mat choi_from_superop(const Mat& shat, int dout, int din) {
  if (shat.rows() != dout * dout || shat.cols() != din * din)
    throw std::invalid_argument("choi_from_superop: shape mismatch");
  // J = sum_ij |i><j|_in (x) E(|i><j|); E(|i><j|) read off columns of shat
  Mat j(din * dout, din * dout);
  for (int i = 0; i < din; ++i)
    for (int jj = 0; jj < din; ++jj)
      for (int a = 0; a < dout; ++a)
        for (int b = 0; b < dout; ++b)
          j(i * dout + a, jj * dout + b) = shat(a * dout + b, i * din + jj);
  return j;
}

std::vector<Mat> kraus_from_choi(const Mat& choi, int dout, int din, double tol) {
  auto eg = eig_hermitian(choi.hermitize());
  std::vector<Mat> kraus;
  double lmax = 0.0;
  for (double w : eg.values) lmax = std::max(lmax, w);
  for (int k = 0; k < choi.rows(); ++k) {
    if (eg.values[k] <= tol * std::max(1.0, lmax)) continue;
    double s = std::sqrt(eg.values[k]);
    Mat e(dout, din);
    for (int i = 0; i < din; ++i)
      for (int a = 0; a < dout; ++a) e(a, i) = s * eg.vectors(i * dout + a, k);
    kraus.push_back(std::move(e));
  }
  return kraus;
}

Mat apply_kraus(const std::vector<Mat>& kraus, const Mat& rho) {
  if (kraus.empty()) throw std::invalid_argument("apply_kraus: empty");
  Mat out(kraus[0].rows(), kraus[0].rows());
  for (const Mat& e : kraus) out += e * rho * e.dagger();
  return out;
}

Mat apply_kraus_dual(const std::vector<Mat>& kraus, const Mat& a) {
  if (kraus.empty()) throw std::invalid_argument("apply_kraus_dual: empty");
  Mat out(kraus[0].cols(), kraus[0].cols());
  for (const Mat& e : kraus) out += e.dagger() * a * e;
  return out;
}

}  // namespace rqpd
