#include "rqpd/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "rqpd/eigen.hpp"

namespace rqpd {

Mat Mat::identity(int d) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::basis_ket(int d, int i) {
  Mat m(d, 1);
  m(i, 0) = 1.0;
  return m;
}

Mat Mat::ketbra(int d, int i, int j) {
  Mat m(d, d);
  m(i, j) = 1.0;
  return m;
}

Mat Mat::operator+(const Mat& o) const {
  if (!same_shape(o)) throw std::invalid_argument("Mat+: shape mismatch");
  Mat r = *this;
  kern::active().zaxpy(r.size(), cplx(1.0), o.data(), r.data());
  return r;
}

Mat Mat::operator-(const Mat& o) const {
  if (!same_shape(o)) throw std::invalid_argument("Mat-: shape mismatch");
  Mat r = *this;
  kern::active().zaxpy(r.size(), cplx(-1.0), o.data(), r.data());
  return r;
}

Mat& Mat::operator+=(const Mat& o) {
  if (!same_shape(o)) throw std::invalid_argument("Mat+=: shape mismatch");
  kern::active().zaxpy(size(), cplx(1.0), o.data(), data());
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  if (!same_shape(o)) throw std::invalid_argument("Mat-=: shape mismatch");
  kern::active().zaxpy(size(), cplx(-1.0), o.data(), data());
  return *this;
}

Mat Mat::operator*(const Mat& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("Mat*: inner dim mismatch");
  Mat r(rows_, o.cols_);
  kern::active().zgemm(rows_, cols_, o.cols_, data(), o.data(), r.data(), false);
  return r;
}

Mat Mat::operator*(cplx s) const {
  Mat r(rows_, cols_);
  kern::active().zaxpy(r.size(), s, data(), r.data());
  return r;
}

Mat& Mat::operator*=(cplx s) {
  for (auto& v : a_) v *= s;
  return *this;
}

Mat Mat::dagger() const {
  Mat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

Mat Mat::transpose() const {
  Mat r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

Mat Mat::conj() const {
  Mat r(rows_, cols_);
  for (std::size_t i = 0; i < a_.size(); ++i) r.a_[i] = std::conj(a_[i]);
  return r;
}

cplx Mat::trace() const {
  if (!square()) throw std::invalid_argument("trace: not square");
  cplx s(0.0);
  for (int i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

double Mat::max_norm() const {
  double m = 0.0;
  for (const auto& v : a_) m = std::max(m, std::abs(v));
  return m;
}

double Mat::frob_norm() const {
  return std::sqrt(std::abs(kern::active().zdotc(size(), data(), data())));
}

cplx Mat::inner(const Mat& o) const {
  if (!same_shape(o)) throw std::invalid_argument("inner: shape mismatch");
  return kern::active().zdotc(size(), data(), o.data());
}

bool Mat::approx_equal(const Mat& o, double tol) const {
  if (!same_shape(o)) return false;
  for (std::size_t i = 0; i < a_.size(); ++i)
    if (std::abs(a_[i] - o.a_[i]) > tol) return false;
  return true;
}

bool Mat::exact_equal(const Mat& o) const {
  return same_shape(o) && a_ == o.a_;
}

bool Mat::is_hermitian(double tol) const {
  if (!square()) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = i; j < cols_; ++j)
      if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
  return true;
}

Mat Mat::hermitize() const {
  Mat r = (*this + dagger());
  r *= 0.5;
  return r;
}

HermitianOperator HermitianOperator::make(Mat m, double herm_tol) {
  if (!m.square()) throw std::invalid_argument("HermitianOperator: not square");
  if (!m.is_hermitian(herm_tol))
    throw std::invalid_argument("HermitianOperator: not Hermitian within tolerance");
  return HermitianOperator(m.hermitize());
}

bool HermitianOperator::is_quantum_predicate(double tol) const {
  auto w = eigenvalues_hermitian(m_);
  return w.front() >= -tol && w.back() <= 1.0 + tol;
}

bool HermitianOperator::is_projector(double tol) const {
  return (m_ * m_).approx_equal(m_, tol);
}

DensityOperator DensityOperator::make(Mat m, double tol) {
  if (!m.square()) throw std::invalid_argument("DensityOperator: not square");
  if (!m.is_hermitian(1e-9))
    throw std::invalid_argument("DensityOperator: not Hermitian");
  Mat h = m.hermitize();
  auto w = eigenvalues_hermitian(h);
  if (w.front() < -tol) throw std::invalid_argument("DensityOperator: not PSD");
  double tr = h.trace().real();
  if (tr > 1.0 + tol) throw std::invalid_argument("DensityOperator: trace > 1");
  return DensityOperator(h);
}

}  // namespace rqpd
