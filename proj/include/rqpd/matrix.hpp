#ifndef RQPD_MATRIX_HPP
#define RQPD_MATRIX_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "rqpd/kernels.hpp"

namespace rqpd {

using cplx = std::complex<double>;

constexpr double kDefaultTol = 1e-9;

// Dense row-major complex matrix. The workhorse value type of the project:
// states, predicates, measurement operators, Kraus operators and vectorized
// superoperators are all stored this way.
class Mat {
 public:
  Mat() : rows_(0), cols_(0) {}
  Mat(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Mat: negative dims");
  }

  static Mat identity(int d);
  static Mat zero(int r, int c) { return Mat(r, c); }
  // Column vector |i> of dimension d.
  static Mat basis_ket(int d, int i);
  static Mat ketbra(int d, int i, int j);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::size_t size() const { return a_.size(); }

  cplx& operator()(int i, int j) { return a_[std::size_t(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[std::size_t(i) * cols_ + j]; }
  cplx* data() { return a_.data(); }
  const cplx* data() const { return a_.data(); }

  Mat operator+(const Mat& o) const;
  Mat operator-(const Mat& o) const;
  Mat operator*(const Mat& o) const;
  Mat operator*(cplx s) const;
  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(cplx s);
  Mat operator-() const { return *this * cplx(-1.0, 0.0); }

  Mat dagger() const;
  Mat transpose() const;
  Mat conj() const;
  cplx trace() const;
  double max_norm() const;        // max |entry|
  double frob_norm() const;
  // tr(this^dagger * o)
  cplx inner(const Mat& o) const;

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool approx_equal(const Mat& o, double tol = kDefaultTol) const;
  bool exact_equal(const Mat& o) const;

  bool is_hermitian(double tol = 1e-10) const;
  // (M + M^dagger)/2
  Mat hermitize() const;

 private:
  int rows_, cols_;
  std::vector<cplx> a_;
};

inline Mat operator*(cplx s, const Mat& m) { return m * s; }

// Ordered subsystem dimensions of a tensor-product space.
struct SpaceShape {
  std::vector<int> factor_dims;

  SpaceShape() = default;
  explicit SpaceShape(std::vector<int> dims) : factor_dims(std::move(dims)) {
    for (int d : factor_dims)
      if (d < 1) throw std::invalid_argument("SpaceShape: factor dim < 1");
  }
  int total() const {
    long long p = 1;
    for (int d : factor_dims) p *= d;
    return int(p);
  }
  int factors() const { return int(factor_dims.size()); }
};

// Hermitian operator with validated symmetry. house predicates A, B, ...
class HermitianOperator {
 public:
  static HermitianOperator make(Mat m, double herm_tol = 1e-10);
  const Mat& mat() const { return m_; }
  int dim() const { return m_.rows(); }
  // 0 <= M <= I within tol (checked via eigenvalues).
  bool is_quantum_predicate(double tol = kDefaultTol) const;
  bool is_projector(double tol = 1e-8) const;

 private:
  explicit HermitianOperator(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

// Partial density operator: Hermitian, PSD, trace <= 1 (+ tolerance).
class DensityOperator {
 public:
  static DensityOperator make(Mat m, double tol = kDefaultTol);
  const Mat& mat() const { return m_; }
  int dim() const { return m_.rows(); }
  double trace_real() const { return m_.trace().real(); }

 private:
  explicit DensityOperator(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

}  // namespace rqpd

#endif
