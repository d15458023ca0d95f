#ifndef RQPD_EIGEN_HPP
#define RQPD_EIGEN_HPP

#include <vector>

#include "rqpd/matrix.hpp"

namespace rqpd {

// Spectral decomposition of a complex Hermitian matrix. Implemented on the
// real symmetric embedding [[Re,-Im],[Im,Re]] with Householder
// tridiagonalization followed by implicit-shift QL, then collapsing the
// doubled spectrum back to d complex eigenvectors. No external solver.
// Eigenvalues ascending; V columns are orthonormal eigenvectors.
struct HermEig {
  std::vector<double> values;
  Mat vectors;
};
HermEig eig_hermitian(const Mat& h);
std::vector<double> eigenvalues_hermitian(const Mat& h);

// Eigenvalues (and optionally right eigenvectors) of a general complex
// matrix via Hessenberg reduction + shifted QR. Used for spectral radii and
// the loop-losslessness certificate; not performance critical.
struct ComplexEig {
  std::vector<cplx> values;
  Mat vectors;  // empty unless requested
};
ComplexEig eig_general(const Mat& a, bool want_vectors);
double spectral_radius(const Mat& a);

// Cholesky factor L (lower) of a Hermitian positive definite matrix;
// throws std::runtime_error if not PD (beyond jitter).
Mat cholesky(const Mat& a);
bool try_cholesky(const Mat& a, Mat& l);

// Solve A X = B for general square complex A (partial-pivot LU).
Mat lu_solve(const Mat& a, const Mat& b);

// Inverse via LU.
Mat inverse(const Mat& a);

}  // namespace rqpd

#endif
