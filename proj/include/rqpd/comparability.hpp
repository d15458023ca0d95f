#ifndef RQPD_COMPARABILITY_HPP
#define RQPD_COMPARABILITY_HPP

#include <vector>

#include "rqpd/matrix.hpp"
#include "rqpd/qwhile.hpp"

namespace rqpd {

// Linear constraints tr(A_i rho1) = tr(B_i rho2) under which two programs
// generate identical probabilistic branching trees.
struct ConstraintSet {
  std::vector<std::pair<Mat, Mat>> pairs;
};

// Backward collection pass over two aligned statement lists (each statement
// pair must be both-if or both-while); rejects other shapes.
ConstraintSet collect_constraints(const SourceProgram& p1, const SourceProgram& p2);

bool check_comparability(const ConstraintSet& c, const Mat& rho1, const Mat& rho2,
                         double tol = 1e-8);

// Given rho1, project a candidate rho2 onto the constraint slice
// {tr(B_i rho2) = tr(A_i rho1)} intersected with the PSD cone (alternating
// projections). Returns false when the iteration does not land inside
// tolerance, e.g. when no PSD solution exists nearby.
bool solve_partner(const ConstraintSet& c, const Mat& rho1, Mat& rho2_inout,
                   double tol = 1e-9);

}  // namespace rqpd

#endif
