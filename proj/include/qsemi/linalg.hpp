#pragma once

#include <cstdint>

#include "qsemi/types.hpp"

namespace qsemi {

// e^{scale*a} by scaling-and-squaring with the order-13 diagonal Pade
// approximant; the power-of-two scaling is chosen from the 1-norm.
// scale == 0 returns the identity exactly.
ComplexMatrix expm(const ComplexMatrix& a, Complex scale);

// All singular values, ascending. One-sided Jacobi on the columns with a
// power-of-two exponent carried per column, so values stay relatively
// accurate over the full double range. Rectangular input is allowed.
RealVector svd_values(const ComplexMatrix& a);

// Full decomposition a = u * sigma.asDiagonal() * v.adjoint() for square a,
// sigma ascending to match svd_values.
struct SvdFactors {
  ComplexMatrix u;
  RealVector sigma;
  ComplexMatrix v;
};
SvdFactors svd_full(const ComplexMatrix& a);

// Eigenvalues with algebraic multiplicity (complex Schur reduction).
ComplexVector eig_values(const ComplexMatrix& a);

// Smallest eigenvalue of the Hermitian part (a + a*)/2.
double hermitian_min_eig(const ComplexMatrix& a);

double spectral_norm(const ComplexMatrix& a);

// Number of singular values above tol * (largest singular value).
Eigen::Index numeric_rank(const ComplexMatrix& a, double tol);

// a^k v by k successive applications.
ComplexVector mat_power_apply(const ComplexMatrix& a, const ComplexVector& v, std::int64_t k);

}  // namespace qsemi
