#pragma once

#include <cstdint>
#include <vector>

#include "qsemi/linalg.hpp"
#include "qsemi/model.hpp"

namespace qsemi {

// Dense matrix of an operator restricted to the energy level E_m, in the
// canonical graded basis.
struct BlockOperator {
  EnergyLevelBasis basis;
  ComplexMatrix matrix;

  Eigen::Index n() const { return basis.n; }
  std::int64_t degree() const { return basis.degree; }
};

// Matrix of the quadratic operator on E_m; column alpha holds the expansion
// of P h_alpha.
//
// Ladder calculation fixing the entries: with A_j = d/dx_j + x_j and
// A_j* = -d/dx_j + x_j acting on the normalized Hermite functions,
//   A_j  h_alpha = sqrt(2 alpha_j)       h_{alpha - e_j},
//   A_j* h_alpha = sqrt(2 (alpha_j + 1)) h_{alpha + e_j},
// so for beta = alpha - e_j + e_k,
//   (1/2) m_jk A_k* A_j h_alpha = m_jk sqrt(alpha_j * beta_k) h_beta,
// where beta_k = alpha_k + 1 for k != j and beta_k = alpha_k for k == j.
// Equivalently B(beta, alpha) = m_jk * alpha_j * sqrt(beta! / alpha!), with
// the diagonal j == k contributing m_jj * alpha_j.
BlockOperator p_block(const QuadraticModel& model, std::int64_t m);

// Matrix of the composition v(z) -> v(F z) on the normalized monomials
// z^alpha / sqrt(alpha!) of degree m: K(beta, alpha) = c_beta sqrt(beta!/alpha!)
// where (F z)^alpha = sum_beta c_beta z^beta. Note K(A B) = K(B) K(A).
BlockOperator pullback_block(const ComplexMatrix& f, std::int64_t m);

// exp(-tP) restricted to E_m, built on the Fock side as the pullback of
// e^{-tM}. Independent of expm(p_block(m), -t), which must agree with it.
BlockOperator propagator_block(const QuadraticModel& model, Complex t,
                               std::int64_t m);

// Max relative deviation between the singular values of the degree-m
// propagator block and the products prod_j sigma_j^{alpha_j} over |alpha| = m.
double verify_svd_theorem(const QuadraticModel& model, Complex t, std::int64_t m);

// Blockwise SVD factorization: with e^{-tM} = U2 Sigma U1*, the degree-m
// propagator equals b1.matrix.adjoint() * d.asDiagonal() * b2.matrix.
struct SvdBlocks {
  BlockOperator b1;  // pullback of U1 (unitary)
  RealVector d;      // prod_j sigma_j^{alpha_j} in canonical order
  BlockOperator b2;  // pullback of U2 (unitary)
};
SvdBlocks svd_factorization_blocks(const QuadraticModel& model, Complex t,
                                   std::int64_t m);

struct EigenvalueLadder {
  ComplexVector base;  // eigenvalues of M
  std::int64_t degree{};
  std::vector<std::pair<MultiIndex, Complex>> entries;  // (alpha, sum_j base_j alpha_j)
};
EigenvalueLadder eigen_ladder(const QuadraticModel& model, std::int64_t m);

// Triangularizing frame for the eigenfunction construction: g M g^{-1} is
// upper triangular and block diagonal across eigenvalue clusters (clustered
// at cluster_tol_rel * ||M||), so the coupling above the diagonal only joins
// equal eigenvalues. Monomials in (g z) are then generalized eigenvectors.
struct TriangularFrame {
  ComplexMatrix g;
  ComplexMatrix g_inv;
  ComplexVector eigenvalues;  // diagonal of g M g^{-1}, in frame order
};
TriangularFrame triangular_frame(const QuadraticModel& model,
                                 double cluster_tol_rel = 1e-8);

// Truncated Hermite coefficient vector, one contiguous block per degree.
struct HermiteState {
  Eigen::Index n{};
  std::int64_t max_degree{};
  std::vector<ComplexVector> blocks;  // blocks[m] over enumerate_level(n, m)

  double norm() const;
};

HermiteState zero_state(Eigen::Index n, std::int64_t max_degree);

// Unit-normalized Hermite coefficients of the generalized eigenfunction
// attached to alpha (single degree block |alpha|; lower blocks are zero).
// Its generalized eigenvalue is sum_j frame.eigenvalues[j] * alpha_j.
HermiteState eigenfunction_coeffs(const QuadraticModel& model,
                                  const MultiIndex& alpha);

// Blockwise evolution: each degree block is multiplied by its propagator.
HermiteState propagate(const QuadraticModel& model, Complex t,
                       const HermiteState& state);

}  // namespace qsemi
