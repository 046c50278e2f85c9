#include "qsemi/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace qsemi {

namespace {

double log_factorial(const MultiIndex& alpha) {
  double s = 0.0;
  for (std::int64_t c : alpha) s += std::lgamma(static_cast<double>(c) + 1.0);
  return s;
}

// Coefficients of (F z)^alpha over the degree-|alpha| monomials, computed by
// repeated multiplication with the linear forms (F z)_j. `levels` must hold
// enumerate_level(n, d) for d = 0..|alpha|.
ComplexVector expand_row_power(const ComplexMatrix& f, const MultiIndex& alpha,
                               const std::vector<EnergyLevelBasis>& levels) {
  const Eigen::Index n = f.rows();
  ComplexVector cur(1);
  cur[0] = Complex(1.0);
  std::int64_t deg = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::int64_t rep = 0; rep < alpha[static_cast<std::size_t>(j)]; ++rep) {
      const auto& src = levels[static_cast<std::size_t>(deg)];
      const auto& dst = levels[static_cast<std::size_t>(deg + 1)];
      ComplexVector next = ComplexVector::Zero(dst.size());
      for (Eigen::Index i = 0; i < src.size(); ++i) {
        if (cur[i] == Complex(0.0)) continue;
        MultiIndex idx = src.indices[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < n; ++k) {
          const Complex fjk = f(j, k);
          if (fjk == Complex(0.0)) continue;
          ++idx[static_cast<std::size_t>(k)];
          next[dst.index_of(idx)] += cur[i] * fjk;
          --idx[static_cast<std::size_t>(k)];
        }
      }
      cur.swap(next);
      ++deg;
    }
  }
  return cur;
}

std::vector<EnergyLevelBasis> level_ladder(Eigen::Index n, std::int64_t m) {
  std::vector<EnergyLevelBasis> levels;
  levels.reserve(static_cast<std::size_t>(m) + 1);
  for (std::int64_t d = 0; d <= m; ++d) levels.push_back(enumerate_level(n, d));
  return levels;
}

// Products prod_j sigma_j^{alpha_j} over a level, in canonical order.
RealVector sigma_products(const RealVector& sigma, const EnergyLevelBasis& basis) {
  RealVector out(basis.size());
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    double logprod = 0.0;
    const auto& alpha = basis.indices[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < basis.n; ++j)
      logprod += static_cast<double>(alpha[static_cast<std::size_t>(j)]) *
                 std::log(sigma[j]);
    out[i] = std::exp(logprod);
  }
  return out;
}

// Swaps the adjacent diagonal entries k, k+1 of the upper-triangular t by a
// unitary similarity, accumulating the rotation into q.
void swap_schur_entries(ComplexMatrix& t, ComplexMatrix& q, Eigen::Index k) {
  const Complex t11 = t(k, k);
  const Complex t22 = t(k + 1, k + 1);
  const Complex x = t(k, k + 1);
  const Complex diff = t22 - t11;
  const double r = std::hypot(std::abs(x), std::abs(diff));
  if (r == 0.0) return;
  // First column = unit eigenvector of [[t11, x], [0, t22]] for t22.
  const Complex v1 = x / r;
  const Complex v2 = diff / r;
  ComplexMatrix rot(2, 2);
  rot << v1, -std::conj(v2), v2, std::conj(v1);
  t.middleCols(k, 2) = (t.middleCols(k, 2) * rot).eval();
  t.middleRows(k, 2) = (rot.adjoint() * t.middleRows(k, 2)).eval();
  q.middleCols(k, 2) = (q.middleCols(k, 2) * rot).eval();
  t(k + 1, k) = Complex(0.0);
}

// Solves a x - x b = -c for upper-triangular a (p x p) and b (q x q) with
// disjoint spectra, by back-substitution.
ComplexMatrix solve_triangular_sylvester(const ComplexMatrix& a,
                                         const ComplexMatrix& b,
                                         const ComplexMatrix& c) {
  const Eigen::Index p = a.rows();
  const Eigen::Index q = b.rows();
  ComplexMatrix x = ComplexMatrix::Zero(p, q);
  for (Eigen::Index row = p - 1; row >= 0; --row) {
    for (Eigen::Index col = 0; col < q; ++col) {
      Complex rhs = -c(row, col);
      for (Eigen::Index k = row + 1; k < p; ++k) rhs -= a(row, k) * x(k, col);
      for (Eigen::Index k = 0; k < col; ++k) rhs += x(row, k) * b(k, col);
      const Complex denom = a(row, row) - b(col, col);
      x(row, col) = rhs / denom;
    }
  }
  return x;
}

}  // namespace

BlockOperator p_block(const QuadraticModel& model, std::int64_t m) {
  require_square(model.m, "p_block");
  require_finite(model.m, "p_block");
  const Eigen::Index n = model.m.rows();

  BlockOperator block;
  block.basis = enumerate_level(n, m);
  block.matrix = ComplexMatrix::Zero(block.basis.size(), block.basis.size());
  for (Eigen::Index col = 0; col < block.basis.size(); ++col) {
    const MultiIndex& alpha = block.basis.indices[static_cast<std::size_t>(col)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::int64_t aj = alpha[static_cast<std::size_t>(j)];
      if (aj == 0) continue;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (model.m(j, k) == Complex(0.0)) continue;
        MultiIndex beta = alpha;
        --beta[static_cast<std::size_t>(j)];
        ++beta[static_cast<std::size_t>(k)];
        const std::int64_t bk = beta[static_cast<std::size_t>(k)];
        block.matrix(block.basis.index_of(beta), col) +=
            model.m(j, k) * std::sqrt(static_cast<double>(aj) *
                                      static_cast<double>(bk));
      }
    }
  }
  return block;
}

BlockOperator pullback_block(const ComplexMatrix& f, std::int64_t m) {
  require_square(f, "pullback_block");
  require_finite(f, "pullback_block");
  const Eigen::Index n = f.rows();

  BlockOperator block;
  block.basis = enumerate_level(n, m);
  block.matrix.resize(block.basis.size(), block.basis.size());
  const auto levels = level_ladder(n, m);

  std::vector<double> lf(static_cast<std::size_t>(block.basis.size()));
  for (Eigen::Index i = 0; i < block.basis.size(); ++i)
    lf[static_cast<std::size_t>(i)] =
        log_factorial(block.basis.indices[static_cast<std::size_t>(i)]);

  for (Eigen::Index col = 0; col < block.basis.size(); ++col) {
    const ComplexVector coeffs = expand_row_power(
        f, block.basis.indices[static_cast<std::size_t>(col)], levels);
    for (Eigen::Index row = 0; row < block.basis.size(); ++row) {
      const double ratio = std::exp(0.5 * (lf[static_cast<std::size_t>(row)] -
                                           lf[static_cast<std::size_t>(col)]));
      block.matrix(row, col) = coeffs[row] * ratio;
    }
  }
  return block;
}

BlockOperator propagator_block(const QuadraticModel& model, Complex t,
                               std::int64_t m) {
  return pullback_block(expm(model.m, -t), m);
}

double verify_svd_theorem(const QuadraticModel& model, Complex t, std::int64_t m) {
  const ComplexMatrix e = expm(model.m, -t);
  const RealVector sigma = svd_values(e);

  const BlockOperator prop = propagator_block(model, t, m);
  const RealVector computed = svd_values(prop.matrix);

  RealVector expected = sigma_products(sigma, prop.basis);
  std::sort(expected.begin(), expected.end());

  double dev = 0.0;
  for (Eigen::Index i = 0; i < expected.size(); ++i) {
    const double denom = std::max(expected[i], 1e-300);
    dev = std::max(dev, std::abs(computed[i] - expected[i]) / denom);
  }
  return dev;
}

SvdBlocks svd_factorization_blocks(const QuadraticModel& model, Complex t,
                                   std::int64_t m) {
  const SvdFactors factors = svd_full(expm(model.m, -t));
  SvdBlocks out;
  out.b1 = pullback_block(factors.v, m);
  out.b2 = pullback_block(factors.u, m);
  out.d = sigma_products(factors.sigma, out.b1.basis);
  return out;
}

EigenvalueLadder eigen_ladder(const QuadraticModel& model, std::int64_t m) {
  require_square(model.m, "eigen_ladder");
  EigenvalueLadder ladder;
  ladder.base = eig_values(model.m);
  ladder.degree = m;
  const EnergyLevelBasis basis = enumerate_level(model.m.rows(), m);
  ladder.entries.reserve(basis.indices.size());
  for (const auto& alpha : basis.indices) {
    Complex lam(0.0);
    for (Eigen::Index j = 0; j < ladder.base.size(); ++j)
      lam += static_cast<double>(alpha[static_cast<std::size_t>(j)]) *
             ladder.base[j];
    ladder.entries.emplace_back(alpha, lam);
  }
  return ladder;
}

TriangularFrame triangular_frame(const QuadraticModel& model,
                                 double cluster_tol_rel) {
  require_square(model.m, "triangular_frame");
  require_finite(model.m, "triangular_frame");
  const Eigen::Index n = model.m.rows();

  Eigen::ComplexSchur<ComplexMatrix> schur(model.m, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw convergence_error("triangular_frame: Schur reduction did not converge");
  ComplexMatrix t = schur.matrixT();
  ComplexMatrix q = schur.matrixU();

  const double ctol = cluster_tol_rel * model.m.norm();

  // Group clustered eigenvalues transitively: labels[i] = cluster of
  // diagonal entry i.
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  int num_clusters = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<Eigen::Index> frontier{i};
    labels[static_cast<std::size_t>(i)] = num_clusters;
    while (!frontier.empty()) {
      const Eigen::Index k = frontier.back();
      frontier.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (labels[static_cast<std::size_t>(j)] >= 0) continue;
        if (std::abs(t(j, j) - t(k, k)) <= ctol) {
          labels[static_cast<std::size_t>(j)] = num_clusters;
          frontier.push_back(j);
        }
      }
    }
    ++num_clusters;
  }

  // Reorder so clusters are contiguous, bubbling each member left with
  // adjacent unitary swaps (only ever across different clusters).
  Eigen::Index write = 0;
  for (int cl = 0; cl < num_clusters; ++cl) {
    for (Eigen::Index i = write; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] != cl) continue;
      for (Eigen::Index k = i; k > write; --k) {
        swap_schur_entries(t, q, k - 1);
        std::swap(labels[static_cast<std::size_t>(k - 1)],
                  labels[static_cast<std::size_t>(k)]);
      }
      ++write;
    }
  }

  // Cluster block offsets in the reordered form.
  std::vector<Eigen::Index> starts, sizes;
  for (Eigen::Index i = 0; i < n;) {
    Eigen::Index j = i;
    while (j < n && labels[static_cast<std::size_t>(j)] ==
                        labels[static_cast<std::size_t>(i)])
      ++j;
    starts.push_back(i);
    sizes.push_back(j - i);
    i = j;
  }
  const std::size_t blocks = starts.size();

  // Kill the coupling between distinct clusters with Sylvester solves,
  // sweeping by superdiagonal span so eliminated blocks stay zero.
  ComplexMatrix w = ComplexMatrix::Identity(n, n);
  for (std::size_t span = 1; span < blocks; ++span) {
    for (std::size_t bi = 0; bi + span < blocks; ++bi) {
      const std::size_t bj = bi + span;
      const ComplexMatrix x = solve_triangular_sylvester(
          t.block(starts[bi], starts[bi], sizes[bi], sizes[bi]),
          t.block(starts[bj], starts[bj], sizes[bj], sizes[bj]),
          t.block(starts[bi], starts[bj], sizes[bi], sizes[bj]));
      ComplexMatrix s = ComplexMatrix::Identity(n, n);
      s.block(starts[bi], starts[bj], sizes[bi], sizes[bj]) = x;
      ComplexMatrix s_inv = ComplexMatrix::Identity(n, n);
      s_inv.block(starts[bi], starts[bj], sizes[bi], sizes[bj]) = -x;
      t = s_inv * t * s;
      w = w * s;
      t.block(starts[bi], starts[bj], sizes[bi], sizes[bj]).setZero();
    }
  }

  TriangularFrame frame;
  frame.g_inv = q * w;
  frame.g = frame.g_inv.partialPivLu().inverse();
  frame.eigenvalues = t.diagonal();
  return frame;
}

double HermiteState::norm() const {
  double sq = 0.0;
  for (const auto& block : blocks) sq += block.squaredNorm();
  return std::sqrt(sq);
}

HermiteState zero_state(Eigen::Index n, std::int64_t max_degree) {
  if (n < 1) throw precondition_error("zero_state: n must be >= 1");
  if (max_degree < 0) throw precondition_error("zero_state: max_degree must be >= 0");
  HermiteState state;
  state.n = n;
  state.max_degree = max_degree;
  state.blocks.reserve(static_cast<std::size_t>(max_degree) + 1);
  for (std::int64_t m = 0; m <= max_degree; ++m)
    state.blocks.emplace_back(ComplexVector::Zero(
        static_cast<Eigen::Index>(block_dimension(n, m))));
  return state;
}

HermiteState eigenfunction_coeffs(const QuadraticModel& model,
                                  const MultiIndex& alpha) {
  require_square(model.m, "eigenfunction_coeffs");
  if (alpha.size() != static_cast<std::size_t>(model.m.rows()))
    throw dimension_error("eigenfunction_coeffs: multi-index length mismatch");
  const std::int64_t m = degree_of(alpha);

  const TriangularFrame frame = triangular_frame(model);
  const auto levels = level_ladder(model.m.rows(), m);
  const ComplexVector coeffs = expand_row_power(frame.g, alpha, levels);
  const EnergyLevelBasis& basis = levels.back();

  HermiteState state = zero_state(model.m.rows(), m);
  ComplexVector& top = state.blocks.back();
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    top[i] = coeffs[i] * std::exp(0.5 * log_factorial(
                                            basis.indices[static_cast<std::size_t>(i)]));
  const double nrm = top.stableNorm();
  if (nrm == 0.0)
    throw domain_error("eigenfunction_coeffs: expansion vanished (singular frame)");
  top /= nrm;
  return state;
}

HermiteState propagate(const QuadraticModel& model, Complex t,
                       const HermiteState& state) {
  require_square(model.m, "propagate");
  if (state.n != model.m.rows())
    throw dimension_error("propagate: state dimension does not match model");
  HermiteState out = state;
  for (std::int64_t m = 0; m <= state.max_degree; ++m) {
    const auto& block = state.blocks[static_cast<std::size_t>(m)];
    if (block.isZero(0.0)) continue;
    out.blocks[static_cast<std::size_t>(m)] =
        propagator_block(model, t, m).matrix * block;
  }
  return out;
}

}  // namespace qsemi
