#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qsemi/fock.hpp"
#include "qsemi/semigroup.hpp"

using namespace qsemi;
using oracles::random_complex_matrix;
using oracles::random_unitary;

namespace {

QuadraticModel model_from(const ComplexMatrix& m) {
  return QuadraticModel{m.rows(), m};
}

double op_rel_err(const ComplexMatrix& got, const ComplexMatrix& want) {
  return spectral_norm(got - want) / std::max(spectral_norm(want), 1e-300);
}

// Draws with |t| * ||M|| <= 1.2, which keeps every blockwise singular value
// at degree <= 8 within a verifiable distance of the block norm in double
// precision (the spread of e^{-tM} is at most e^{2.4}).
struct VerifiableDraw {
  QuadraticModel model;
  Complex t;
};

VerifiableDraw draw_verifiable(std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = 2 + static_cast<Eigen::Index>(unif(rng) * 2.0);
  const double norm = 0.3 + 2.7 * unif(rng);
  const double tmax = std::min(2.0, 1.2 / norm);
  const double radius = tmax * (0.1 + 0.9 * unif(rng));
  const double angle = 2.0 * M_PI * unif(rng);
  return {model_from(random_complex_matrix(rng, n, norm)),
          radius * Complex(std::cos(angle), std::sin(angle))};
}

}  // namespace

TEST_CASE("p_block structure") {
  SUBCASE("one dimension: the harmonic ladder is diagonal with degree m") {
    const QuadraticModel q0 = build_harmonic_oscillator(1);
    for (std::int64_t m : {0, 1, 4, 9}) {
      const BlockOperator block = p_block(q0, m);
      REQUIRE(block.matrix.rows() == 1);
      CHECK(block.matrix(0, 0) == Complex(static_cast<double>(m)));
    }
  }
  SUBCASE("harmonic oscillator in n dimensions is m times the identity") {
    const QuadraticModel q0 = build_harmonic_oscillator(3);
    const BlockOperator block = p_block(q0, 4);
    CHECK((block.matrix -
           4.0 * ComplexMatrix::Identity(block.matrix.rows(), block.matrix.cols()))
              .norm() < 1e-14);
  }
  SUBCASE("degree zero annihilates the ground state") {
    std::mt19937 rng(20);
    const QuadraticModel model = model_from(random_complex_matrix(rng, 3, 2.0));
    const BlockOperator block = p_block(model, 0);
    REQUIRE(block.matrix.rows() == 1);
    CHECK(block.matrix(0, 0) == Complex(0.0));
  }
  SUBCASE("degree one is the transpose of M") {
    std::mt19937 rng(21);
    for (Eigen::Index n : {2, 3, 4}) {
      const QuadraticModel model = model_from(random_complex_matrix(rng, n, 1.4));
      const BlockOperator block = p_block(model, 1);
      CHECK((block.matrix - model.m.transpose()).norm() < 1e-14);
    }
  }
}

TEST_CASE("pullback_block structure") {
  std::mt19937 rng(22);
  SUBCASE("identity pulls back to the identity") {
    const BlockOperator block = pullback_block(ComplexMatrix::Identity(3, 3), 4);
    CHECK((block.matrix -
           ComplexMatrix::Identity(block.matrix.rows(), block.matrix.cols()))
              .norm() == 0.0);
  }
  SUBCASE("degree one is the transpose") {
    const ComplexMatrix f = random_complex_matrix(rng, 3, 1.8);
    const BlockOperator block = pullback_block(f, 1);
    CHECK((block.matrix - f.transpose()).norm() < 1e-14);
  }
  SUBCASE("one dimension gives plain powers") {
    ComplexMatrix f(1, 1);
    f << Complex(0.3, -1.1);
    for (std::int64_t m : {0, 1, 5}) {
      const BlockOperator block = pullback_block(f, m);
      CHECK(std::abs(block.matrix(0, 0) - std::pow(f(0, 0), m)) < 1e-13);
    }
  }
  SUBCASE("anti-homomorphism: K(A B) = K(B) K(A)") {
    const ComplexMatrix a = random_complex_matrix(rng, 2, 1.2);
    const ComplexMatrix b = random_complex_matrix(rng, 2, 1.5);
    const std::int64_t m = 4;
    const ComplexMatrix lhs = pullback_block(a * b, m).matrix;
    const ComplexMatrix rhs = pullback_block(b, m).matrix * pullback_block(a, m).matrix;
    CHECK(op_rel_err(lhs, rhs) < 1e-13);
  }
  SUBCASE("unitary matrices pull back to unitary blocks") {
    for (int trial = 0; trial < 8; ++trial) {
      const Eigen::Index n = 2 + trial % 2;
      const ComplexMatrix u = random_unitary(rng, n);
      for (std::int64_t m : {2, 5}) {
        const BlockOperator block = pullback_block(u, m);
        const Eigen::Index dim = block.matrix.rows();
        CHECK((block.matrix.adjoint() * block.matrix -
               ComplexMatrix::Identity(dim, dim))
                  .norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("propagator_block") {
  SUBCASE("t = 0 is the identity") {
    const QuadraticModel model = build_fokker_planck(2.0);
    const BlockOperator block = propagator_block(model, Complex(0.0), 5);
    CHECK((block.matrix -
           ComplexMatrix::Identity(block.matrix.rows(), block.matrix.cols()))
              .norm() == 0.0);
  }
  SUBCASE("harmonic oscillator scales E_m by e^{-tm}") {
    const BlockOperator block =
        propagator_block(build_harmonic_oscillator(2), Complex(1.0), 2);
    REQUIRE(block.matrix.rows() == 3);
    CHECK(op_rel_err(block.matrix, std::exp(-2.0) * ComplexMatrix::Identity(3, 3)) <
          1e-13);
  }
  SUBCASE("agrees with the Hermite-ladder construction for all degrees") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
      const Eigen::Index n = 2 + trial % 2;
      const QuadraticModel model = model_from(random_complex_matrix(rng, n, 1.0 + trial % 3));
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      const Complex t(unif(rng), unif(rng));
      for (std::int64_t m = 0; m <= 8; ++m) {
        const BlockOperator fockside = propagator_block(model, t, m);
        const ComplexMatrix ladder = expm(p_block(model, m).matrix, -t);
        CHECK(op_rel_err(fockside.matrix, ladder) <= 1e-9);
      }
    }
  }
  SUBCASE("semigroup property degree by degree") {
    std::mt19937 rng(24);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
      const QuadraticModel model = model_from(random_complex_matrix(rng, 2, 1.3));
      const Complex s(unif(rng), unif(rng));
      const Complex t(unif(rng), unif(rng));
      for (std::int64_t m : {1, 3, 6}) {
        const ComplexMatrix whole = propagator_block(model, s + t, m).matrix;
        const ComplexMatrix split = propagator_block(model, s, m).matrix *
                                    propagator_block(model, t, m).matrix;
        CHECK(op_rel_err(split, whole) <= 1e-9);
      }
    }
  }
}

TEST_CASE("verify_svd_theorem") {
  SUBCASE("t = 0: both sides are all ones") {
    std::mt19937 rng(25);
    const QuadraticModel model = model_from(random_complex_matrix(rng, 3, 2.5));
    for (std::int64_t m : {0, 3, 6}) CHECK(verify_svd_theorem(model, Complex(0.0), m) == 0.0);
  }
  SUBCASE("harmonic oscillator, degenerate products") {
    CHECK(verify_svd_theorem(build_harmonic_oscillator(2), Complex(1.0), 2) < 1e-12);
  }
  SUBCASE("headline: Fokker-Planck a=1, t=1 up to degree 6") {
    const QuadraticModel model = build_fokker_planck(1.0);
    for (std::int64_t m = 0; m <= 6; ++m)
      CHECK(verify_svd_theorem(model, Complex(1.0), m) < 1e-8);
  }
  SUBCASE("random verifiable draws up to degree 8") {
    std::mt19937 rng(26);
    for (int trial = 0; trial < 10; ++trial) {
      const auto [model, t] = draw_verifiable(rng);
      for (std::int64_t m = 0; m <= 8; ++m)
        CHECK(verify_svd_theorem(model, t, m) <= 1e-8);
    }
  }
}

TEST_CASE("svd_factorization_blocks") {
  SUBCASE("t = 0: disjoint unitary pair, unit diagonal") {
    const QuadraticModel model = build_fokker_planck(3.0);
    const SvdBlocks blocks = svd_factorization_blocks(model, Complex(0.0), 3);
    for (Eigen::Index i = 0; i < blocks.d.size(); ++i)
      CHECK(blocks.d[i] == doctest::Approx(1.0).epsilon(1e-12));
    const ComplexMatrix recon = blocks.b1.matrix.adjoint() *
                                blocks.d.asDiagonal() * blocks.b2.matrix;
    const BlockOperator prop = propagator_block(model, Complex(0.0), 3);
    CHECK(op_rel_err(recon, prop.matrix) < 1e-12);
  }
  SUBCASE("one dimension: unimodular scalars and sigma^m") {
    ComplexMatrix m(1, 1);
    m << Complex(0.4, 0.3);
    const QuadraticModel model = model_from(m);
    const Complex t(0.8, -0.2);
    const SvdBlocks blocks = svd_factorization_blocks(model, t, 5);
    CHECK(std::abs(std::abs(blocks.b1.matrix(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(std::abs(blocks.b2.matrix(0, 0)) - 1.0) < 1e-12);
    const double sigma = svd_values(expm(model.m, -t))[0];
    CHECK(blocks.d[0] == doctest::Approx(std::pow(sigma, 5.0)).epsilon(1e-12));
  }
  SUBCASE("reconstruction residual for the Fokker-Planck model") {
    const QuadraticModel model = build_fokker_planck(5.0);
    const Complex t(1.0, 0.0);
    const SvdBlocks blocks = svd_factorization_blocks(model, t, 3);
    const ComplexMatrix recon = blocks.b1.matrix.adjoint() *
                                blocks.d.asDiagonal() * blocks.b2.matrix;
    const BlockOperator prop = propagator_block(model, t, 3);
    CHECK(op_rel_err(recon, prop.matrix) < 1e-9);
  }
  SUBCASE("reconstruction residual on random draws") {
    std::mt19937 rng(27);
    for (int trial = 0; trial < 8; ++trial) {
      const auto [model, t] = draw_verifiable(rng);
      for (std::int64_t m : {1, 4, 7}) {
        const SvdBlocks blocks = svd_factorization_blocks(model, t, m);
        const ComplexMatrix recon = blocks.b1.matrix.adjoint() *
                                    blocks.d.asDiagonal() * blocks.b2.matrix;
        const BlockOperator prop = propagator_block(model, t, m);
        CHECK(op_rel_err(recon, prop.matrix) <= 1e-9);
        // Factor blocks are unitary.
        const Eigen::Index dim = prop.matrix.rows();
        CHECK((blocks.b1.matrix.adjoint() * blocks.b1.matrix -
               ComplexMatrix::Identity(dim, dim)).norm() <= 1e-10);
        CHECK((blocks.b2.matrix.adjoint() * blocks.b2.matrix -
               ComplexMatrix::Identity(dim, dim)).norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("eigen_ladder") {
  SUBCASE("diagonal model") {
    ComplexMatrix d(2, 2);
    d << Complex(1), Complex(0), Complex(0), Complex(2);
    const EigenvalueLadder ladder = eigen_ladder(model_from(d), 2);
    ComplexVector got(3), want(3);
    for (int i = 0; i < 3; ++i) got[i] = ladder.entries[i].second;
    want << Complex(2), Complex(3), Complex(4);
    CHECK(oracles::multiset_match_distance(got, want) < 1e-12);
  }
  SUBCASE("degree zero is {0}") {
    const EigenvalueLadder ladder = eigen_ladder(build_fokker_planck(5.0), 0);
    REQUIRE(ladder.entries.size() == 1);
    CHECK(std::abs(ladder.entries[0].second) < 1e-14);
  }
  SUBCASE("Fokker-Planck degree one recovers the base eigenvalues") {
    const EigenvalueLadder ladder = eigen_ladder(build_fokker_planck(5.0), 1);
    ComplexVector got(2), want(2);
    for (int i = 0; i < 2; ++i) got[i] = ladder.entries[i].second;
    want << Complex(0.5, std::sqrt(99.0) / 2.0), Complex(0.5, -std::sqrt(99.0) / 2.0);
    CHECK(oracles::multiset_match_distance(got, want) < 1e-12);
  }
  SUBCASE("matches the spectrum of the level block for separated models") {
    std::mt19937 rng(28);
    int kept = 0;
    while (kept < 8) {
      const Eigen::Index n = 2 + kept % 2;
      const QuadraticModel model = model_from(random_complex_matrix(rng, n, 1.5));
      const ComplexVector eigs = eig_values(model.m);
      double sep = 1e9;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
          sep = std::min(sep, std::abs(eigs[i] - eigs[j]));
      if (sep < 0.1) continue;
      ++kept;
      for (std::int64_t m : {2, 4}) {
        const EigenvalueLadder ladder = eigen_ladder(model, m);
        const ComplexVector block_eigs = eig_values(p_block(model, m).matrix);
        ComplexVector expected(static_cast<Eigen::Index>(ladder.entries.size()));
        for (std::size_t i = 0; i < ladder.entries.size(); ++i)
          expected[static_cast<Eigen::Index>(i)] = ladder.entries[i].second;
        CHECK(oracles::multiset_match_distance(block_eigs, expected) < 1e-6);
      }
    }
  }
}

TEST_CASE("triangular_frame") {
  std::mt19937 rng(29);
  SUBCASE("frame triangularizes with cluster-local coupling") {
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 2 + trial % 3;
      const QuadraticModel model = model_from(random_complex_matrix(rng, n, 2.0));
      const TriangularFrame frame = triangular_frame(model);
      const ComplexMatrix t = frame.g * model.m * frame.g_inv;
      // Upper triangular with the eigenvalues on the diagonal.
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(t(i, j)) < 1e-10);
      CHECK(oracles::multiset_match_distance(t.diagonal(), eig_values(model.m)) < 1e-8);
      // Off-diagonal coupling only joins (numerically) equal eigenvalues.
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
          if (std::abs(t(i, j)) > 1e-8)
            CHECK(std::abs(t(i, i) - t(j, j)) < 1e-6);
    }
  }
  SUBCASE("already-triangular Jordan matrix keeps its frame") {
    ComplexMatrix j(2, 2);
    j << Complex(1), Complex(1), Complex(0), Complex(1);
    const TriangularFrame frame = triangular_frame(model_from(j));
    const ComplexMatrix t = frame.g * j * frame.g_inv;
    CHECK(std::abs(t(1, 0)) < 1e-12);
    CHECK(std::abs(t(0, 0) - Complex(1.0)) < 1e-12);
    CHECK(std::abs(t(1, 1) - Complex(1.0)) < 1e-12);
  }
  SUBCASE("repeated eigenvalues in separated positions get regrouped") {
    ComplexMatrix a = ComplexMatrix::Zero(3, 3);
    a(0, 0) = Complex(1.0);
    a(1, 1) = Complex(5.0);
    a(2, 2) = Complex(1.0);
    a(0, 1) = Complex(2.0);
    a(1, 2) = Complex(-1.0);
    a(0, 2) = Complex(0.5);
    const TriangularFrame frame = triangular_frame(model_from(a));
    const ComplexMatrix t = frame.g * a * frame.g_inv;
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = i + 1; j < 3; ++j)
        if (std::abs(t(i, j)) > 1e-9)
          CHECK(std::abs(t(i, i) - t(j, j)) < 1e-8);
  }
}

TEST_CASE("eigenfunction_coeffs") {
  SUBCASE("diagonal model: plain Hermite functions") {
    ComplexMatrix d(2, 2);
    d << Complex(2), Complex(0), Complex(0), Complex(3);
    const HermiteState state = eigenfunction_coeffs(model_from(d), {1, 2});
    const EnergyLevelBasis basis = enumerate_level(2, 3);
    const ComplexVector& top = state.blocks.back();
    for (Eigen::Index i = 0; i < basis.size(); ++i) {
      const double want = basis.indices[static_cast<std::size_t>(i)] ==
                                  MultiIndex{1, 2}
                              ? 1.0
                              : 0.0;
      CHECK(std::abs(top[i]) == doctest::Approx(want).epsilon(1e-10));
    }
  }
  SUBCASE("one dimension: unit scalar") {
    ComplexMatrix m(1, 1);
    m << Complex(0.7, 0.2);
    const HermiteState state = eigenfunction_coeffs(model_from(m), {4});
    CHECK(std::abs(state.blocks.back()[0]) == doctest::Approx(1.0));
  }
  SUBCASE("Jordan block carries an exact two-step nilpotent chain") {
    ComplexMatrix j(2, 2);
    j << Complex(1), Complex(1), Complex(0), Complex(1);
    const QuadraticModel model = model_from(j);
    const HermiteState state = eigenfunction_coeffs(model, {1, 0});
    const ComplexVector v = state.blocks.back();
    // (G z)^{(1,0)} = z_1 since the matrix is already triangular.
    CHECK(std::abs(v[0]) == doctest::Approx(1.0));
    CHECK(std::abs(v[1]) < 1e-14);

    const ComplexMatrix b = p_block(model, 1).matrix;
    const ComplexMatrix shifted = b - Complex(1.0) * ComplexMatrix::Identity(2, 2);
    CHECK(mat_power_apply(shifted, v, 1).norm() > 0.5);  // genuinely generalized
    CHECK(mat_power_apply(shifted, v, 2).norm() < 1e-14);
  }
  SUBCASE("nilpotency at exponent (n-1)|alpha|+1 on random draws") {
    std::mt19937 rng(30);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 2 + trial % 2;
      const QuadraticModel model = model_from(random_complex_matrix(rng, n, 1.5));
      const TriangularFrame frame = triangular_frame(model);
      for (std::int64_t m = 1; m <= 5; ++m) {
        const EnergyLevelBasis basis = enumerate_level(n, m);
        for (const MultiIndex& alpha : basis.indices) {
          const HermiteState state = eigenfunction_coeffs(model, alpha);
          const ComplexVector& v = state.blocks.back();
          Complex lambda(0.0);
          for (Eigen::Index jj = 0; jj < n; ++jj)
            lambda += static_cast<double>(alpha[static_cast<std::size_t>(jj)]) *
                      frame.eigenvalues[jj];
          const ComplexMatrix b = p_block(model, m).matrix;
          const Eigen::Index dim = b.rows();
          const ComplexMatrix shifted = b - lambda * ComplexMatrix::Identity(dim, dim);
          const std::int64_t power = (n - 1) * m + 1;
          const double scale =
              std::pow(spectral_norm(b) + std::abs(lambda), static_cast<double>(power));
          CHECK(mat_power_apply(shifted, v, power).norm() <= 1e-8 * scale);
        }
      }
    }
  }
}

TEST_CASE("propagate") {
  SUBCASE("the ground state is an equilibrium") {
    const QuadraticModel model = build_fokker_planck(5.0);
    HermiteState state = zero_state(2, 0);
    state.blocks[0][0] = Complex(1.0);
    for (double t : {0.2, 1.0, 7.0}) {
      const HermiteState moved = propagate(model, Complex(t), state);
      CHECK(std::abs(moved.blocks[0][0] - Complex(1.0)) < 1e-14);
    }
  }
  SUBCASE("harmonic oscillator scales degree blocks by e^{-tm}") {
    const QuadraticModel model = build_harmonic_oscillator(2);
    HermiteState state = zero_state(2, 1);
    state.blocks[1][0] = Complex(0.6);
    state.blocks[1][1] = Complex(0.0, 0.8);
    const HermiteState moved = propagate(model, Complex(1.0), state);
    CHECK((moved.blocks[1] - std::exp(-1.0) * state.blocks[1]).norm() < 1e-14);
  }
  SUBCASE("states orthogonal to low degrees contract by sigma_max^{N+1}") {
    std::mt19937 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const Eigen::Index n = 2 + trial % 2;
      ComplexMatrix m = random_complex_matrix(rng, n, 1.5);
      const double h = hermitian_min_eig(m);
      if (h < 0.0) m += (-h) * ComplexMatrix::Identity(n, n);
      const QuadraticModel model = model_from(m);
      const double t = 0.3 + trial * 0.2;

      const std::int64_t big_n = trial % 3;
      HermiteState state = zero_state(n, big_n + 3);
      for (std::int64_t deg = big_n + 1; deg <= big_n + 3; ++deg)
        for (Eigen::Index i = 0; i < state.blocks[static_cast<std::size_t>(deg)].size(); ++i)
          state.blocks[static_cast<std::size_t>(deg)][i] = Complex(gauss(rng), gauss(rng));

      const SingularSpectrum spec = singular_spectrum(model, Complex(t));
      const HermiteState moved = propagate(model, Complex(t), state);
      CHECK(moved.norm() <=
            (equilibrium_norm(spec, big_n) + 1e-10) * state.norm());
    }
  }
  SUBCASE("round trip with the reversed time returns the state") {
    std::mt19937 rng(32);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const QuadraticModel model = model_from(random_complex_matrix(rng, 2, 1.2));
    HermiteState state = zero_state(2, 4);
    for (auto& block : state.blocks)
      for (Eigen::Index i = 0; i < block.size(); ++i)
        block[i] = Complex(gauss(rng), gauss(rng));
    const Complex t(0.7, 0.3);
    const HermiteState back = propagate(model, -t, propagate(model, t, state));
    double diff = 0.0;
    for (std::size_t b = 0; b < state.blocks.size(); ++b)
      diff += (back.blocks[b] - state.blocks[b]).squaredNorm();
    CHECK(std::sqrt(diff) <= 1e-8 * state.norm());
  }
  SUBCASE("block operator norm equals sigma_max^m") {
    std::mt19937 rng(33);
    for (int trial = 0; trial < 8; ++trial) {
      const auto [model, t] = draw_verifiable(rng);
      const SingularSpectrum spec = singular_spectrum(model, t);
      for (std::int64_t m = 0; m <= 8; ++m) {
        const double got = spectral_norm(propagator_block(model, t, m).matrix);
        const double want = std::pow(spec.sigma_max(), static_cast<double>(m));
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
      }
    }
  }
}
