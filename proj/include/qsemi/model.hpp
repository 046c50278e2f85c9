#pragma once

#include <cstdint>
#include <vector>

#include "qsemi/types.hpp"

namespace qsemi {

// The n x n matrix m defines the quadratic operator; every analysis in the
// library is a finite computation on it.
struct QuadraticModel {
  Eigen::Index n{};
  ComplexMatrix m;
};

// Kinetic Fokker-Planck model with rotation strength a: [[0, -a], [a, 1]].
QuadraticModel build_fokker_planck(double a);

// Fokker-Planck with the ellipticity-breaking -b perturbation:
// [[-b, -a], [a, 1]].
QuadraticModel build_perturbed_fokker_planck(double a, double b);

// Isotropic harmonic oscillator: m = identity.
QuadraticModel build_harmonic_oscillator(Eigen::Index n);

using MultiIndex = std::vector<std::int64_t>;

std::int64_t degree_of(const MultiIndex& alpha);

struct MultiIndexHash {
  std::size_t operator()(const MultiIndex& alpha) const {
    std::size_t h = alpha.size();
    for (std::int64_t c : alpha)
      h ^= static_cast<std::size_t>(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// dim E_m = C(m + n - 1, n - 1); throws range_error past 2^63.
std::uint64_t block_dimension(Eigen::Index n, std::int64_t m);

// All multi-indices of degree m, graded-lex order with the lexicographically
// larger index first: (2,0) before (1,1) before (0,2).
struct EnergyLevelBasis {
  Eigen::Index n{};
  std::int64_t degree{};
  std::vector<MultiIndex> indices;

  Eigen::Index size() const { return static_cast<Eigen::Index>(indices.size()); }

  // Position of alpha in the canonical order (combinatorial ranking).
  Eigen::Index index_of(const MultiIndex& alpha) const;
};

EnergyLevelBasis enumerate_level(Eigen::Index n, std::int64_t m);

}  // namespace qsemi
