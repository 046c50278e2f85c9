#include "qsemi/model.hpp"

#include <cmath>
#include <string>

namespace qsemi {

namespace {

void require_model_params(double x, const char* who) {
  if (!std::isfinite(x)) throw domain_error(std::string(who) + ": non-finite parameter");
}

void enumerate_rec(Eigen::Index n, std::int64_t m, MultiIndex& partial,
                   std::vector<MultiIndex>& out) {
  if (partial.size() + 1 == static_cast<std::size_t>(n)) {
    partial.push_back(m);
    out.push_back(partial);
    partial.pop_back();
    return;
  }
  for (std::int64_t c = m; c >= 0; --c) {
    partial.push_back(c);
    enumerate_rec(n, m - c, partial, out);
    partial.pop_back();
  }
}

}  // namespace

QuadraticModel build_fokker_planck(double a) {
  require_model_params(a, "build_fokker_planck");
  QuadraticModel model;
  model.n = 2;
  model.m.resize(2, 2);
  model.m << Complex(0.0), Complex(-a), Complex(a), Complex(1.0);
  return model;
}

QuadraticModel build_perturbed_fokker_planck(double a, double b) {
  require_model_params(a, "build_perturbed_fokker_planck");
  require_model_params(b, "build_perturbed_fokker_planck");
  QuadraticModel model;
  model.n = 2;
  model.m.resize(2, 2);
  model.m << Complex(-b), Complex(-a), Complex(a), Complex(1.0);
  return model;
}

QuadraticModel build_harmonic_oscillator(Eigen::Index n) {
  if (n < 1) throw precondition_error("build_harmonic_oscillator: n must be >= 1");
  QuadraticModel model;
  model.n = n;
  model.m = ComplexMatrix::Identity(n, n);
  return model;
}

std::int64_t degree_of(const MultiIndex& alpha) {
  std::int64_t deg = 0;
  for (std::int64_t c : alpha) {
    if (c < 0) throw precondition_error("multi-index components must be non-negative");
    deg += c;
  }
  return deg;
}

std::uint64_t block_dimension(Eigen::Index n, std::int64_t m) {
  if (n < 1) throw precondition_error("block_dimension: n must be >= 1");
  if (m < 0) throw precondition_error("block_dimension: m must be >= 0");
  // C(m + n - 1, n - 1) via the multiplicative formula; each partial result
  // is integral.
  const std::int64_t k = n - 1;
  unsigned __int128 result = 1;
  const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 63;
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= static_cast<unsigned __int128>(m + i);
    result /= static_cast<unsigned __int128>(i);
    if (result >= limit)
      throw range_error("block_dimension: dimension exceeds 2^63");
  }
  return static_cast<std::uint64_t>(result);
}

EnergyLevelBasis enumerate_level(Eigen::Index n, std::int64_t m) {
  if (n < 1) throw precondition_error("enumerate_level: n must be >= 1");
  if (m < 0) throw precondition_error("enumerate_level: m must be >= 0");
  EnergyLevelBasis basis;
  basis.n = n;
  basis.degree = m;
  basis.indices.reserve(static_cast<std::size_t>(block_dimension(n, m)));
  MultiIndex partial;
  enumerate_rec(n, m, partial, basis.indices);
  return basis;
}

Eigen::Index EnergyLevelBasis::index_of(const MultiIndex& alpha) const {
  if (alpha.size() != static_cast<std::size_t>(n))
    throw dimension_error("index_of: multi-index length does not match basis");
  if (degree_of(alpha) != degree)
    throw precondition_error("index_of: multi-index degree does not match basis");
  // Rank in descending-lex order: count indices with a larger component at
  // the first position where they differ.
  std::uint64_t pos = 0;
  std::int64_t rem = degree;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (std::int64_t c = rem; c > alpha[static_cast<std::size_t>(i)]; --c)
      pos += block_dimension(n - 1 - i, rem - c);
    rem -= alpha[static_cast<std::size_t>(i)];
  }
  return static_cast<Eigen::Index>(pos);
}

}  // namespace qsemi
