#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "qsemi/linalg.hpp"
#include "qsemi/model.hpp"

namespace qsemi {

// Singular values of e^{-t m}, ascending, all positive.
struct SingularSpectrum {
  Complex t{};
  RealVector sigma;

  double sigma_max() const { return sigma[sigma.size() - 1]; }
  Eigen::Index n() const { return sigma.size(); }
};

SingularSpectrum singular_spectrum(const QuadraticModel& model, Complex t);

enum class Boundedness { Unbounded, BoundedMarginal, Compact };

struct BoundednessClass {
  Boundedness kind{};
  double sigma_max{};
  double tol{};
};

const char* to_string(Boundedness kind);

// Compact iff sigma_max < 1 - tol, Unbounded iff sigma_max > 1 + tol,
// BoundedMarginal in the band between.
BoundednessClass classify(const SingularSpectrum& spec, double tol = 1e-10);

enum class Ellipticity { NonElliptic, SemiElliptic, StrictlyElliptic };

struct EllipticityResult {
  Ellipticity kind{};
  double min_hermitian_eig{};
};

const char* to_string(Ellipticity kind);

EllipticityResult ellipticity_check(const QuadraticModel& model);

// The k largest values of prod_j sigma_j^{alpha_j} over alpha in N^n,
// descending with multiplicity. Requires sigma_max < 1.
std::vector<double> semigroup_singular_values(const SingularSpectrum& spec,
                                              std::int64_t k);

// Same enumeration in log form: ascending -log s_j, safe from underflow for
// large k. Requires sigma_max < 1.
std::vector<double> semigroup_singular_logs(const SingularSpectrum& spec,
                                            std::int64_t k);

// Degree-capped variant usable when sigma_max >= 1: the k largest products
// over |alpha| <= max_degree.
std::vector<double> semigroup_singular_values_capped(const SingularSpectrum& spec,
                                                     std::int64_t k,
                                                     std::int64_t max_degree);

// sigma_max^{N+1}: the operator norm outside the span of degrees <= N.
double equilibrium_norm(const SingularSpectrum& spec, std::int64_t big_n);

// Largest delta for which the harmonic-oscillator smoothing composition stays
// bounded: -log sigma_max.
double smoothing_exponent(const SingularSpectrum& spec);

// C = (n! * prod_j (-log sigma_j))^{1/n}; requires all sigma_j < 1.
double weyl_constant(const SingularSpectrum& spec);

struct SchattenResult {
  double value{};       // (sum over |alpha| <= cap of prod sigma^alpha^p)^{1/p}
  double tail_bound{};  // bound on the p-th power sum beyond the cap
};

SchattenResult schatten_norm(const SingularSpectrum& spec, double p,
                             std::int64_t degree_cap);

struct LongTimeEnvelope {
  double alpha{};  // minimal real part of the spectrum
  std::int64_t r{};  // largest Jordan block size at the spectral abscissa
  bool degenerate_clustering{};
};

LongTimeEnvelope long_time_envelope(const QuadraticModel& model,
                                    double rank_tol = 1e-9);

struct ProbeResult {
  std::int64_t order{};
  double coefficient{};
};

// Carries the raw samples when the power-law fit is rejected.
struct inconclusive_fit : error {
  inconclusive_fit(const std::string& msg,
                   std::vector<std::pair<double, double>> s)
      : error(msg), samples(std::move(s)) {}
  std::vector<std::pair<double, double>> samples;
};

// Fits ||e^{-t m}|| (or |e^{-t m} z| for a unit direction z) as 1 + c t^p on
// small positive samples; returns the integer order and signed coefficient.
ProbeResult norm_derivative_probe(const QuadraticModel& model,
                                  const std::optional<ComplexVector>& direction,
                                  const std::vector<double>& t_samples);

// Log-spaced default sample set for norm_derivative_probe.
std::vector<double> default_probe_samples();

}  // namespace qsemi
