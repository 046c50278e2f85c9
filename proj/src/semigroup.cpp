#include "qsemi/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace qsemi {

namespace {

void require_spectrum(const SingularSpectrum& spec) {
  if (spec.sigma.size() < 1)
    throw dimension_error("singular spectrum is empty");
}

std::vector<double> neg_log_sigma(const SingularSpectrum& spec) {
  std::vector<double> logs(static_cast<std::size_t>(spec.sigma.size()));
  for (Eigen::Index j = 0; j < spec.sigma.size(); ++j)
    logs[static_cast<std::size_t>(j)] = -std::log(spec.sigma[j]);
  return logs;
}

// Union-find clustering of complex values by pairwise distance <= tol.
std::vector<std::vector<Eigen::Index>> cluster_values(const ComplexVector& vals,
                                                      double tol) {
  const Eigen::Index n = vals.size();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](Eigen::Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(vals[i] - vals[j]) <= tol)
        parent[static_cast<std::size_t>(find(i))] = find(j);
  std::vector<std::vector<Eigen::Index>> clusters;
  std::vector<Eigen::Index> root_slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = find(i);
    if (root_slot[static_cast<std::size_t>(r)] < 0) {
      root_slot[static_cast<std::size_t>(r)] =
          static_cast<Eigen::Index>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(root_slot[static_cast<std::size_t>(r)])]
        .push_back(i);
  }
  return clusters;
}

}  // namespace

SingularSpectrum singular_spectrum(const QuadraticModel& model, Complex t) {
  require_square(model.m, "singular_spectrum");
  SingularSpectrum spec;
  spec.t = t;
  spec.sigma = svd_values(expm(model.m, -t));
  if (spec.sigma[0] <= 0.0)
    throw domain_error(
        "singular_spectrum: e^{-tM} is numerically singular at this time");
  return spec;
}

const char* to_string(Boundedness kind) {
  switch (kind) {
    case Boundedness::Unbounded: return "Unbounded";
    case Boundedness::BoundedMarginal: return "BoundedMarginal";
    case Boundedness::Compact: return "Compact";
  }
  return "?";
}

BoundednessClass classify(const SingularSpectrum& spec, double tol) {
  require_spectrum(spec);
  if (tol < 0.0) throw precondition_error("classify: tol must be >= 0");
  BoundednessClass out;
  out.sigma_max = spec.sigma_max();
  out.tol = tol;
  if (out.sigma_max > 1.0 + tol)
    out.kind = Boundedness::Unbounded;
  else if (out.sigma_max < 1.0 - tol)
    out.kind = Boundedness::Compact;
  else
    out.kind = Boundedness::BoundedMarginal;
  return out;
}

const char* to_string(Ellipticity kind) {
  switch (kind) {
    case Ellipticity::NonElliptic: return "non-elliptic";
    case Ellipticity::SemiElliptic: return "semi-elliptic";
    case Ellipticity::StrictlyElliptic: return "strictly-elliptic";
  }
  return "?";
}

EllipticityResult ellipticity_check(const QuadraticModel& model) {
  require_square(model.m, "ellipticity_check");
  EllipticityResult out;
  out.min_hermitian_eig = hermitian_min_eig(model.m);
  const double tol = 1e-12 * spectral_norm(model.m);
  if (out.min_hermitian_eig > tol)
    out.kind = Ellipticity::StrictlyElliptic;
  else if (out.min_hermitian_eig < -tol)
    out.kind = Ellipticity::NonElliptic;
  else
    out.kind = Ellipticity::SemiElliptic;
  return out;
}

std::vector<double> semigroup_singular_logs(const SingularSpectrum& spec,
                                            std::int64_t k) {
  require_spectrum(spec);
  if (k < 1) throw precondition_error("semigroup singular values: k must be >= 1");
  if (!(spec.sigma_max() < 1.0))
    throw precondition_error(
        "semigroup singular values: ||e^{-tM}|| >= 1, the multiset has no "
        "finite top-k; use the degree-capped variant");

  const auto logs = neg_log_sigma(spec);
  const std::size_t n = logs.size();

  // Best-first search over N^n: pop the smallest accumulated log, expand to
  // the n successors alpha + e_j.
  using Node = std::pair<double, MultiIndex>;
  auto cmp = [](const Node& a, const Node& b) { return a.first > b.first; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> heap(cmp);
  std::unordered_set<MultiIndex, MultiIndexHash> visited;

  MultiIndex origin(n, 0);
  heap.emplace(0.0, origin);
  visited.insert(origin);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(k));
  while (!heap.empty() && out.size() < static_cast<std::size_t>(k)) {
    auto [s, alpha] = heap.top();
    heap.pop();
    out.push_back(s);
    for (std::size_t j = 0; j < n; ++j) {
      MultiIndex next = alpha;
      ++next[j];
      if (visited.insert(next).second) heap.emplace(s + logs[j], next);
    }
  }
  return out;
}

std::vector<double> semigroup_singular_values(const SingularSpectrum& spec,
                                              std::int64_t k) {
  auto logs = semigroup_singular_logs(spec, k);
  std::vector<double> values(logs.size());
  std::transform(logs.begin(), logs.end(), values.begin(),
                 [](double s) { return std::exp(-s); });
  return values;
}

std::vector<double> semigroup_singular_values_capped(const SingularSpectrum& spec,
                                                     std::int64_t k,
                                                     std::int64_t max_degree) {
  require_spectrum(spec);
  if (k < 1) throw precondition_error("semigroup singular values: k must be >= 1");
  if (max_degree < 0)
    throw precondition_error("semigroup singular values: max_degree must be >= 0");
  const Eigen::Index n = spec.sigma.size();
  std::uint64_t total = 0;
  for (std::int64_t m = 0; m <= max_degree; ++m) total += block_dimension(n, m);
  if (total > 50'000'000ULL)
    throw precondition_error("semigroup singular values: capped enumeration too large");

  const auto logs = neg_log_sigma(spec);
  std::vector<double> acc;
  acc.reserve(static_cast<std::size_t>(total));
  for (std::int64_t m = 0; m <= max_degree; ++m) {
    for (const auto& alpha : enumerate_level(n, m).indices) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        s += static_cast<double>(alpha[static_cast<std::size_t>(j)]) *
             logs[static_cast<std::size_t>(j)];
      acc.push_back(s);
    }
  }
  std::sort(acc.begin(), acc.end());
  const std::size_t take = std::min<std::size_t>(acc.size(), static_cast<std::size_t>(k));
  std::vector<double> values(take);
  for (std::size_t i = 0; i < take; ++i) values[i] = std::exp(-acc[i]);
  return values;
}

double equilibrium_norm(const SingularSpectrum& spec, std::int64_t big_n) {
  require_spectrum(spec);
  if (big_n < 0) throw precondition_error("equilibrium_norm: N must be >= 0");
  const double tol = 1e-10;
  if (spec.sigma_max() > 1.0 + tol)
    throw precondition_error("equilibrium_norm: requires ||e^{-tM}|| <= 1");
  return std::pow(spec.sigma_max(), static_cast<double>(big_n + 1));
}

double smoothing_exponent(const SingularSpectrum& spec) {
  require_spectrum(spec);
  return -std::log(spec.sigma_max());
}

double weyl_constant(const SingularSpectrum& spec) {
  require_spectrum(spec);
  if (!(spec.sigma_max() < 1.0))
    throw precondition_error("weyl_constant: operator not compact (some sigma >= 1)");
  const auto logs = neg_log_sigma(spec);
  double prod = 1.0;
  for (double v : logs) prod *= v;
  double factorial = 1.0;
  for (std::size_t i = 2; i <= logs.size(); ++i) factorial *= static_cast<double>(i);
  return std::pow(factorial * prod, 1.0 / static_cast<double>(logs.size()));
}

SchattenResult schatten_norm(const SingularSpectrum& spec, double p,
                             std::int64_t degree_cap) {
  require_spectrum(spec);
  if (!(p > 0.0) || !std::isfinite(p))
    throw precondition_error("schatten_norm: p must be positive");
  if (degree_cap < 0)
    throw precondition_error("schatten_norm: degree_cap must be >= 0");
  if (!(spec.sigma_max() < 1.0))
    throw precondition_error("schatten_norm: operator not compact (some sigma >= 1)");

  const Eigen::Index n = spec.sigma.size();
  const std::size_t cap = static_cast<std::size_t>(degree_cap);

  // Complete homogeneous sums h_m of x_j = sigma_j^p, degree by degree.
  std::vector<double> h(cap + 1, 0.0);
  h[0] = 1.0;
  std::vector<double> next(cap + 1);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x = std::pow(spec.sigma[j], p);
    if (j == 0) {
      double pw = 1.0;
      for (std::size_t m = 0; m <= cap; ++m) {
        h[m] = pw;
        pw *= x;
      }
      continue;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t m = 0; m <= cap; ++m) {
      double pw = 1.0;
      for (std::size_t i = 0; i <= m; ++i) {
        next[m] += pw * h[m - i];
        pw *= x;
      }
    }
    h.swap(next);
  }

  SchattenResult out;
  double power_sum = 0.0;
  for (std::size_t m = 0; m <= cap; ++m) power_sum += h[m];
  out.value = std::pow(power_sum, 1.0 / p);

  // Tail of the p-th power sum, bounded degree by degree through
  // sigma_max^{p m} * dim E_m.
  const double x = std::pow(spec.sigma_max(), p);
  const double nd = static_cast<double>(n);
  double m = static_cast<double>(degree_cap + 1);
  double term = std::exp(std::lgamma(m + nd) - std::lgamma(m + 1.0) -
                         std::lgamma(nd) + m * std::log(x));
  double tail = 0.0;
  std::int64_t guard = 0;
  while (term > 1e-300 + 1e-18 * tail) {
    tail += term;
    term *= x * (m + nd) / (m + 1.0);
    m += 1.0;
    if (++guard > 50'000'000)
      throw precondition_error("schatten_norm: tail bound did not converge");
  }
  out.tail_bound = tail;
  return out;
}

LongTimeEnvelope long_time_envelope(const QuadraticModel& model, double rank_tol) {
  require_square(model.m, "long_time_envelope");
  if (!(rank_tol > 0.0))
    throw precondition_error("long_time_envelope: rank_tol must be positive");
  const ComplexVector eigs = eig_values(model.m);
  const Eigen::Index n = eigs.size();

  LongTimeEnvelope out;
  out.alpha = eigs.real().minCoeff();
  out.r = 1;
  out.degenerate_clustering = false;

  const double scale = spectral_norm(model.m);
  const double ctol = 1e-8 * scale;

  std::vector<Eigen::Index> attaining;
  for (Eigen::Index i = 0; i < n; ++i)
    if (eigs[i].real() <= out.alpha + ctol) attaining.push_back(i);

  ComplexVector vals(static_cast<Eigen::Index>(attaining.size()));
  for (std::size_t i = 0; i < attaining.size(); ++i)
    vals[static_cast<Eigen::Index>(i)] = eigs[attaining[i]];

  for (const auto& cluster : cluster_values(vals, ctol)) {
    const std::int64_t mult = static_cast<std::int64_t>(cluster.size());
    if (mult == 1) continue;
    Complex center(0.0, 0.0);
    for (Eigen::Index i : cluster) center += vals[i];
    center /= static_cast<double>(mult);

    const ComplexMatrix shifted =
        model.m - center * ComplexMatrix::Identity(n, n);
    // Largest Jordan block size = first k with rank((M - lambda)^k)
    // stagnating; k never exceeds the algebraic multiplicity.
    std::int64_t r_cluster = mult;
    bool found = false;
    ComplexMatrix power = shifted;
    Eigen::Index prev_rank = numeric_rank(power, rank_tol);
    for (std::int64_t k = 1; k <= mult; ++k) {
      power = power * shifted;
      const Eigen::Index next_rank = numeric_rank(power, rank_tol);
      if (next_rank > prev_rank) {
        out.degenerate_clustering = true;
        break;
      }
      if (next_rank == prev_rank) {
        r_cluster = k;
        found = true;
        break;
      }
      prev_rank = next_rank;
    }
    if (!found) {
      r_cluster = mult;
      out.degenerate_clustering = true;
    }
    out.r = std::max(out.r, r_cluster);
  }
  return out;
}

std::vector<double> default_probe_samples() {
  std::vector<double> ts(12);
  for (std::size_t i = 0; i < ts.size(); ++i)
    ts[i] = 3e-4 * std::pow(10.0, static_cast<double>(i) /
                                      static_cast<double>(ts.size() - 1));
  return ts;
}

ProbeResult norm_derivative_probe(const QuadraticModel& model,
                                  const std::optional<ComplexVector>& direction,
                                  const std::vector<double>& t_samples) {
  require_square(model.m, "norm_derivative_probe");
  if (t_samples.size() < 4)
    throw precondition_error("norm_derivative_probe: need at least 4 samples");
  double tmin = t_samples[0], tmax = t_samples[0];
  for (double t : t_samples) {
    if (!(t > 0.0) || !(t <= 0.1))
      throw precondition_error("norm_derivative_probe: samples must lie in (0, 0.1]");
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  if (tmax < 10.0 * tmin)
    throw precondition_error("norm_derivative_probe: samples must span a decade");

  ComplexVector z;
  if (direction) {
    z = *direction;
    require_finite(z, "norm_derivative_probe");
    if (z.size() != model.m.rows())
      throw dimension_error("norm_derivative_probe: direction length mismatch");
    const double nrm = z.stableNorm();
    if (nrm == 0.0)
      throw precondition_error("norm_derivative_probe: zero direction");
    z /= nrm;
  }

  std::vector<std::pair<double, double>> samples;
  samples.reserve(t_samples.size());
  for (double t : t_samples) {
    const ComplexMatrix e = expm(model.m, Complex(-t, 0.0));
    const double f = direction ? (e * z).stableNorm() : spectral_norm(e);
    samples.emplace_back(t, f);
  }

  int sign_sum = 0;
  for (const auto& [t, f] : samples) {
    const double g = f - 1.0;
    if (g > 0.0) ++sign_sum;
    if (g < 0.0) --sign_sum;
  }
  if (std::abs(sign_sum) != static_cast<int>(samples.size()))
    throw inconclusive_fit(
        "norm_derivative_probe: f(t) - 1 changes sign or vanishes over the samples",
        samples);
  const double sign = sign_sum > 0 ? 1.0 : -1.0;

  // Log-log least squares for the exponent, then an equal-weight intercept
  // refit with the exponent pinned to the nearest integer.
  const std::size_t count = samples.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [t, f] : samples) {
    mean_x += std::log(t);
    mean_y += std::log(std::abs(f - 1.0));
  }
  mean_x /= static_cast<double>(count);
  mean_y /= static_cast<double>(count);
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [t, f] : samples) {
    const double dx = std::log(t) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(std::abs(f - 1.0)) - mean_y);
  }
  const double slope = sxy / sxx;
  const std::int64_t order = std::llround(slope);
  if (order < 1 || std::abs(slope - static_cast<double>(order)) > 0.25)
    throw inconclusive_fit(
        "norm_derivative_probe: fitted exponent " + std::to_string(slope) +
            " is not close to a positive integer",
        samples);

  double log_c = 0.0;
  for (const auto& [t, f] : samples)
    log_c += std::log(std::abs(f - 1.0)) - static_cast<double>(order) * std::log(t);
  log_c /= static_cast<double>(count);
  const double coeff = sign * std::exp(log_c);

  for (const auto& [t, f] : samples) {
    const double g = f - 1.0;
    const double resid = std::abs(g - coeff * std::pow(t, static_cast<double>(order)));
    if (resid > 0.10 * std::abs(g))
      throw inconclusive_fit(
          "norm_derivative_probe: power-law fit residual exceeds 10%", samples);
  }
  return {order, coeff};
}

}  // namespace qsemi
