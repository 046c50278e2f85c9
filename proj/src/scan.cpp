#include "qsemi/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <thread>

namespace qsemi {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

char class_letter(Boundedness kind) {
  switch (kind) {
    case Boundedness::Unbounded: return 'U';
    case Boundedness::BoundedMarginal: return 'B';
    case Boundedness::Compact: return 'C';
  }
  return '?';
}

ScanCell evaluate_cell(const QuadraticModel& model, Complex t, double tol) {
  const SingularSpectrum spec = singular_spectrum(model, t);
  ScanCell cell;
  cell.log_norm = std::log(spec.sigma_max());
  cell.cls = classify(spec, tol);
  return cell;
}

using Interval = std::pair<double, double>;

// Intersection of a disjoint sorted union with another union of intervals.
std::vector<Interval> intersect_unions(const std::vector<Interval>& a,
                                       const std::vector<Interval>& b) {
  std::vector<Interval> out;
  for (const auto& [alo, ahi] : a) {
    for (const auto& [blo, bhi] : b) {
      const double lo = std::max(alo, blo);
      const double hi = std::min(ahi, bhi);
      if (lo <= hi) out.emplace_back(lo, hi);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Interval> merge_touching(std::vector<Interval> xs, double eps) {
  std::sort(xs.begin(), xs.end());
  std::vector<Interval> out;
  for (const auto& iv : xs) {
    if (!out.empty() && iv.first <= out.back().second + eps)
      out.back().second = std::max(out.back().second, iv.second);
    else
      out.push_back(iv);
  }
  return out;
}

}  // namespace

GridAxis GridAxis::make(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !std::isfinite(step))
    throw domain_error("grid axis: non-finite parameters");
  if (stop < start) throw precondition_error("grid axis: stop must be >= start");
  GridAxis axis;
  axis.start = start;
  axis.stop = stop;
  if (stop == start) {
    axis.step = step > 0.0 ? step : 1.0;
    axis.count = 1;
    return axis;
  }
  if (!(step > 0.0)) throw precondition_error("grid axis: step must be positive");
  axis.step = step;
  const double ratio = (stop - start) / step;
  axis.count = static_cast<Eigen::Index>(
                   std::floor(ratio + std::max(1e-9, 1e-12 * ratio))) +
               1;
  return axis;
}

GridAxis GridAxis::single(double value) { return make(value, value, 1.0); }

double GridAxis::value(Eigen::Index i) const {
  // Mirror-symmetric generation keeps conjugate grid points exact negatives
  // of each other.
  if (start == -stop && start < 0.0) {
    const Eigen::Index j = count - 1 - i;
    if (i == j) return 0.5 * (start + stop);
    if (i < j) return start + static_cast<double>(i) * step;
    return -(start + static_cast<double>(j) * step);
  }
  return start + static_cast<double>(i) * step;
}

RegionScan scan_grid(const QuadraticModel& model, const GridAxis& re_axis,
                     const GridAxis& im_axis, double tol, unsigned threads) {
  require_square(model.m, "scan_grid");
  if (re_axis.count < 1 || im_axis.count < 1)
    throw precondition_error("scan_grid: degenerate axes");

  RegionScan scan;
  scan.re_axis = re_axis;
  scan.im_axis = im_axis;
  scan.tol = tol;
  scan.cells.resize(static_cast<std::size_t>(re_axis.count * im_axis.count));

  const Eigen::Index rows = im_axis.count;
  unsigned n_workers = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(rows));

  std::atomic<Eigen::Index> next_row{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const Eigen::Index row = next_row.fetch_add(1);
      if (row >= rows) return;
      const double im = im_axis.value(row);
      try {
        for (Eigen::Index col = 0; col < re_axis.count; ++col) {
          scan.cells[static_cast<std::size_t>(row * re_axis.count + col)] =
              evaluate_cell(model, Complex(re_axis.value(col), im), tol);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next_row.store(rows);
        return;
      }
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return scan;
}

void write_scan_csv(const RegionScan& scan, std::ostream& out) {
  if (scan.cells.empty()) throw precondition_error("write_scan_csv: empty scan");
  out << "re_t,im_t,log_norm,class\n";
  char line[128];
  for (Eigen::Index row = 0; row < scan.im_axis.count; ++row) {
    const double im = scan.im_axis.value(row);
    for (Eigen::Index col = 0; col < scan.re_axis.count; ++col) {
      const ScanCell& cell = scan.at(row, col);
      std::snprintf(line, sizeof(line), "%.11e,%.11e,%.11e,%c\n",
                    scan.re_axis.value(col), im, cell.log_norm,
                    class_letter(cell.cls.kind));
      out << line;
    }
  }
}

std::vector<std::uint8_t> render_heatmap(const RegionScan& scan, double floor) {
  if (scan.cells.empty()) throw precondition_error("render_heatmap: empty scan");
  if (!(floor < 0.0)) throw precondition_error("render_heatmap: floor must be negative");

  std::vector<std::uint8_t> bytes;
  char header[64];
  std::snprintf(header, sizeof(header), "P5\n%lld %lld\n255\n",
                static_cast<long long>(scan.re_axis.count),
                static_cast<long long>(scan.im_axis.count));
  bytes.insert(bytes.end(), header, header + std::strlen(header));
  bytes.reserve(bytes.size() + scan.cells.size());
  for (const ScanCell& cell : scan.cells) {
    if (cell.cls.kind == Boundedness::Unbounded) {
      bytes.push_back(255);
    } else {
      const double ratio = std::clamp(cell.log_norm / floor, 0.0, 1.0);
      bytes.push_back(static_cast<std::uint8_t>(
          std::llround(254.0 * (1.0 - ratio))));
    }
  }
  return bytes;
}

NormalSector normal_sector(const QuadraticModel& model) {
  require_square(model.m, "normal_sector");
  const ComplexVector eigs = eig_values(model.m);
  const double scale = spectral_norm(model.m);
  const double zero_tol = 1e-12 * scale;

  // Work on the double cover [-pi, 3pi] so arcs through the branch cut stay
  // contiguous, then fold back.
  std::vector<Interval> feasible{{-kPi, 3.0 * kPi}};
  bool constrained = false;
  for (Eigen::Index j = 0; j < eigs.size(); ++j) {
    if (std::abs(eigs[j]) <= zero_tol) continue;
    constrained = true;
    const double phi = std::arg(eigs[j]);
    double lo = -0.5 * kPi - phi;
    if (lo < -kPi) lo += 2.0 * kPi;  // into [-pi, pi)
    const std::vector<Interval> arc{{lo, lo + kPi},
                                    {lo + 2.0 * kPi, lo + 3.0 * kPi}};
    feasible = intersect_unions(feasible, arc);
  }

  NormalSector sector;
  if (!constrained) {
    sector.full_circle = true;
    sector.intervals.emplace_back(-kPi, kPi);
    return sector;
  }

  std::vector<Interval> folded;
  for (const auto& [lo, hi] : feasible) {
    for (const double shift : {0.0, -2.0 * kPi}) {
      const double a = std::max(lo + shift, -kPi);
      const double b = std::min(hi + shift, kPi);
      if (a <= b) folded.emplace_back(a, b);
    }
  }
  folded = merge_touching(folded, 1e-12);

  // The point -pi is the same angle as pi in the (-pi, pi] convention.
  for (auto& iv : folded) {
    if (iv.first == -kPi && iv.second == -kPi) iv = {kPi, kPi};
  }
  folded = merge_touching(folded, 1e-12);

  double measure = 0.0;
  for (const auto& [lo, hi] : folded) measure += hi - lo;
  sector.full_circle = measure >= 2.0 * kPi - 1e-12;
  sector.intervals = std::move(folded);
  return sector;
}

}  // namespace qsemi
