#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "qsemi/semigroup.hpp"

namespace qsemi {

// Uniform inclusive grid start, start+step, ..., stop. When the endpoints are
// exact negatives the sample points are generated mirror-symmetrically, so
// value(i) == -value(count-1-i) bit for bit.
struct GridAxis {
  double start{};
  double stop{};
  double step{};
  Eigen::Index count{};

  double value(Eigen::Index i) const;

  static GridAxis make(double start, double stop, double step);
  static GridAxis single(double value);
};

struct ScanCell {
  double log_norm{};
  BoundednessClass cls;
};

// Row-major with the imaginary axis outermost: cell (i_im, i_re) sits at
// cells[i_im * re_axis.count + i_re].
struct RegionScan {
  GridAxis re_axis;
  GridAxis im_axis;
  double tol{};
  std::vector<ScanCell> cells;

  const ScanCell& at(Eigen::Index i_im, Eigen::Index i_re) const {
    return cells[static_cast<std::size_t>(i_im * re_axis.count + i_re)];
  }
};

// Evaluates log||e^{-tM}|| and the boundedness class on the grid. Cells are
// independent; with threads > 1 rows are distributed over a worker pool and
// the result is bit-identical for every schedule. threads == 0 picks the
// hardware concurrency.
RegionScan scan_grid(const QuadraticModel& model, const GridAxis& re_axis,
                     const GridAxis& im_axis, double tol = 1e-10,
                     unsigned threads = 0);

// CSV rows in storage order: header re_t,im_t,log_norm,class with scientific
// 12-significant-digit numbers and class letters U/B/C.
void write_scan_csv(const RegionScan& scan, std::ostream& out);

// Binary PGM (P5, maxval 255), width = re count, height = im count, row 0 at
// the lowest im value. Unbounded cells are 255; bounded cells fade from 254
// at log_norm = 0 down to 0 at log_norm <= floor (floor < 0).
std::vector<std::uint8_t> render_heatmap(const RegionScan& scan, double floor);

// Closed arg-t intervals (radians, within [-pi, pi]) on which a normal
// operator with the eigenvalues of M would generate a bounded semigroup:
// the intersection of Re(t lambda_j) >= 0 over the nonzero eigenvalues.
struct NormalSector {
  std::vector<std::pair<double, double>> intervals;
  bool full_circle{};
};

NormalSector normal_sector(const QuadraticModel& model);

}  // namespace qsemi
