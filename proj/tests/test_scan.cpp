#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qsemi/scan.hpp"

using namespace qsemi;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

QuadraticModel model_from(const ComplexMatrix& m) {
  return QuadraticModel{m.rows(), m};
}

RegionScan single_cell(double log_norm, Boundedness kind) {
  RegionScan scan;
  scan.re_axis = GridAxis::single(0.0);
  scan.im_axis = GridAxis::single(0.0);
  scan.tol = 1e-10;
  ScanCell cell;
  cell.log_norm = log_norm;
  cell.cls = BoundednessClass{kind, std::exp(log_norm), 1e-10};
  scan.cells.push_back(cell);
  return scan;
}

}  // namespace

TEST_CASE("grid axes") {
  SUBCASE("counts match the inclusive colon convention") {
    CHECK(GridAxis::make(0.0, 10.0, 0.02).count == 501);
    CHECK(GridAxis::make(-0.1, 0.1, 0.0002).count == 1001);
    CHECK(GridAxis::make(0.0, 2.0, 1.0).count == 3);
    CHECK(GridAxis::single(0.3).count == 1);
  }
  SUBCASE("symmetric axes produce bitwise-mirrored points") {
    const GridAxis axis = GridAxis::make(-0.1, 0.1, 0.0002);
    for (Eigen::Index i = 0; i < axis.count; ++i) {
      const double a = axis.value(i);
      const double b = axis.value(axis.count - 1 - i);
      CHECK(a == -b);
    }
    CHECK(axis.value((axis.count - 1) / 2) == 0.0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(GridAxis::make(1.0, 0.0, 0.1), precondition_error);
    CHECK_THROWS_AS(GridAxis::make(0.0, 1.0, 0.0), precondition_error);
    CHECK_THROWS_AS(GridAxis::make(0.0, 1.0, -0.5), precondition_error);
  }
}

TEST_CASE("scan_grid") {
  SUBCASE("harmonic oscillator along the real axis") {
    const RegionScan scan = scan_grid(build_harmonic_oscillator(1),
                                      GridAxis::make(0.0, 2.0, 1.0),
                                      GridAxis::single(0.0));
    REQUIRE(scan.cells.size() == 3);
    CHECK(scan.at(0, 0).log_norm == doctest::Approx(0.0));
    CHECK(scan.at(0, 1).log_norm == doctest::Approx(-1.0));
    CHECK(scan.at(0, 2).log_norm == doctest::Approx(-2.0));
    CHECK(scan.at(0, 0).cls.kind == Boundedness::BoundedMarginal);
    CHECK(scan.at(0, 1).cls.kind == Boundedness::Compact);
    CHECK(scan.at(0, 2).cls.kind == Boundedness::Compact);
  }
  SUBCASE("perturbed Fokker-Planck: unbounded early, compact late") {
    const QuadraticModel model = build_perturbed_fokker_planck(5.0, 0.9);
    const RegionScan early =
        scan_grid(model, GridAxis::single(0.1), GridAxis::single(0.0));
    CHECK(early.cells[0].cls.kind == Boundedness::Unbounded);
    const RegionScan late =
        scan_grid(model, GridAxis::single(10.0), GridAxis::single(0.0));
    CHECK(late.cells[0].cls.kind == Boundedness::Compact);
  }
  SUBCASE("conjugate rows are bit-identical for real models") {
    const QuadraticModel model = build_perturbed_fokker_planck(5.0, 0.9);
    const RegionScan scan =
        scan_grid(model, GridAxis::make(0.0, 0.5, 0.05),
                  GridAxis::make(-0.02, 0.02, 0.002));
    for (Eigen::Index row = 0; row < scan.im_axis.count; ++row) {
      const Eigen::Index mirror = scan.im_axis.count - 1 - row;
      for (Eigen::Index col = 0; col < scan.re_axis.count; ++col) {
        CHECK(scan.at(row, col).log_norm == scan.at(mirror, col).log_norm);
        CHECK(scan.at(row, col).cls.kind == scan.at(mirror, col).cls.kind);
      }
    }
  }
  SUBCASE("log norm decreases along the real axis for strictly elliptic models") {
    std::mt19937 rng(50);
    ComplexMatrix m = oracles::random_complex_matrix(rng, 2, 1.0);
    const double h = hermitian_min_eig(m);
    m += (std::abs(h) + 0.1) * ComplexMatrix::Identity(2, 2);
    const RegionScan scan = scan_grid(model_from(m), GridAxis::make(0.0, 4.0, 0.25),
                                      GridAxis::single(0.0));
    for (Eigen::Index col = 0; col + 1 < scan.re_axis.count; ++col)
      CHECK(scan.at(0, col + 1).log_norm <= scan.at(0, col).log_norm + 1e-12);
  }
  SUBCASE("thread count does not change a single bit") {
    const QuadraticModel model = build_perturbed_fokker_planck(5.0, 0.9);
    const GridAxis re = GridAxis::make(0.0, 1.0, 0.1);
    const GridAxis im = GridAxis::make(-0.05, 0.05, 0.01);
    const RegionScan one = scan_grid(model, re, im, 1e-10, 1);
    const RegionScan four = scan_grid(model, re, im, 1e-10, 4);
    REQUIRE(one.cells.size() == four.cells.size());
    for (std::size_t i = 0; i < one.cells.size(); ++i) {
      CHECK(std::memcmp(&one.cells[i].log_norm, &four.cells[i].log_norm,
                        sizeof(double)) == 0);
      CHECK(one.cells[i].cls.kind == four.cells[i].cls.kind);
    }
  }
}

TEST_CASE("write_scan_csv format") {
  const RegionScan scan = scan_grid(build_harmonic_oscillator(1),
                                    GridAxis::make(0.0, 1.0, 1.0),
                                    GridAxis::single(0.0));
  std::ostringstream out;
  write_scan_csv(scan, out);
  const std::string want =
      "re_t,im_t,log_norm,class\n"
      "0.00000000000e+00,0.00000000000e+00,0.00000000000e+00,B\n"
      "1.00000000000e+00,0.00000000000e+00,-1.00000000000e+00,C\n";
  CHECK(out.str() == want);
}

TEST_CASE("render_heatmap") {
  SUBCASE("single unbounded cell is white") {
    const auto bytes = render_heatmap(single_cell(0.3, Boundedness::Unbounded), -2.0);
    const std::string header(bytes.begin(), bytes.begin() + 9);
    CHECK(header == "P5\n1 1\n25");  // "P5\n1 1\n255\n" prefix
    CHECK(bytes.back() == 255);
  }
  SUBCASE("marginal cell at log_norm zero maps to 254") {
    const auto bytes = render_heatmap(single_cell(0.0, Boundedness::BoundedMarginal), -2.0);
    CHECK(bytes.back() == 254);
  }
  SUBCASE("cell at the floor maps to 0") {
    const auto bytes = render_heatmap(single_cell(-2.0, Boundedness::Compact), -2.0);
    CHECK(bytes.back() == 0);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(render_heatmap(single_cell(0.0, Boundedness::Compact), 0.5),
                    precondition_error);
    RegionScan empty;
    empty.re_axis = GridAxis::single(0.0);
    empty.im_axis = GridAxis::single(0.0);
    CHECK_THROWS_AS(render_heatmap(empty, -1.0), precondition_error);
  }
}

TEST_CASE("normal_sector") {
  SUBCASE("identity spans the right half circle") {
    const NormalSector sector = normal_sector(build_harmonic_oscillator(2));
    REQUIRE(sector.intervals.size() == 1);
    CHECK(sector.intervals[0].first == doctest::Approx(-kPi / 2).epsilon(1e-12));
    CHECK(sector.intervals[0].second == doctest::Approx(kPi / 2).epsilon(1e-12));
    double measure = 0.0;
    for (const auto& [lo, hi] : sector.intervals) measure += hi - lo;
    CHECK(measure == doctest::Approx(kPi));
  }
  SUBCASE("skew generator degenerates to the two points 0 and pi") {
    ComplexMatrix skew(2, 2);
    skew << Complex(0), Complex(-1), Complex(1), Complex(0);
    const NormalSector sector = normal_sector(model_from(skew));
    REQUIRE(sector.intervals.size() == 2);
    CHECK(std::abs(sector.intervals[0].first) < 1e-12);
    CHECK(std::abs(sector.intervals[0].second) < 1e-12);
    CHECK(sector.intervals[1].first == doctest::Approx(kPi));
    CHECK(sector.intervals[1].second == doctest::Approx(kPi));
  }
  SUBCASE("Fokker-Planck a=5 gives +-(pi/2 - atan(sqrt 99))") {
    const NormalSector sector = normal_sector(build_fokker_planck(5.0));
    const double half_width = kPi / 2 - std::atan(std::sqrt(99.0));
    REQUIRE(sector.intervals.size() == 1);
    CHECK(sector.intervals[0].first == doctest::Approx(-half_width).epsilon(1e-6));
    CHECK(sector.intervals[0].second == doctest::Approx(half_width).epsilon(1e-6));
  }
  SUBCASE("nilpotent model imposes no constraint") {
    ComplexMatrix nilp(2, 2);
    nilp << Complex(0), Complex(1), Complex(0), Complex(0);
    const NormalSector sector = normal_sector(model_from(nilp));
    CHECK(sector.full_circle);
  }
  SUBCASE("real models give sectors symmetric under conjugation") {
    std::mt19937 rng(51);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto contains = [](const NormalSector& sector, double theta) {
      for (const auto& [lo, hi] : sector.intervals) {
        if (theta >= lo - 1e-9 && theta <= hi + 1e-9) return true;
        // The angle pi is also represented by -pi.
        if (std::abs(theta - kPi) < 1e-9 && lo <= -kPi + 1e-9) return true;
        if (std::abs(theta + kPi) < 1e-9 && hi >= kPi - 1e-9) return true;
      }
      return false;
    };
    for (int trial = 0; trial < 10; ++trial) {
      ComplexMatrix m(3, 3);
      for (Eigen::Index i = 0; i < 3; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = Complex(gauss(rng), 0.0);
      const NormalSector sector = normal_sector(model_from(m));
      for (int k = 0; k <= 400; ++k) {
        const double theta = -kPi + 2.0 * kPi * k / 400.0;
        // Keep away from interval endpoints where the eps windows disagree.
        bool near_edge = false;
        for (const auto& [lo, hi] : sector.intervals)
          if (std::min(std::abs(theta - lo), std::abs(theta - hi)) < 1e-6 ||
              std::min(std::abs(theta + lo), std::abs(theta + hi)) < 1e-6)
            near_edge = true;
        if (near_edge) continue;
        CHECK(contains(sector, theta) == contains(sector, -theta));
      }
    }
  }
}
