#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qsemi {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Error taxonomy shared by all modules; the CLI maps these onto exit codes.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct dimension_error : error {
  using error::error;
};
struct domain_error : error {
  using error::error;
};
struct precondition_error : error {
  using error::error;
};
struct convergence_error : error {
  using error::error;
};
struct range_error : error {
  using error::error;
};
struct parse_error : error {
  using error::error;
};

inline void require_finite(const ComplexMatrix& a, const char* who) {
  if (!a.allFinite()) throw domain_error(std::string(who) + ": non-finite matrix entries");
}

inline void require_finite(const ComplexVector& v, const char* who) {
  if (!v.allFinite()) throw domain_error(std::string(who) + ": non-finite vector entries");
}

inline void require_square(const ComplexMatrix& a, const char* who) {
  if (a.rows() < 1 || a.rows() != a.cols())
    throw dimension_error(std::string(who) + ": expected a square matrix, got " +
                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

}  // namespace qsemi
