#include "qsemi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

namespace qsemi {

namespace {

constexpr double kPade13Theta = 5.371920351148152;

// Coefficients b_0..b_13 of the [13/13] diagonal Pade approximant to exp.
constexpr double kPade13[14] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

double one_norm(const ComplexMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Working state for one-sided Jacobi. The true j-th column of the iterate is
// w.col(j) * 2^exponents[j]; keeping the stored norm near 1 lets the Gram
// quantities of columns with wildly different magnitudes stay representable.
struct JacobiState {
  ComplexMatrix w;
  std::vector<int> exponents;
};

void renormalize_column(JacobiState& st, Eigen::Index j) {
  const double nrm = st.w.col(j).stableNorm();
  if (nrm == 0.0) return;
  const int k = std::ilogb(nrm);
  if (k != 0) {
    st.w.col(j) *= std::ldexp(1.0, -k);
    st.exponents[j] += k;
  }
}

// Orthogonalizes the columns of st in place. If v_acc is non-null it must be
// the identity on entry; the accumulated rotations J with A * J = W_final are
// applied to it, so A = U Sigma v_acc^adjoint afterwards.
void jacobi_orthogonalize(JacobiState& st, ComplexMatrix* v_acc) {
  const Eigen::Index cols = st.w.cols();
  constexpr double kRelTol = 1e-15;
  constexpr int kMaxSweeps = 60;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < cols; ++p) {
      for (Eigen::Index q = p + 1; q < cols; ++q) {
        const double app = st.w.col(p).squaredNorm();
        const double aqq = st.w.col(q).squaredNorm();
        if (app == 0.0 || aqq == 0.0) continue;
        const Complex apq = st.w.col(p).dot(st.w.col(q));
        const double mag = std::abs(apq);
        if (mag <= kRelTol * std::sqrt(app * aqq)) continue;
        rotated = true;

        // True Gram entries differ from the stored ones by powers of two:
        // App = app*4^ep, Aqq = aqq*4^eq, |Apq| = mag*2^(ep+eq).
        const int d = st.exponents[q] - st.exponents[p];
        double c, s_plain, s_up, s_down;  // s_up = s*2^d, s_down = s*2^-d
        if (d > 500) {
          c = 1.0;
          s_up = mag / aqq;
          s_down = 0.0;
          s_plain = std::ldexp(s_up, -d);
        } else if (d < -500) {
          c = 1.0;
          s_down = -mag / app;
          s_up = 0.0;
          s_plain = std::ldexp(s_down, d);
        } else {
          const double tau =
              (std::ldexp(aqq, d) - std::ldexp(app, -d)) / (2.0 * mag);
          double t;
          if (std::abs(tau) > 1e8) {
            t = 1.0 / (2.0 * tau);
          } else {
            t = (tau >= 0.0 ? 1.0 : -1.0) /
                (std::abs(tau) + std::sqrt(1.0 + tau * tau));
          }
          c = 1.0 / std::sqrt(1.0 + t * t);
          s_plain = t * c;
          s_up = std::ldexp(s_plain, d);
          s_down = std::ldexp(s_plain, -d);
        }

        const Complex ph_conj = std::conj(apq / mag);
        const ComplexVector wp = st.w.col(p);
        const ComplexVector wq = st.w.col(q);
        st.w.col(p) = c * wp - (s_up * ph_conj) * wq;
        st.w.col(q) = s_down * wp + (c * ph_conj) * wq;
        renormalize_column(st, p);
        renormalize_column(st, q);

        if (v_acc != nullptr) {
          const ComplexVector vp = v_acc->col(p);
          const ComplexVector vq = v_acc->col(q);
          v_acc->col(p) = c * vp - (s_plain * ph_conj) * vq;
          v_acc->col(q) = s_plain * vp + (c * ph_conj) * vq;
        }
      }
    }
    if (!rotated) return;
  }
  throw convergence_error("svd: one-sided Jacobi did not converge within 60 sweeps");
}

struct ScaledValue {
  double mantissa;  // stableNorm of the stored column, in [0, 2)
  int exponent;
  Eigen::Index column;

  double value() const { return std::ldexp(mantissa, exponent); }
};

bool scaled_less(const ScaledValue& a, const ScaledValue& b) {
  if (a.mantissa == 0.0 || b.mantissa == 0.0) return a.mantissa < b.mantissa;
  if (a.exponent != b.exponent) {
    // Mantissas live in [1, 2), so two exponents apart is already decisive.
    if (std::abs(a.exponent - b.exponent) >= 2) return a.exponent < b.exponent;
    return std::ldexp(a.mantissa, a.exponent - b.exponent) < b.mantissa;
  }
  return a.mantissa < b.mantissa;
}

std::vector<ScaledValue> column_values(JacobiState& st) {
  std::vector<ScaledValue> vals;
  vals.reserve(static_cast<std::size_t>(st.w.cols()));
  for (Eigen::Index j = 0; j < st.w.cols(); ++j) {
    renormalize_column(st, j);
    vals.push_back({st.w.col(j).stableNorm(), st.exponents[j], j});
  }
  std::sort(vals.begin(), vals.end(), scaled_less);
  return vals;
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& a, Complex scale) {
  require_square(a, "expm");
  require_finite(a, "expm");
  if (!std::isfinite(scale.real()) || !std::isfinite(scale.imag()))
    throw domain_error("expm: non-finite scale");

  const Eigen::Index n = a.rows();
  ComplexMatrix b = scale * a;
  require_finite(b, "expm");

  int squarings = 0;
  const double norm = one_norm(b);
  if (norm == 0.0) return ComplexMatrix::Identity(n, n);
  if (norm > kPade13Theta) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kPade13Theta)));
    b *= std::ldexp(1.0, -squarings);
  }

  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix b2 = b * b;
  const ComplexMatrix b4 = b2 * b2;
  const ComplexMatrix b6 = b4 * b2;
  const ComplexMatrix u =
      b * (b6 * (kPade13[13] * b6 + kPade13[11] * b4 + kPade13[9] * b2) +
           kPade13[7] * b6 + kPade13[5] * b4 + kPade13[3] * b2 +
           kPade13[1] * id);
  const ComplexMatrix v =
      b6 * (kPade13[12] * b6 + kPade13[10] * b4 + kPade13[8] * b2) +
      kPade13[6] * b6 + kPade13[4] * b4 + kPade13[2] * b2 + kPade13[0] * id;

  ComplexMatrix f = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) f = f * f;
  return f;
}

RealVector svd_values(const ComplexMatrix& a) {
  if (a.rows() < 1 || a.cols() < 1)
    throw dimension_error("svd_values: empty matrix");
  require_finite(a, "svd_values");

  JacobiState st;
  st.w = (a.rows() >= a.cols()) ? a : ComplexMatrix(a.adjoint());
  st.exponents.assign(static_cast<std::size_t>(st.w.cols()), 0);
  for (Eigen::Index j = 0; j < st.w.cols(); ++j) renormalize_column(st, j);
  jacobi_orthogonalize(st, nullptr);

  const auto vals = column_values(st);
  RealVector sigma(st.w.cols());
  for (Eigen::Index j = 0; j < st.w.cols(); ++j)
    sigma[j] = vals[static_cast<std::size_t>(j)].value();
  return sigma;
}

SvdFactors svd_full(const ComplexMatrix& a) {
  require_square(a, "svd_full");
  require_finite(a, "svd_full");
  const Eigen::Index n = a.rows();

  JacobiState st;
  st.w = a;
  st.exponents.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index j = 0; j < n; ++j) renormalize_column(st, j);
  ComplexMatrix v_acc = ComplexMatrix::Identity(n, n);
  jacobi_orthogonalize(st, &v_acc);

  const auto vals = column_values(st);
  SvdFactors out;
  out.sigma.resize(n);
  out.u.resize(n, n);
  out.v.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& sv = vals[static_cast<std::size_t>(j)];
    out.sigma[j] = sv.value();
    out.v.col(j) = v_acc.col(sv.column);
    if (sv.mantissa > 0.0) {
      out.u.col(j) = st.w.col(sv.column) / sv.mantissa;
    } else {
      out.u.col(j).setZero();
    }
  }
  // Columns for vanished singular values: complete to an orthonormal basis.
  for (Eigen::Index j = 0; j < n; ++j) {
    if (out.u.col(j).stableNorm() > 0.5) continue;
    for (Eigen::Index e = 0; e < n; ++e) {
      ComplexVector cand = ComplexVector::Unit(n, e);
      for (Eigen::Index k = 0; k < n; ++k)
        if (k != j) cand -= out.u.col(k).dot(cand) * out.u.col(k);
      const double nrm = cand.stableNorm();
      if (nrm > 0.1) {
        out.u.col(j) = cand / nrm;
        break;
      }
    }
  }
  return out;
}

ComplexVector eig_values(const ComplexMatrix& a) {
  require_square(a, "eig_values");
  require_finite(a, "eig_values");
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw convergence_error("eig_values: QR iteration did not converge");
  return solver.eigenvalues();
}

double hermitian_min_eig(const ComplexMatrix& a) {
  require_square(a, "hermitian_min_eig");
  require_finite(a, "hermitian_min_eig");
  const ComplexMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw convergence_error("hermitian_min_eig: eigensolver did not converge");
  return solver.eigenvalues()(0);
}

double spectral_norm(const ComplexMatrix& a) {
  const RealVector sigma = svd_values(a);
  return sigma[sigma.size() - 1];
}

Eigen::Index numeric_rank(const ComplexMatrix& a, double tol) {
  if (!(tol > 0.0)) throw precondition_error("numeric_rank: tol must be positive");
  const RealVector sigma = svd_values(a);
  const double top = sigma[sigma.size() - 1];
  if (top <= 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index j = 0; j < sigma.size(); ++j)
    if (sigma[j] > tol * top) ++rank;
  return rank;
}

ComplexVector mat_power_apply(const ComplexMatrix& a, const ComplexVector& v,
                              std::int64_t k) {
  require_square(a, "mat_power_apply");
  if (a.cols() != v.size())
    throw dimension_error("mat_power_apply: vector length does not match matrix");
  if (k < 0) throw precondition_error("mat_power_apply: k must be non-negative");
  ComplexVector r = v;
  for (std::int64_t i = 0; i < k; ++i) r = a * r;
  return r;
}

}  // namespace qsemi
