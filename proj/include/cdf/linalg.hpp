#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "cdf/errors.hpp"

namespace cdf {

/// Upper bound on n + m for any model. Keeps state vectors on the stack.
inline constexpr int kMaxComponents = 8;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxComponents, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents, kMaxComponents>;

/// Largest absolute entry.
inline double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/// Eigenvalues of the symmetric part (A + Aᵀ)/2, ascending.
inline Vector symmetric_eigenvalues(const Matrix& a) {
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct SpectrumSummary {
  double spectral_radius = 0.0;
  double max_imaginary = 0.0;
};

/// Spectral radius and largest |Im λ| of a general real matrix.
inline SpectrumSummary spectrum_summary(const Matrix& a) {
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("eigenvalue iteration failed", std::numeric_limits<double>::quiet_NaN());
  }
  SpectrumSummary out;
  for (int i = 0; i < a.rows(); ++i) {
    const std::complex<double> lam = solver.eigenvalues()(i);
    out.spectral_radius = std::max(out.spectral_radius, std::abs(lam));
    out.max_imaginary = std::max(out.max_imaginary, std::abs(lam.imag()));
  }
  return out;
}

/// Solves A x = b with full-pivot LU; throws when A is numerically singular.
inline Vector solve_checked(const Matrix& a, const Vector& b) {
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw ParameterError("matrix is singular");
  return lu.solve(b);
}

}  // namespace cdf
