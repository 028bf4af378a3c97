#pragma once

#include <cmath>
#include <limits>

#include "cdf/linalg.hpp"

namespace cdf::numdiff {

/// eps^(1/3): balances truncation and roundoff for second-order central differences.
inline const double kCentral2Step = std::cbrt(std::numeric_limits<double>::epsilon());
/// eps^(1/5): same balance for the fourth-order five-point stencil.
inline const double kCentral4Step = std::pow(std::numeric_limits<double>::epsilon(), 0.2);
/// eps^(1/4): second differences of a scalar function.
inline const double kSecondDiffStep = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

inline double scaled_step(double relative_step, double x) { return relative_step * std::max(std::abs(x), 1.0); }

/// Central-difference gradient of a scalar function.
template <class F>
Vector gradient(F&& f, const Vector& x, double relative_step = kCentral2Step) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    const double h = scaled_step(relative_step, x(i));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (xp(i) - xm(i));
  }
  return g;
}

/// Second-order central-difference Jacobian of a vector function; column i is ∂f/∂x_i.
template <class F>
Matrix jacobian_central2(F&& f, const Vector& x, double relative_step = kCentral2Step) {
  Matrix jac;
  for (int i = 0; i < x.size(); ++i) {
    const double h = scaled_step(relative_step, x(i));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    const Vector col = (f(xp) - f(xm)) / (xp(i) - xm(i));
    if (i == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
  }
  return jac;
}

/// Fourth-order five-point Jacobian of a vector function.
template <class F>
Matrix jacobian(F&& f, const Vector& x, double relative_step = kCentral4Step) {
  Matrix jac;
  for (int i = 0; i < x.size(); ++i) {
    const double h = scaled_step(relative_step, x(i));
    auto shifted = [&](double k) {
      Vector y = x;
      y(i) += k * h;
      return Vector(f(y));
    };
    const Vector col = (8.0 * (shifted(1) - shifted(-1)) - (shifted(2) - shifted(-2))) / (12.0 * h);
    if (i == 0) jac.resize(col.size(), x.size());
    jac.col(i) = col;
  }
  return jac;
}

/// Hessian of a scalar function from second differences of function values.
template <class F>
Matrix hessian_from_values(F&& f, const Vector& x, double relative_step = kSecondDiffStep) {
  const int n = static_cast<int>(x.size());
  Matrix hess(n, n);
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    const double hi = scaled_step(relative_step, x(i));
    for (int j = i; j < n; ++j) {
      const double hj = scaled_step(relative_step, x(j));
      double value;
      if (i == j) {
        Vector xp = x, xm = x;
        xp(i) += hi;
        xm(i) -= hi;
        value = (f(xp) - 2.0 * f0 + f(xm)) / (hi * hi);
      } else {
        auto at = [&](double si, double sj) {
          Vector y = x;
          y(i) += si * hi;
          y(j) += sj * hj;
          return f(y);
        };
        value = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      }
      hess(i, j) = value;
      hess(j, i) = value;
    }
  }
  return hess;
}

}  // namespace cdf::numdiff
