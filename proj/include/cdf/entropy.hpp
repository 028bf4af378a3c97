#pragma once

#include <cmath>
#include <string>

#include "cdf/errors.hpp"
#include "cdf/linalg.hpp"
#include "cdf/model.hpp"
#include "cdf/numdiff.hpp"
#include "cdf/state.hpp"

namespace cdf {

enum class GradientMode { analytic, central_difference };

/// Differentiation policy for η_U and η_UU. In analytic mode closed forms are
/// used when the model provides them, with finite differences as a fallback.
struct EntropyCalculus {
  GradientMode mode = GradientMode::analytic;
  double fd_step = numdiff::kCentral2Step;

  void validate() const {
    if (!(fd_step > 0.0) || !std::isfinite(fd_step)) throw ParameterError("fd_step must be > 0");
  }
};

namespace detail {

inline auto entropy_of(const CdfModel& model) {
  const int n = model.n_conserved();
  const int m = model.n_dissipative();
  return [&model, n, m](const Vector& x) { return model.entropy(StateVector(n, m, x)); };
}

inline auto flux_of(const CdfModel& model, int direction) {
  const int n = model.n_conserved();
  const int m = model.n_dissipative();
  return [&model, n, m, direction](const Vector& x) { return model.flux(StateVector(n, m, x), direction); };
}

}  // namespace detail

/// η_U = (η_u, η_v).
inline Vector entropy_gradient(const CdfModel& model, const StateVector& state, const EntropyCalculus& calc = {}) {
  calc.validate();
  model.require_admissible(state);
  if (calc.mode == GradientMode::analytic) {
    if (auto g = model.entropy_gradient_analytic(state)) return *g;
  }
  return numdiff::gradient(detail::entropy_of(model), state.data(), calc.fd_step);
}

/// η_UU, symmetrized so that the result is exactly symmetric.
inline Matrix entropy_hessian(const CdfModel& model, const StateVector& state, const EntropyCalculus& calc = {}) {
  calc.validate();
  model.require_admissible(state);
  Matrix hess;
  const bool analytic = calc.mode == GradientMode::analytic;
  if (auto h = analytic ? model.entropy_hessian_analytic(state) : std::nullopt) {
    hess = *h;
  } else if (analytic && model.entropy_gradient_analytic(state)) {
    const int n = model.n_conserved();
    const int m = model.n_dissipative();
    hess = numdiff::jacobian_central2(
        [&](const Vector& x) { return *model.entropy_gradient_analytic(StateVector(n, m, x)); }, state.data(),
        calc.fd_step);
  } else {
    hess = numdiff::hessian_from_values(detail::entropy_of(model), state.data());
  }
  return 0.5 * (hess + hess.transpose());
}

/// Numerical Jacobian ∂F_j/∂U (fourth-order central differences).
inline Matrix flux_jacobian(const CdfModel& model, const StateVector& state, int direction) {
  model.require_admissible(state);
  return numdiff::jacobian(detail::flux_of(model, direction), state.data());
}

/// Q(U) = (0, q): zeros on the conserved block, q = M(U)·η_v(U) on the dissipative block
/// unless the model overrides q.
inline Vector source(const CdfModel& model, const StateVector& state) {
  model.require_admissible(state);
  Vector out = Vector::Zero(state.size());
  if (auto q = model.dissipative_source_override(state)) {
    out.tail(state.n_dissipative()) = *q;
  } else {
    const Vector eta_v = entropy_gradient(model, state).tail(state.n_dissipative());
    out.tail(state.n_dissipative()) = model.dissipation_matrix(state) * eta_v;
  }
  return out;
}

/// σ = η_v · M(U) · η_v.
inline double entropy_production(const CdfModel& model, const StateVector& state) {
  const Vector eta_v = entropy_gradient(model, state).tail(state.n_dissipative());
  return eta_v.dot(model.dissipation_matrix(state) * eta_v);
}

/// Maximizes η over the dissipative block at fixed conserved block by damped
/// Newton on η_v = 0, starting from v = 0.
inline StateVector equilibrium_project(const CdfModel& model, const Vector& conserved, double tolerance = 1e-12,
                                       int max_iterations = 50) {
  const int n = model.n_conserved();
  const int m = model.n_dissipative();
  if (conserved.size() != n) throw DomainError("conserved block has wrong length");
  StateVector state(n, m);
  state.conserved() = conserved;
  model.require_admissible(state);

  auto residual_of = [&](const StateVector& s) { return Vector(entropy_gradient(model, s).tail(m)); };
  Vector residual = residual_of(state);
  double norm = residual.cwiseAbs().maxCoeff();
  for (int iter = 0; iter < max_iterations && norm > tolerance; ++iter) {
    const Matrix hvv = entropy_hessian(model, state).bottomRightCorner(m, m);
    const Vector step = -solve_checked(hvv, residual);
    double damping = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, damping *= 0.5) {
      StateVector trial = state;
      trial.dissipative() += damping * step;
      if (!model.admissible(trial)) continue;
      const Vector trial_residual = residual_of(trial);
      const double trial_norm = trial_residual.cwiseAbs().maxCoeff();
      if (trial_norm < norm || trial_norm <= tolerance) {
        state = trial;
        residual = trial_residual;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(norm <= tolerance)) throw ConvergenceError(model.name() + ": equilibrium projection did not converge", norm);
  return state;
}

}  // namespace cdf
