#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdf/linalg.hpp"
#include "cdf/state.hpp"

namespace cdf {

/// Closed interval used for sampling boxes.
struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// A balance-law model ∂t U + Σ_j ∂j F_j(U) = Q(U) with Q = (0, M(U)·η_v(U)).
///
/// Implementations supply the fluxes, the entropy density η and the
/// dissipation matrix M. The source is assembled from them by cdf::source, so
/// the conserved block of Q is zero by construction. Optional hooks give
/// closed-form derivatives, a wave-speed bound and the linear relaxation rate
/// used by the exact source integrator.
///
/// Models are immutable after construction and safe to share across threads.
class CdfModel {
 public:
  virtual ~CdfModel() = default;

  virtual std::string name() const = 0;
  virtual int n_conserved() const = 0;
  virtual int n_dissipative() const = 0;
  virtual int space_dim() const = 0;
  int size() const { return n_conserved() + n_dissipative(); }

  /// F_j(U), length n + m.
  virtual Vector flux(const StateVector& state, int direction) const = 0;
  /// Entropy density η(U) (strictly concave for a well-posed model).
  virtual double entropy(const StateVector& state) const = 0;
  /// M(U), m × m.
  virtual Matrix dissipation_matrix(const StateVector& state) const = 0;
  /// Empty when the state is admissible, otherwise a description of the violated predicate.
  virtual std::optional<std::string> admissibility_violation(const StateVector& state) const = 0;

  /// Throws DomainError naming the violated predicate.
  void require_admissible(const StateVector& state) const {
    if (state.size() != size()) {
      throw DomainError(name() + ": state has " + std::to_string(state.size()) + " components, expected " +
                        std::to_string(size()));
    }
    if (!state.all_finite()) throw DomainError(name() + ": non-finite state " + state.to_string());
    if (auto why = admissibility_violation(state)) {
      throw DomainError(name() + ": inadmissible state " + state.to_string() + ": " + *why);
    }
  }

  bool admissible(const StateVector& state) const {
    return state.size() == size() && state.all_finite() && !admissibility_violation(state);
  }

  virtual std::optional<Vector> entropy_gradient_analytic(const StateVector&) const { return std::nullopt; }
  virtual std::optional<Matrix> entropy_hessian_analytic(const StateVector&) const { return std::nullopt; }

  /// Models that replace the assembled source return their q here (length m).
  virtual std::optional<Vector> dissipative_source_override(const StateVector&) const { return std::nullopt; }

  /// Closed-form bound on the spectral radius of ∂F_j/∂U.
  virtual std::optional<double> max_wave_speed(const StateVector&, int /*direction*/) const { return std::nullopt; }

  /// When the dissipative source is exactly d v/dt = -A v with A depending only
  /// on the conserved block, returns A (m × m).
  virtual std::optional<Matrix> relaxation_rate(const StateVector&) const { return std::nullopt; }

  // Sampling coordinates. The default is the state itself.
  virtual std::vector<std::string> coordinate_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < size(); ++i) names.push_back("U" + std::to_string(i));
    return names;
  }
  virtual StateVector from_coordinates(const Vector& coords) const {
    return StateVector(n_conserved(), n_dissipative(), coords);
  }
  virtual Vector to_coordinates(const StateVector& state) const { return state.data(); }
  virtual std::vector<Interval> default_sampling_box() const = 0;

  /// Names of the per-cell derived quantities written to snapshots.
  virtual std::vector<std::string> derived_names() const { return {}; }
  virtual Vector derived(const StateVector&) const { return Vector(0); }

  /// Names of the state components, in storage order.
  virtual std::vector<std::string> component_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < size(); ++i) names.push_back("U" + std::to_string(i));
    return names;
  }
};

using ModelPtr = std::shared_ptr<const CdfModel>;

}  // namespace cdf
