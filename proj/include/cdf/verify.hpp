#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cdf/entropy.hpp"
#include "cdf/errors.hpp"
#include "cdf/linalg.hpp"
#include "cdf/model.hpp"
#include "cdf/numdiff.hpp"

namespace cdf {

/// Uniform sampling of a box given in the model's coordinates
/// (CdfModel::coordinate_names). Inadmissible draws are discarded.
struct SamplingPlan {
  std::uint64_t seed = 20130917;
  std::size_t count = 1000;
  std::vector<Interval> box;

  void validate(std::size_t dimension) const {
    if (box.size() != dimension) {
      throw ConfigurationError("sampling box has " + std::to_string(box.size()) + " intervals, model needs " +
                               std::to_string(dimension));
    }
    for (std::size_t i = 0; i < box.size(); ++i) {
      if (!(box[i].low < box[i].high)) {
        throw ConfigurationError("sampling box interval " + std::to_string(i) + " needs low < high");
      }
    }
    if (count == 0) throw ConfigurationError("sampling count must be positive");
  }
};

inline SamplingPlan default_plan(const CdfModel& model, std::size_t count = 1000, std::uint64_t seed = 20130917) {
  return {seed, count, model.default_sampling_box()};
}

/// Deterministic draws: a fixed engine and an explicit 53-bit mantissa map.
inline std::vector<StateVector> draw_samples(const CdfModel& model, const SamplingPlan& plan) {
  plan.validate(static_cast<std::size_t>(model.size()));
  std::mt19937_64 engine(plan.seed);
  auto unit = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };
  std::vector<StateVector> samples;
  samples.reserve(plan.count);
  for (std::size_t k = 0; k < plan.count; ++k) {
    Vector coords(model.size());
    for (int i = 0; i < model.size(); ++i) {
      const Interval& iv = plan.box[static_cast<std::size_t>(i)];
      coords(i) = iv.low + (iv.high - iv.low) * unit();
    }
    try {
      StateVector state = model.from_coordinates(coords);
      if (model.admissible(state)) samples.push_back(std::move(state));
    } catch (const DomainError&) {
    }
  }
  if (samples.empty()) throw ConfigurationError(model.name() + ": sampling box produced no admissible states");
  return samples;
}

struct ConditionResult {
  std::string name;
  bool passed = true;
  double worst_violation = 0.0;  ///< max(0, worst signed violation); 0 when passed
  double extreme = 0.0;          ///< the check's extreme statistic (e.g. largest Hessian eigenvalue)
  double tolerance = 0.0;
  std::optional<StateVector> witness;  ///< state attaining the extreme; always set
};

struct AuditTolerances {
  double concavity = 1e-10;
  double symmetry = 1e-6;
  double positive_definite = 1e-10;
  double entropy_flux = 1e-6;
  double source = 1e-12;
  double hyperbolicity = 1e-6;
};

struct AuditReport {
  std::string model;
  std::vector<ConditionResult> conditions;
  std::size_t samples_used = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  std::vector<std::string> coordinates;
  std::vector<Interval> box;

  bool passed() const {
    for (const auto& c : conditions)
      if (!c.passed) return false;
    return !conditions.empty();
  }

  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }
};

namespace detail {

/// Accumulates signed violations (≤ 0 means satisfied) and an extreme statistic.
class ConditionAccumulator {
 public:
  ConditionAccumulator(std::string name, double tol, bool track_max)
      : track_max_(track_max) {
    result_.name = std::move(name);
    result_.tolerance = tol;
    result_.extreme = track_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }

  void add(const StateVector& state, double statistic, double violation) {
    const bool better = track_max_ ? statistic > result_.extreme : statistic < result_.extreme;
    if (better || !result_.witness) {
      result_.extreme = statistic;
      if (!failing_) result_.witness = state;
    }
    if (violation > 0.0 && violation > worst_) {
      worst_ = violation;
      failing_ = true;
      result_.witness = state;
    }
  }

  ConditionResult finish() {
    result_.passed = !failing_;
    result_.worst_violation = failing_ ? worst_ : 0.0;
    return result_;
  }

 private:
  ConditionResult result_;
  bool track_max_;
  bool failing_ = false;
  double worst_ = 0.0;
};

inline double asymmetry_ratio(const Matrix& a) { return max_abs(a - a.transpose()) / (1.0 + max_abs(a)); }

inline void require_samples(std::span<const StateVector> samples) {
  if (samples.empty()) throw ConfigurationError("no admissible samples to audit");
}

}  // namespace detail

/// Strict concavity: largest eigenvalue of η_UU must be ≤ −tol.
inline ConditionResult check_concavity(const CdfModel& model, std::span<const StateVector> samples, double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("concavity", tol, true);
  for (const auto& s : samples) {
    const double top = symmetric_eigenvalues(entropy_hessian(model, s)).maxCoeff();
    acc.add(s, top, top + tol);
  }
  return acc.finish();
}

/// η_UU · ∂F_j/∂U symmetric for every direction, relative to 1 + |A|.
inline ConditionResult check_symmetrizability(const CdfModel& model, std::span<const StateVector> samples,
                                              double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("symmetrizability", tol, true);
  for (const auto& s : samples) {
    const Matrix hess = entropy_hessian(model, s);
    double worst = 0.0;
    for (int j = 0; j < model.space_dim(); ++j) {
      worst = std::max(worst, detail::asymmetry_ratio(hess * flux_jacobian(model, s, j)));
    }
    acc.add(s, worst, worst - tol);
  }
  return acc.finish();
}

/// Smallest eigenvalue of the symmetric part of M must be ≥ tol.
inline ConditionResult check_dissipation_matrix(const CdfModel& model, std::span<const StateVector> samples,
                                                double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("dissipation_matrix", tol, false);
  for (const auto& s : samples) {
    const Matrix m = model.dissipation_matrix(s);
    if (m.rows() != model.n_dissipative() || m.cols() != model.n_dissipative() || !m.allFinite()) {
      throw DomainError(model.name() + ": dissipation matrix has wrong shape or non-finite entries");
    }
    const double low = symmetric_eigenvalues(m).minCoeff();
    acc.add(s, low, tol - low);
  }
  return acc.finish();
}

/// Existence of an entropy flux J_j with η_U · F_jU = J_jU, tested through the
/// symmetry of the Jacobian of U ↦ (∂F_j/∂U)ᵀ η_U (mixed partials of J_j).
inline ConditionResult check_entropy_flux_exists(const CdfModel& model, std::span<const StateVector> samples,
                                                 double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("entropy_flux", tol, true);
  const int n = model.n_conserved();
  const int m = model.n_dissipative();
  for (const auto& s : samples) {
    double worst = 0.0;
    for (int j = 0; j < model.space_dim(); ++j) {
      auto entropy_flux_gradient = [&](const Vector& x) {
        const StateVector state(n, m, x);
        return Vector(flux_jacobian(model, state, j).transpose() * entropy_gradient(model, state));
      };
      worst = std::max(worst, detail::asymmetry_ratio(numdiff::jacobian(entropy_flux_gradient, s.data())));
    }
    acc.add(s, worst, worst - tol);
  }
  return acc.finish();
}

/// The model's source equals M · η_v on the dissipative block.
inline ConditionResult check_source_consistency(const CdfModel& model, std::span<const StateVector> samples,
                                                double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("source_consistency", tol, true);
  const int m = model.n_dissipative();
  for (const auto& s : samples) {
    const Vector expected = model.dissipation_matrix(s) * entropy_gradient(model, s).tail(m);
    const Vector actual = source(model, s).tail(m);
    const double gap = (actual - expected).cwiseAbs().maxCoeff() / std::max(1.0, expected.cwiseAbs().maxCoeff());
    acc.add(s, gap, gap - tol);
  }
  return acc.finish();
}

/// Real spectrum of every flux Jacobian: max |Im λ| ≤ tol (1 + spectral radius).
inline ConditionResult check_hyperbolicity(const CdfModel& model, std::span<const StateVector> samples, double tol) {
  detail::require_samples(samples);
  detail::ConditionAccumulator acc("hyperbolicity", tol, true);
  for (const auto& s : samples) {
    double worst = 0.0;
    for (int j = 0; j < model.space_dim(); ++j) {
      const SpectrumSummary spec = spectrum_summary(flux_jacobian(model, s, j));
      worst = std::max(worst, spec.max_imaginary / (1.0 + spec.spectral_radius));
    }
    acc.add(s, worst, worst - tol);
  }
  return acc.finish();
}

#define CDF_PLAN_OVERLOAD(check)                                                                    \
  inline ConditionResult check(const CdfModel& model, const SamplingPlan& plan, double tol) {        \
    const auto samples = draw_samples(model, plan);                                                 \
    return check(model, std::span<const StateVector>(samples), tol);                                \
  }
CDF_PLAN_OVERLOAD(check_concavity)
CDF_PLAN_OVERLOAD(check_symmetrizability)
CDF_PLAN_OVERLOAD(check_dissipation_matrix)
CDF_PLAN_OVERLOAD(check_entropy_flux_exists)
CDF_PLAN_OVERLOAD(check_source_consistency)
CDF_PLAN_OVERLOAD(check_hyperbolicity)
#undef CDF_PLAN_OVERLOAD

/// Runs every structural check on one deterministic sample set.
inline AuditReport run_full_audit(const CdfModel& model, const SamplingPlan& plan, const AuditTolerances& tol = {}) {
  const auto samples = draw_samples(model, plan);
  const std::span<const StateVector> view(samples);
  AuditReport report;
  report.model = model.name();
  report.samples_used = samples.size();
  report.seed = plan.seed;
  report.coordinates = model.coordinate_names();
  report.box = plan.box;
  report.tolerances = {{"concavity", tol.concavity},       {"symmetrizability", tol.symmetry},
                       {"dissipation_matrix", tol.positive_definite}, {"entropy_flux", tol.entropy_flux},
                       {"source_consistency", tol.source}, {"hyperbolicity", tol.hyperbolicity}};
  report.conditions.push_back(check_concavity(model, view, tol.concavity));
  report.conditions.push_back(check_symmetrizability(model, view, tol.symmetry));
  report.conditions.push_back(check_dissipation_matrix(model, view, tol.positive_definite));
  report.conditions.push_back(check_entropy_flux_exists(model, view, tol.entropy_flux));
  report.conditions.push_back(check_source_consistency(model, view, tol.source));
  report.conditions.push_back(check_hyperbolicity(model, view, tol.hyperbolicity));
  return report;
}

}  // namespace cdf
