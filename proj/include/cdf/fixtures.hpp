#pragma once

// Deliberately broken heat models. Each violates exactly one structural
// property and is used to show that the audit rejects it.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdf/heat.hpp"

namespace cdf::fixtures {

/// s = c_v ln u + |w|²/(2α0): convex in w, fluxes and M unchanged.
class FlippedEntropyHeat : public HeatModel {
 public:
  using HeatModel::HeatModel;
  std::string name() const override { return "fixture:flipped-entropy"; }

  double entropy(const StateVector& s) const override {
    require_admissible(s);
    return params().c_v * std::log(s[0]) + s.dissipative().squaredNorm() / (2.0 * params().alpha0);
  }
  std::optional<Vector> entropy_gradient_analytic(const StateVector& s) const override {
    Vector g(size());
    g(0) = params().c_v / s[0];
    g.tail(params().space_dim) = s.dissipative() / params().alpha0;
    return g;
  }
  std::optional<Matrix> entropy_hessian_analytic(const StateVector& s) const override {
    Matrix h = Matrix::Zero(size(), size());
    h(0, 0) = -params().c_v / (s[0] * s[0]);
    for (int i = 1; i < size(); ++i) h(i, i) = 1.0 / params().alpha0;
    return h;
  }
  std::optional<Matrix> relaxation_rate(const StateVector&) const override { return std::nullopt; }
};

/// Energy flux q + w instead of q.
class BrokenFluxHeat : public HeatModel {
 public:
  using HeatModel::HeatModel;
  std::string name() const override { return "fixture:broken-flux"; }

  Vector flux(const StateVector& s, int direction) const override {
    Vector f = HeatModel::flux(s, direction);
    f(0) += s[1 + direction];
    return f;
  }
  std::optional<double> max_wave_speed(const StateVector&, int) const override { return std::nullopt; }
};

/// M = 0 (only semi-definite).
class ZeroDissipationHeat : public HeatModel {
 public:
  using HeatModel::HeatModel;
  std::string name() const override { return "fixture:zero-dissipation"; }

  Matrix dissipation_matrix(const StateVector& s) const override {
    require_admissible(s);
    return Matrix::Zero(params().space_dim, params().space_dim);
  }
  std::optional<Matrix> relaxation_rate(const StateVector&) const override {
    return Matrix(Matrix::Zero(params().space_dim, params().space_dim));
  }
};

/// Overrides the source with q = −w/τ_relax, ignoring the declared M.
class InconsistentSourceHeat : public HeatModel {
 public:
  InconsistentSourceHeat(const HeatParams& params, double relax_time) : HeatModel(params), relax_time_(relax_time) {}
  std::string name() const override { return "fixture:inconsistent-source"; }

  std::optional<Vector> dissipative_source_override(const StateVector& s) const override {
    return Vector(-s.dissipative() / relax_time_);
  }
  std::optional<Matrix> relaxation_rate(const StateVector&) const override {
    return Matrix(Matrix::Identity(params().space_dim, params().space_dim) / relax_time_);
  }

 private:
  double relax_time_;
};

inline std::vector<std::string> fixture_names() {
  return {"fixture:flipped-entropy", "fixture:broken-flux", "fixture:zero-dissipation",
          "fixture:inconsistent-source"};
}

/// Builds a fixture by name; returns nullptr for unknown names.
inline std::shared_ptr<const HeatModel> make_fixture(const std::string& name, const HeatParams& params) {
  if (name == "fixture:flipped-entropy") return std::make_shared<const FlippedEntropyHeat>(params);
  if (name == "fixture:broken-flux") return std::make_shared<const BrokenFluxHeat>(params);
  if (name == "fixture:zero-dissipation") return std::make_shared<const ZeroDissipationHeat>(params);
  if (name == "fixture:inconsistent-source") return std::make_shared<const InconsistentSourceHeat>(params, 0.5);
  return nullptr;
}

}  // namespace cdf::fixtures
