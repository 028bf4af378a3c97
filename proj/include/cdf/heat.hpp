#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdf/errors.hpp"
#include "cdf/linalg.hpp"
#include "cdf/model.hpp"
#include "cdf/state.hpp"

namespace cdf {

struct HeatParams {
  double c_v = 1.0;
  double lambda = 1.0;
  double alpha0 = 1.0;
  int space_dim = 1;

  void validate() const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(name) + " must be > 0");
    };
    positive(c_v, "c_v");
    positive(lambda, "lambda");
    positive(alpha0, "alpha0");
    if (space_dim != 1 && space_dim != 2) throw ParameterError("space_dim must be 1 or 2");
  }
};

/// M(u, w) for heat models with a user-supplied dissipation matrix.
using HeatDissipation = std::function<Matrix(double u, const Vector& w)>;

/// Heat conduction in a rigid body with state (u, w): internal energy u and
/// the conjugate w of the heat flux.
///
///   s(u, w) = c_v ln u − |w|²/(2 α0),  θ⁻¹ = s_u = c_v/u,  q = s_w = −w/α0
///   ∂t u + ∇·q = 0
///   ∂t w + ∇θ⁻¹ = M q,  M = I/(λ θ²)  (or a user-supplied M(u, w))
class HeatModel : public CdfModel {
 public:
  explicit HeatModel(const HeatParams& params, HeatDissipation custom = {})
      : params_(params), custom_(std::move(custom)) {
    params_.validate();
  }

  const HeatParams& params() const { return params_; }
  bool has_custom_dissipation() const { return static_cast<bool>(custom_); }

  std::string name() const override { return custom_ ? "heat-custom-M" : "heat"; }
  int n_conserved() const override { return 1; }
  int n_dissipative() const override { return params_.space_dim; }
  int space_dim() const override { return params_.space_dim; }

  double theta(const StateVector& s) const { return s[0] / params_.c_v; }
  double inverse_theta(const StateVector& s) const { return params_.c_v / s[0]; }
  Vector heat_flux(const StateVector& s) const { return -s.dissipative() / params_.alpha0; }

  Vector flux(const StateVector& s, int direction) const override {
    require_admissible(s);
    check_direction(direction);
    Vector f = Vector::Zero(size());
    f(0) = -s[1 + direction] / params_.alpha0;
    f(1 + direction) = inverse_theta(s);
    return f;
  }

  double entropy(const StateVector& s) const override {
    require_admissible(s);
    return params_.c_v * std::log(s[0]) - s.dissipative().squaredNorm() / (2.0 * params_.alpha0);
  }

  std::optional<Vector> entropy_gradient_analytic(const StateVector& s) const override {
    Vector g(size());
    g(0) = inverse_theta(s);
    g.tail(params_.space_dim) = heat_flux(s);
    return g;
  }

  std::optional<Matrix> entropy_hessian_analytic(const StateVector& s) const override {
    Matrix h = Matrix::Zero(size(), size());
    h(0, 0) = -params_.c_v / (s[0] * s[0]);
    for (int i = 1; i < size(); ++i) h(i, i) = -1.0 / params_.alpha0;
    return h;
  }

  Matrix dissipation_matrix(const StateVector& s) const override {
    require_admissible(s);
    if (custom_) {
      Matrix m = custom_(s[0], s.dissipative());
      if (m.rows() != params_.space_dim || m.cols() != params_.space_dim || !m.allFinite()) {
        throw DomainError("custom dissipation matrix has wrong shape or non-finite entries");
      }
      return m;
    }
    const double th = theta(s);
    return Matrix::Identity(params_.space_dim, params_.space_dim) / (params_.lambda * th * th);
  }

  std::optional<std::string> admissibility_violation(const StateVector& s) const override {
    if (!(s[0] > 0.0)) return "internal energy u must be > 0";
    return std::nullopt;
  }

  std::optional<double> max_wave_speed(const StateVector& s, int) const override {
    return std::sqrt(params_.c_v / params_.alpha0) / s[0];
  }

  std::optional<Matrix> relaxation_rate(const StateVector& s) const override {
    if (custom_) return std::nullopt;
    const double th = theta(s);
    return Matrix(Matrix::Identity(params_.space_dim, params_.space_dim) /
                  (params_.alpha0 * params_.lambda * th * th));
  }

  std::vector<std::string> coordinate_names() const override { return component_names(); }

  std::vector<Interval> default_sampling_box() const override {
    std::vector<Interval> box{{0.5, 2.0}};
    for (int i = 0; i < params_.space_dim; ++i) box.push_back({-1.0, 1.0});
    return box;
  }

  std::vector<std::string> component_names() const override {
    if (params_.space_dim == 1) return {"u", "w"};
    return {"u", "w_x", "w_y"};
  }

  std::vector<std::string> derived_names() const override {
    if (params_.space_dim == 1) return {"theta", "q", "sigma"};
    return {"theta", "q_x", "q_y", "sigma"};
  }

  Vector derived(const StateVector& s) const override {
    const Vector q = heat_flux(s);
    Vector out(params_.space_dim + 2);
    out(0) = theta(s);
    out.segment(1, params_.space_dim) = q;
    out(params_.space_dim + 1) = q.dot(dissipation_matrix(s) * q);
    return out;
  }

 private:
  void check_direction(int direction) const {
    if (direction < 0 || direction >= params_.space_dim) throw ParameterError("flux direction out of range");
  }

  HeatParams params_;
  HeatDissipation custom_;
};

inline std::shared_ptr<const HeatModel> heat_model(const HeatParams& params) {
  return std::make_shared<const HeatModel>(params);
}

/// Heat model whose dissipation matrix is M(u, w) instead of I/(λθ²).
inline std::shared_ptr<const HeatModel> heat_model(const HeatParams& params, HeatDissipation dissipation) {
  if (!dissipation) throw ParameterError("custom dissipation matrix function is empty");
  return std::make_shared<const HeatModel>(params, std::move(dissipation));
}

/// √(c_v/α0)/u, the characteristic speed of the transport part in every direction.
inline double max_wave_speed_heat(const HeatParams& params, const StateVector& state) {
  return *HeatModel(params).max_wave_speed(state, 0);
}

/// Fourier's law q = −λ ∇θ.
inline Vector fourier_flux(const HeatParams& params, const Vector& grad_theta) {
  return -params.lambda * grad_theta;
}

/// Stationary limit of the w equation for a general entropy: q = M⁻¹ ∇θ⁻¹.
inline Vector generalized_fourier(const Matrix& dissipation, const Vector& grad_theta_inv) {
  if (dissipation.rows() != dissipation.cols() || dissipation.rows() != grad_theta_inv.size()) {
    throw ParameterError("dissipation matrix and gradient sizes do not match");
  }
  return solve_checked(dissipation, grad_theta_inv);
}

}  // namespace cdf
