#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdf/errors.hpp"
#include "cdf/linalg.hpp"
#include "cdf/model.hpp"
#include "cdf/state.hpp"

namespace cdf {

/// Parameters of the one-dimensional Maxwell fluid. In 1D the spherical and
/// deviatoric parts of the velocity gradient coincide, so the two stress
/// relaxation parameters collapse into alpha1 and the two viscosities into kappa.
struct FluidParams {
  double R = 1.0;
  double c_v = 1.0;
  double alpha0 = 1.0;
  double alpha1 = 1.0;
  double lambda = 1.0;
  double kappa = 1.0;

  void validate() const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError(std::string(name) + " must be > 0");
    };
    positive(R, "R");
    positive(c_v, "c_v");
    positive(alpha0, "alpha0");
    positive(alpha1, "alpha1");
    positive(lambda, "lambda");
    positive(kappa, "kappa");
  }
};

/// Primitive variables: density, velocity, specific internal energy and the
/// specific non-equilibrium variables w and C.
struct FluidPrimitive {
  double rho = 1.0;
  double v = 0.0;
  double u = 1.0;
  double w = 0.0;
  double C = 0.0;
};

inline FluidPrimitive primitive_from_conserved(const StateVector& s) {
  if (s.size() != 5) throw DomainError("fluid state must have 5 components");
  const double rho = s[0];
  if (!(rho > 0.0)) throw DomainError("density must be > 0");
  FluidPrimitive p;
  p.rho = rho;
  p.v = s[1] / rho;
  p.u = s[2] / rho - 0.5 * p.v * p.v;
  p.w = s[3] / rho;
  p.C = s[4] / rho;
  return p;
}

inline StateVector conserved_from_primitive(const FluidPrimitive& p) {
  Vector d(5);
  d << p.rho, p.rho * p.v, p.rho * (p.u + 0.5 * p.v * p.v), p.rho * p.w, p.rho * p.C;
  return StateVector(3, 2, d);
}

/// Compressible Maxwell fluid in 1D, density form U = (ρ, ρv, ρe, ρw, ρC).
///
/// Specific entropy s = c_v ln u + R ln ν − w²/(2να0) − C²/(2να1), ν = 1/ρ, so
/// the entropy density is η = ρ c_v ln u − R ρ ln ρ − (ρw)²/(2α0) − (ρC)²/(2α1).
/// Closures: θ⁻¹ = c_v/u, π = θ s_ν, q = −ρw/α0, τ = −θ ρC/α1.
/// Dissipation matrix M = diag(1/(θ²λ), θ/κ), so the sources are q/(θ²λ) and τ/κ.
class FluidModel : public CdfModel {
 public:
  explicit FluidModel(const FluidParams& params) : params_(params) { params_.validate(); }

  const FluidParams& params() const { return params_; }

  std::string name() const override { return "fluid"; }
  int n_conserved() const override { return 3; }
  int n_dissipative() const override { return 2; }
  int space_dim() const override { return 1; }

  struct Closures {
    double theta;
    double inverse_theta;
    double pi;
    double q;
    double tau;
  };

  Closures closures(const StateVector& s) const {
    const FluidPrimitive p = primitive_from_conserved(s);
    Closures c{};
    c.inverse_theta = params_.c_v / p.u;
    c.theta = p.u / params_.c_v;
    const double rw = s[3];
    const double rc = s[4];
    // θ⁻¹π = s_ν holds the non-equilibrium contributions as well.
    c.pi = c.theta * (params_.R * p.rho + rw * rw / (2.0 * params_.alpha0) + rc * rc / (2.0 * params_.alpha1));
    c.q = -rw / params_.alpha0;
    c.tau = -c.theta * rc / params_.alpha1;
    return c;
  }

  Vector flux(const StateVector& s, int direction) const override {
    require_admissible(s);
    if (direction != 0) throw ParameterError("fluid model is one-dimensional");
    const double v = s[1] / s[0];
    const Closures c = closures(s);
    const double stress = c.pi + c.tau;
    Vector f(5);
    f << s[1], s[1] * v + stress, v * s[2] + c.q + stress * v, v * s[3] + c.inverse_theta, v * s[4] - v;
    return f;
  }

  double entropy(const StateVector& s) const override {
    require_admissible(s);
    const FluidPrimitive p = primitive_from_conserved(s);
    return p.rho * params_.c_v * std::log(p.u) - params_.R * p.rho * std::log(p.rho) -
           s[3] * s[3] / (2.0 * params_.alpha0) - s[4] * s[4] / (2.0 * params_.alpha1);
  }

  std::optional<Vector> entropy_gradient_analytic(const StateVector& s) const override {
    const FluidPrimitive p = primitive_from_conserved(s);
    const double cv = params_.c_v;
    Vector g(5);
    g(0) = cv * std::log(p.u) - params_.R * std::log(p.rho) - params_.R - cv + cv * p.v * p.v / (2.0 * p.u);
    g(1) = -cv * p.v / p.u;
    g(2) = cv / p.u;
    g(3) = -s[3] / params_.alpha0;
    g(4) = -s[4] / params_.alpha1;
    return g;
  }

  std::optional<Matrix> entropy_hessian_analytic(const StateVector& s) const override {
    const FluidPrimitive p = primitive_from_conserved(s);
    const double cv = params_.c_v;
    const double rho = p.rho, v = p.v, u = p.u;
    const double u_rho = (0.5 * v * v - u) / rho;
    Matrix h = Matrix::Zero(5, 5);
    h(0, 0) = cv * u_rho / u - params_.R / rho - cv * v * v / (rho * u) - cv * v * v * u_rho / (2.0 * u * u);
    h(0, 1) = h(1, 0) = cv * v * v * v / (2.0 * rho * u * u);
    h(0, 2) = h(2, 0) = -cv * u_rho / (u * u);
    h(1, 1) = -cv / (rho * u) - cv * v * v / (rho * u * u);
    h(1, 2) = h(2, 1) = cv * v / (u * u * rho);
    h(2, 2) = -cv / (u * u * rho);
    h(3, 3) = -1.0 / params_.alpha0;
    h(4, 4) = -1.0 / params_.alpha1;
    return h;
  }

  Matrix dissipation_matrix(const StateVector& s) const override {
    require_admissible(s);
    const double th = closures(s).theta;
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0 / (th * th * params_.lambda);
    m(1, 1) = th / params_.kappa;
    return m;
  }

  std::optional<std::string> admissibility_violation(const StateVector& s) const override {
    if (!(s[0] > 0.0)) return "density rho must be > 0";
    const double v = s[1] / s[0];
    if (!(s[2] / s[0] - 0.5 * v * v > 0.0)) return "internal energy u = e - v^2/2 must be > 0";
    return std::nullopt;
  }

  std::optional<Matrix> relaxation_rate(const StateVector& s) const override {
    const double th = closures(s).theta;
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0 / (params_.alpha0 * th * th * params_.lambda);
    a(1, 1) = th / (params_.alpha1 * params_.kappa);
    return a;
  }

  std::vector<std::string> coordinate_names() const override { return {"rho", "v", "u", "w", "C"}; }

  StateVector from_coordinates(const Vector& c) const override {
    return conserved_from_primitive({c(0), c(1), c(2), c(3), c(4)});
  }

  Vector to_coordinates(const StateVector& s) const override {
    const FluidPrimitive p = primitive_from_conserved(s);
    Vector c(5);
    c << p.rho, p.v, p.u, p.w, p.C;
    return c;
  }

  std::vector<Interval> default_sampling_box() const override {
    return {{0.5, 2.0}, {-1.0, 1.0}, {0.5, 2.0}, {-0.3, 0.3}, {-0.3, 0.3}};
  }

  std::vector<std::string> component_names() const override { return {"rho", "mom", "erg", "rho_w", "rho_C"}; }
  std::vector<std::string> derived_names() const override { return {"theta", "q", "tau", "sigma"}; }

  Vector derived(const StateVector& s) const override {
    const Closures c = closures(s);
    const Matrix m = dissipation_matrix(s);
    const double tau_scaled = c.inverse_theta * c.tau;
    Vector out(4);
    out << c.theta, c.q, c.tau, m(0, 0) * c.q * c.q + m(1, 1) * tau_scaled * tau_scaled;
    return out;
  }

 private:
  FluidParams params_;
};

inline std::shared_ptr<const FluidModel> fluid_model(const FluidParams& params) {
  return std::make_shared<const FluidModel>(params);
}

/// Spherical part (1/3)Tr(A) I and symmetric traceless part ½(A + Aᵀ) − (1/3)Tr(A) I.
struct TensorSplit {
  Eigen::Matrix3d spherical;
  Eigen::Matrix3d deviatoric;
};

inline TensorSplit orthogonal_decompose(const Eigen::Matrix3d& a) {
  const Eigen::Matrix3d spherical = (a.trace() / 3.0) * Eigen::Matrix3d::Identity();
  return {spherical, 0.5 * (a + a.transpose()) - spherical};
}

/// A : B = Σ_ij A_ij B_ji.
inline double double_contraction(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) { return (a * b).trace(); }

/// Derivative estimates needed to evaluate the Maxwell-form relaxation laws.
struct MaxwellDerivatives {
  double dt_q = 0.0;                ///< ∂t q
  double dx_vq = 0.0;               ///< ∂x (v q)
  double dx_inverse_theta = 0.0;    ///< ∂x θ⁻¹
  double dt_scaled_tau = 0.0;       ///< ∂t (θ⁻¹ τ)
  double dx_v_scaled_tau = 0.0;     ///< ∂x (v θ⁻¹ τ)
  double dx_v = 0.0;                ///< ∂x v
};

/// Residuals of
///   α0 [∂t q + ∂x(v q)] − ∂x θ⁻¹ + q/(θ² λ)
///   α1 [∂t(θ⁻¹τ) + ∂x(v θ⁻¹ τ)] + ∂x v + τ/κ
/// which vanish for solutions of the density-form system.
inline std::array<double, 2> maxwell_relaxation_residual(const FluidParams& params, const StateVector& state,
                                                         const MaxwellDerivatives& d) {
  const FluidModel model(params);
  model.require_admissible(state);
  const auto c = model.closures(state);
  return {params.alpha0 * (d.dt_q + d.dx_vq) - d.dx_inverse_theta + c.q / (c.theta * c.theta * params.lambda),
          params.alpha1 * (d.dt_scaled_tau + d.dx_v_scaled_tau) + d.dx_v + c.tau / params.kappa};
}

struct PowerLawParams {
  double mu0 = 1.0;
  double alpha = 0.0;

  void validate() const {
    if (!(mu0 > 0.0) || !std::isfinite(mu0)) throw ParameterError("mu0 must be > 0");
    if (!std::isfinite(alpha)) throw ParameterError("alpha must be finite");
    if (alpha >= 1.0) throw ParameterError("alpha must be < 1 (the fixed point |tau| = mu0 |tau|^alpha |gamma| is ill-posed)");
  }

  double index() const { return 1.0 / (1.0 - alpha); }
};

/// τ = −μ0ⁿ |γ̇|^(n−1) γ̇ with n = 1/(1−α).
inline double powerlaw_stress(const PowerLawParams& p, double gamma_dot) {
  p.validate();
  if (gamma_dot == 0.0) return 0.0;
  const double n = p.index();
  return -std::pow(p.mu0, n) * std::pow(std::abs(gamma_dot), n - 1.0) * gamma_dot;
}

/// Solves |τ| = μ0 |τ|^α |γ̇| for |τ| > 0 by bisection (in log space) and returns τ with the sign of −γ̇.
inline double powerlaw_stress_fixed_point(const PowerLawParams& p, double gamma_dot) {
  p.validate();
  if (gamma_dot == 0.0) return 0.0;
  const double g = std::abs(gamma_dot);
  // residual(T)/T = 1 − μ0 g T^(α−1) increases with T.
  auto residual = [&](double t) { return t - p.mu0 * std::pow(t, p.alpha) * g; };
  double lo = 1.0, hi = 1.0;
  while (residual(lo) > 0.0) lo *= 0.5;
  while (residual(hi) < 0.0) hi *= 2.0;
  for (int iter = 0; iter < 400 && hi - lo > 1e-16 * hi; ++iter) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  return -std::copysign(0.5 * (lo + hi), gamma_dot);
}

struct FnsFluxes {
  double q = 0.0;
  double tau = 0.0;
};

/// Stationary limit of the relaxation laws: q = −λ ∂x θ, τ = −κ ∂x v.
inline FnsFluxes fns_limit_fluxes(const FluidParams& params, double grad_theta, double grad_v) {
  return {-params.lambda * grad_theta, -params.kappa * grad_v};
}

}  // namespace cdf
