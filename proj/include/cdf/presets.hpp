#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include "cdf/errors.hpp"
#include "cdf/fluid.hpp"
#include "cdf/grid.hpp"
#include "cdf/heat.hpp"

namespace cdf {

/// Named initial-condition profile. `base`, `left` and `right` hold primitive
/// values keyed by coordinate name (heat: u; fluid: rho, v, u).
///
/// dissipative = "zero" starts the dissipative block at w = C = 0;
/// "closure" starts it on the stationary (Fourier / Newton-Stokes) closure of
/// the initial profile, i.e. q = −λ ∂x θ and τ = −κ ∂x v.
struct InitialCondition {
  std::string preset = "sine";
  double amplitude = 0.1;
  double position = 0.5;
  double width = 0.05;
  std::map<std::string, double> base;
  std::map<std::string, double> left;
  std::map<std::string, double> right;
  std::string dissipative = "zero";

  double base_value(const std::string& key, double fallback) const {
    auto it = base.find(key);
    return it == base.end() ? fallback : it->second;
  }
};

namespace detail {

/// Unit shape g and its derivative on an axis; `centre` is in physical units.
struct Profile {
  double value;
  double slope;
};

inline Profile sine_profile(const Grid1D& axis, double x) {
  const double k = 2.0 * std::numbers::pi / axis.length();
  return {std::sin(k * (x - axis.x_min)), k * std::cos(k * (x - axis.x_min))};
}

inline Profile gaussian_profile(double x, double centre, double width) {
  const double g = std::exp(-(x - centre) * (x - centre) / (2.0 * width * width));
  return {g, -g * (x - centre) / (width * width)};
}

inline double side_value(const std::map<std::string, double>& side, const std::string& key, double fallback) {
  auto it = side.find(key);
  return it == side.end() ? fallback : it->second;
}

inline void check_preset(const InitialCondition& ic) {
  if (ic.preset != "sine" && ic.preset != "gaussian-pulse" && ic.preset != "riemann" && ic.preset != "uniform") {
    throw ConfigurationError("unknown initial-condition preset '" + ic.preset + "'");
  }
  if (ic.dissipative != "zero" && ic.dissipative != "closure") {
    throw ConfigurationError("initial.dissipative must be 'zero' or 'closure'");
  }
  if (ic.preset == "gaussian-pulse" && !(ic.width > 0.0)) throw ConfigurationError("initial.width must be > 0");
}

}  // namespace detail

/// Heat-model field u(x[, y]) with w either zero or w = α0 λ ∇θ (so that q = −λ∇θ).
inline Field heat_initial_field(const HeatParams& params, const Grid1D& x, const std::optional<Grid1D>& y,
                                const InitialCondition& ic) {
  params.validate();
  detail::check_preset(ic);
  if (y && params.space_dim != 2) throw ConfigurationError("a 2D grid needs space_dim = 2");
  if (!y && params.space_dim != 1) throw ConfigurationError("space_dim = 2 needs a 2D grid");
  const double u0 = ic.base_value("u", 1.0);
  const double a = ic.amplitude;
  Field field = y ? Field(x, *y, 1, 2) : Field(x, 1, 1);
  const double y_centre = y ? 0.5 * (y->x_min + y->x_max) : 0.0;
  return sample_field(std::move(field), [&](double px, double py) {
    double u = u0;
    double dudx = 0.0, dudy = 0.0;
    if (ic.preset == "sine") {
      const auto sx = detail::sine_profile(x, px);
      const auto sy = y ? detail::sine_profile(*y, py) : detail::Profile{1.0, 0.0};
      u = u0 + a * sx.value * sy.value;
      dudx = a * sx.slope * sy.value;
      dudy = a * sx.value * sy.slope;
    } else if (ic.preset == "gaussian-pulse") {
      const auto gx = detail::gaussian_profile(px, ic.position, ic.width);
      const auto gy = y ? detail::gaussian_profile(py, y_centre, ic.width) : detail::Profile{1.0, 0.0};
      u = u0 + a * gx.value * gy.value;
      dudx = a * gx.slope * gy.value;
      dudy = a * gx.value * gy.slope;
    } else if (ic.preset == "riemann") {
      u = px < ic.position ? detail::side_value(ic.left, "u", u0) : detail::side_value(ic.right, "u", u0);
    }
    StateVector s(1, params.space_dim);
    s[0] = u;
    if (ic.dissipative == "closure") {
      const double scale = params.alpha0 * params.lambda / params.c_v;
      s[1] = scale * dudx;
      if (params.space_dim == 2) s[2] = scale * dudy;
    }
    return s;
  });
}

/// Fluid field in density form.
///   sine:           ρ = ρ0(1 + A sin kx), v = v0 + A sin kx, u = u0(1 + A cos kx)
///   gaussian-pulse: ρ = ρ0 + A g(x), v = v0, u = u0
///   riemann:        left / right primitive states split at `position`
/// With dissipative = "closure": ρw = α0 λ ∂x θ and ρC = α1 κ ∂x v / θ.
inline Field fluid_initial_field(const FluidParams& params, const Grid1D& x, const InitialCondition& ic) {
  params.validate();
  detail::check_preset(ic);
  const double rho0 = ic.base_value("rho", 1.0);
  const double v0 = ic.base_value("v", 0.0);
  const double u0 = ic.base_value("u", 1.0);
  const double a = ic.amplitude;
  return sample_field(Field(x, 3, 2), [&](double px, double) {
    FluidPrimitive p{rho0, v0, u0, 0.0, 0.0};
    double dudx = 0.0, dvdx = 0.0;
    if (ic.preset == "sine") {
      const auto s = detail::sine_profile(x, px);
      const double k = 2.0 * std::numbers::pi / x.length();
      const double c = std::cos(k * (px - x.x_min));
      p.rho = rho0 * (1.0 + a * s.value);
      p.v = v0 + a * s.value;
      p.u = u0 * (1.0 + a * c);
      dvdx = a * s.slope;
      dudx = -u0 * a * k * s.value;
    } else if (ic.preset == "gaussian-pulse") {
      p.rho = rho0 + a * detail::gaussian_profile(px, ic.position, ic.width).value;
    } else if (ic.preset == "riemann") {
      const auto& side = px < ic.position ? ic.left : ic.right;
      p.rho = detail::side_value(side, "rho", rho0);
      p.v = detail::side_value(side, "v", v0);
      p.u = detail::side_value(side, "u", u0);
    }
    if (ic.dissipative == "closure") {
      const double theta = p.u / params.c_v;
      p.w = params.alpha0 * params.lambda * (dudx / params.c_v) / p.rho;
      p.C = params.alpha1 * params.kappa * dvdx / (theta * p.rho);
    }
    return conserved_from_primitive(p);
  });
}

}  // namespace cdf
