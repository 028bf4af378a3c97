#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cdf/entropy.hpp"
#include "cdf/errors.hpp"
#include "cdf/fluid.hpp"
#include "cdf/grid.hpp"
#include "cdf/heat.hpp"
#include "cdf/presets.hpp"
#include "cdf/solver.hpp"

namespace cdf {

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// Discrete L1, L2 and L∞ norms of a − b weighted by the cell volume.
inline ErrorNorms error_norms(std::span<const double> a, std::span<const double> b, double cell_volume) {
  if (a.size() != b.size()) throw ParameterError("error_norms: fields differ in size");
  ErrorNorms e;
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    e.l1 += d * cell_volume;
    sq += d * d * cell_volume;
    e.linf = std::max(e.linf, d);
  }
  e.l2 = std::sqrt(sq);
  return e;
}

inline ErrorNorms error_norms(std::span<const double> a, std::span<const double> b, const Grid1D& grid) {
  return error_norms(a, b, grid.dx());
}

/// Least-squares slope of log y against log x.
inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 3) throw ParameterError("slope fit needs at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("slope fit needs positive values");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConservationAudit {
  Vector max_relative_drift;  ///< per conserved variable

  double worst() const { return max_relative_drift.size() ? max_relative_drift.maxCoeff() : 0.0; }
};

/// Drift of each conserved total against its initial value, corrected by the
/// accumulated boundary inflow. Scaled by max(|total₀|, Σ|u|·vol) with the
/// second term maximised over the snapshots, so zero-sum components (e.g.
/// momentum at rest) still get a meaningful scale.
inline ConservationAudit conservation_audit(const Trajectory& traj) {
  if (traj.steps.empty() || traj.snapshots.empty()) throw ParameterError("empty trajectory");
  const StepRecord& first = traj.steps.front();
  const int n = static_cast<int>(first.totals.size());
  Vector scale(n);
  for (int k = 0; k < n; ++k) {
    scale(k) = std::abs(first.totals(k));
    for (const Field& f : traj.snapshots) {
      double abs_total = 0.0;
      for (const auto& s : f.cells()) abs_total += std::abs(s[k]) * f.cell_volume();
      scale(k) = std::max(scale(k), abs_total);
    }
  }
  ConservationAudit audit{Vector::Zero(n)};
  for (const auto& rec : traj.steps) {
    for (int k = 0; k < n; ++k) {
      const double gap = std::abs(rec.totals(k) - first.totals(k) - rec.boundary_inflow(k));
      const double rel = gap == 0.0 ? 0.0 : gap / std::max(scale(k), std::numeric_limits<double>::min());
      audit.max_relative_drift(k) = std::max(audit.max_relative_drift(k), rel);
    }
  }
  return audit;
}

struct EntropyDecrease {
  std::size_t step = 0;
  double relative_decrease = 0.0;
};

struct NegativeProduction {
  std::size_t snapshot = 0;
  int cell = 0;
  double sigma = 0.0;
};

struct EntropyAudit {
  std::vector<double> total_entropy;   ///< per step
  std::vector<double> min_sigma;       ///< per step
  std::vector<EntropyDecrease> monotonicity_violations;
  std::vector<NegativeProduction> sigma_violations;
  double max_relative_decrease = 0.0;  ///< largest per-step relative decrease (≤ 0 when entropy never drops)
  bool strictly_increasing = false;    ///< final total entropy exceeds the initial one

  bool passed() const { return monotonicity_violations.empty() && sigma_violations.empty(); }
};

/// Second-law audit: σ recomputed in every cell of every snapshot must be
/// ≥ sigma_floor, and the per-step total entropy may not drop by more than
/// decrease_tol relative to max(|S|, Σ|η|·vol). With `closed_system` false
/// (open boundaries that carry entropy out) only σ is checked.
inline EntropyAudit entropy_audit(const Trajectory& traj, const CdfModel& model, double sigma_floor = -1e-14,
                                  double decrease_tol = 1e-10, bool closed_system = true) {
  EntropyAudit audit;
  audit.max_relative_decrease = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.steps.size(); ++k) {
    const StepRecord& rec = traj.steps[k];
    audit.total_entropy.push_back(rec.entropy);
    audit.min_sigma.push_back(rec.sigma_min);
    if (rec.sigma_min < sigma_floor) audit.sigma_violations.push_back({k, -1, rec.sigma_min});
    if (k == 0) continue;
    const StepRecord& prev = traj.steps[k - 1];
    const double scale = std::max({std::abs(prev.entropy), prev.entropy_abs, std::numeric_limits<double>::min()});
    const double rel = (prev.entropy - rec.entropy) / scale;
    audit.max_relative_decrease = std::max(audit.max_relative_decrease, rel);
    if (closed_system && rel > decrease_tol) audit.monotonicity_violations.push_back({rec.step, rel});
  }
  for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
    const Field& f = traj.snapshots[s];
    for (int c = 0; c < f.cell_count(); ++c) {
      const double sigma = entropy_production(model, f.cells()[static_cast<std::size_t>(c)]);
      if (sigma < sigma_floor) audit.sigma_violations.push_back({s, c, sigma});
    }
  }
  if (traj.steps.size() > 1) audit.strictly_increasing = traj.steps.back().entropy > traj.steps.front().entropy;
  return audit;
}

/// Explicit conservative solve of the Fourier limit ∂t u = ∂x(λ ∂x θ), θ = u/c_v,
/// on a periodic or zero-gradient 1D grid with dt ≤ 0.4 dx² c_v/λ.
inline std::vector<double> reference_diffusion_solve(const HeatParams& params, std::vector<double> u,
                                                     const Grid1D& grid, double t_end,
                                                     BoundaryKind boundary = BoundaryKind::periodic) {
  params.validate();
  grid.validate();
  if (static_cast<int>(u.size()) != grid.n_cells) throw ParameterError("initial data does not match the grid");
  if (boundary == BoundaryKind::fixed_state) throw ParameterError("reference diffusion supports periodic or zero-gradient");
  if (!(t_end >= 0.0)) throw ParameterError("t_end must be >= 0");
  const double dx = grid.dx();
  const double dt_max = 0.4 * dx * dx * params.c_v / params.lambda;
  const auto steps = static_cast<long>(std::ceil(t_end / dt_max));
  if (steps == 0) return u;
  const double dt = t_end / static_cast<double>(steps);
  const int n = grid.n_cells;
  std::vector<double> face(static_cast<std::size_t>(n + 1));
  for (long s = 0; s < steps; ++s) {
    for (int k = 0; k <= n; ++k) {
      int l = k - 1, r = k;
      if (boundary == BoundaryKind::periodic) {
        l = (l + n) % n;
        r = r % n;
      } else {
        l = std::clamp(l, 0, n - 1);
        r = std::clamp(r, 0, n - 1);
      }
      face[static_cast<std::size_t>(k)] =
          -params.lambda * (u[static_cast<std::size_t>(r)] - u[static_cast<std::size_t>(l)]) / (params.c_v * dx);
    }
    for (int i = 0; i < n; ++i) {
      u[static_cast<std::size_t>(i)] -=
          dt / dx * (face[static_cast<std::size_t>(i + 1)] - face[static_cast<std::size_t>(i)]);
    }
  }
  return u;
}

/// Sine profile with the dissipative variables on the Fourier closure.
inline InitialCondition closure_sine(double amplitude = 0.1) {
  InitialCondition ic;
  ic.amplitude = amplitude;
  ic.dissipative = "closure";
  return ic;
}

/// Gaussian density pulse of width 0.1 with closure dissipative data.
inline InitialCondition smooth_pulse(double amplitude = 0.1) {
  InitialCondition ic;
  ic.preset = "gaussian-pulse";
  ic.amplitude = amplitude;
  ic.width = 0.1;
  ic.dissipative = "closure";
  return ic;
}

/// Heat-model family for the α0 → 0 study.
struct RelaxationStudyConfig {
  HeatParams base;
  std::vector<double> alpha0_values{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  Grid1D grid{512, 0.0, 1.0};
  double t_end = 0.1;
  InitialCondition initial = closure_sine();
  double cfl = 0.45;
  std::size_t threads = 1;
};

struct ConvergenceStudy {
  std::vector<double> parameters;
  std::vector<ErrorNorms> errors;  ///< relative to the norms of the reference field
  double slope = 0.0;              ///< least-squares log-log slope of the L2 errors
  bool monotone = true;            ///< errors decrease with the parameter
  bool inconclusive = false;       ///< set when errors are non-monotone; data are kept
};

namespace detail {

/// Runs job(i) for i in [0, count) with at most `threads` concurrent workers; results keep input order.
template <class T, class Job>
std::vector<T> ordered_parallel(std::size_t count, std::size_t threads, Job job) {
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, threads);
  for (std::size_t start = 0; start < count; start += threads) {
    std::vector<std::future<T>> batch;
    for (std::size_t i = start; i < std::min(count, start + threads); ++i) {
      batch.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, job, i));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) out[start + i] = batch[i].get();
  }
  return out;
}

inline ErrorNorms relative_norms(std::span<const double> a, std::span<const double> ref, double vol) {
  const ErrorNorms e = error_norms(a, ref, vol);
  const std::vector<double> zeros(ref.size(), 0.0);
  const ErrorNorms r = error_norms(ref, zeros, vol);
  return {e.l1 / r.l1, e.l2 / r.l2, e.linf / r.linf};
}

}  // namespace detail

/// For every α0, runs the heat model to t_end and compares u with the Fourier
/// reference solution started from the same u(x, 0).
inline ConvergenceStudy relaxation_convergence(const RelaxationStudyConfig& cfg) {
  if (cfg.alpha0_values.size() < 3) throw ParameterError("a convergence study needs at least 3 parameter values");
  cfg.base.validate();
  if (cfg.base.space_dim != 1) throw ParameterError("the relaxation study runs in 1D");
  auto one = [&cfg](std::size_t i) {
    HeatParams p = cfg.base;
    p.alpha0 = cfg.alpha0_values[i];
    Scenario sc;
    sc.name = "relaxation";
    sc.model = heat_model(p);
    sc.initial = heat_initial_field(p, cfg.grid, std::nullopt, cfg.initial);
    sc.cfl = cfg.cfl;
    sc.t_end = cfg.t_end;
    sc.output_every = cfg.t_end;
    const Trajectory traj = run(sc);
    const auto ref = reference_diffusion_solve(p, sc.initial.component(0), cfg.grid, cfg.t_end);
    const auto u = traj.snapshots.back().component(0);
    return detail::relative_norms(u, ref, cfg.grid.dx());
  };
  ConvergenceStudy study;
  study.parameters = cfg.alpha0_values;
  study.errors = detail::ordered_parallel<ErrorNorms>(cfg.alpha0_values.size(), cfg.threads, one);
  std::vector<double> l2;
  for (const auto& e : study.errors) l2.push_back(e.l2);
  study.slope = fit_loglog_slope(study.parameters, l2);
  // Order the points by parameter before judging monotonicity.
  std::vector<std::size_t> order(l2.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return study.parameters[a] < study.parameters[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (!(l2[order[k]] > l2[order[k - 1]])) study.monotone = false;
  }
  study.inconclusive = !study.monotone;
  return study;
}

struct FnsComparison {
  double max_relative_q = 0.0;
  double max_relative_tau = 0.0;
  int cells_q = 0;
  int cells_tau = 0;
};

/// Compares q and τ carried by a fluid field with the Fourier-Newton-Stokes
/// fluxes −λ ∂x θ and −κ ∂x v built from periodic central differences. Only
/// cells where the gradient is at least `fraction` of its maximum are used.
inline FnsComparison fns_limit_comparison(const Field& field, const FluidParams& params, double fraction = 0.1) {
  const FluidModel model(params);
  const int n = field.nx();
  const double dx = field.spacing(0);
  std::vector<double> theta(static_cast<std::size_t>(n)), vel(static_cast<std::size_t>(n)),
      q(static_cast<std::size_t>(n)), tau(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto c = model.closures(field.at(i));
    theta[static_cast<std::size_t>(i)] = c.theta;
    q[static_cast<std::size_t>(i)] = c.q;
    tau[static_cast<std::size_t>(i)] = c.tau;
    vel[static_cast<std::size_t>(i)] = field.at(i)[1] / field.at(i)[0];
  }
  auto central = [&](const std::vector<double>& f, int i) {
    return (f[static_cast<std::size_t>((i + 1) % n)] - f[static_cast<std::size_t>((i - 1 + n) % n)]) / (2.0 * dx);
  };
  std::vector<double> gt(static_cast<std::size_t>(n)), gv(static_cast<std::size_t>(n));
  double gt_max = 0.0, gv_max = 0.0;
  for (int i = 0; i < n; ++i) {
    gt[static_cast<std::size_t>(i)] = central(theta, i);
    gv[static_cast<std::size_t>(i)] = central(vel, i);
    gt_max = std::max(gt_max, std::abs(gt[static_cast<std::size_t>(i)]));
    gv_max = std::max(gv_max, std::abs(gv[static_cast<std::size_t>(i)]));
  }
  FnsComparison out;
  for (int i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const FnsFluxes ref = fns_limit_fluxes(params, gt[idx], gv[idx]);
    if (gt_max > 0.0 && std::abs(gt[idx]) >= fraction * gt_max) {
      out.max_relative_q = std::max(out.max_relative_q, std::abs(q[idx] - ref.q) / std::abs(ref.q));
      ++out.cells_q;
    }
    if (gv_max > 0.0 && std::abs(gv[idx]) >= fraction * gv_max) {
      out.max_relative_tau = std::max(out.max_relative_tau, std::abs(tau[idx] - ref.tau) / std::abs(ref.tau));
      ++out.cells_tau;
    }
  }
  return out;
}

struct FluidLimitStudyConfig {
  FluidParams base;
  std::vector<double> alpha_values{1e-1, 1e-2, 1e-3};  ///< applied to both α0 and α1
  Grid1D grid{256, 0.0, 1.0};
  double t_end = 0.1;
  InitialCondition initial = smooth_pulse();
  double cfl = 0.45;
  double fraction = 0.1;
  std::size_t threads = 1;
};

struct FluidLimitStudy {
  std::vector<double> parameters;
  std::vector<FnsComparison> comparisons;
};

/// Periodic fluid runs for each α; each final state is compared with the
/// Fourier-Newton-Stokes fluxes.
inline FluidLimitStudy fluid_relaxation_study(const FluidLimitStudyConfig& cfg) {
  cfg.base.validate();
  auto one = [&cfg](std::size_t i) {
    FluidParams p = cfg.base;
    p.alpha0 = p.alpha1 = cfg.alpha_values[i];
    Scenario sc;
    sc.name = "fluid-limit";
    sc.model = fluid_model(p);
    sc.initial = fluid_initial_field(p, cfg.grid, cfg.initial);
    sc.cfl = cfg.cfl;
    sc.t_end = cfg.t_end;
    sc.output_every = cfg.t_end;
    return fns_limit_comparison(run(sc).snapshots.back(), p, cfg.fraction);
  };
  FluidLimitStudy study;
  study.parameters = cfg.alpha_values;
  study.comparisons = detail::ordered_parallel<FnsComparison>(cfg.alpha_values.size(), cfg.threads, one);
  return study;
}

}  // namespace cdf
