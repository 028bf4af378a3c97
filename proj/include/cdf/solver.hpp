#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cdf/entropy.hpp"
#include "cdf/errors.hpp"
#include "cdf/grid.hpp"
#include "cdf/linalg.hpp"
#include "cdf/model.hpp"
#include "cdf/numdiff.hpp"
#include "cdf/verify.hpp"

namespace cdf {

enum class BoundaryKind { periodic, fixed_state, zero_gradient };

/// Time integrator of the transport sub-step: one forward-Euler step, or
/// Heun's two-stage SSP Runge-Kutta built from two of them.
enum class TransportScheme { forward_euler, ssp_rk2 };

struct Boundary {
  BoundaryKind kind = BoundaryKind::periodic;
  std::optional<StateVector> left;   ///< fixed_state only (1D)
  std::optional<StateVector> right;  ///< fixed_state only (1D)
};

struct Scenario {
  std::string name = "scenario";
  ModelPtr model;
  Field initial;
  Boundary boundary;
  double cfl = 0.45;
  double t_end = 1.0;
  double output_every = 1.0;
  bool override_audit = false;
  TransportScheme transport = TransportScheme::forward_euler;
  std::size_t max_steps = 50'000'000;
};

/// Totals and entropy bookkeeping after one step (step 0 is the initial state).
struct StepRecord {
  std::size_t step = 0;
  double time = 0.0;
  double dt = 0.0;
  Vector totals;           ///< Σ u_k · cell volume per conserved variable
  Vector boundary_inflow;  ///< cumulative net inflow through the boundary per conserved variable
  double entropy = 0.0;    ///< Σ η · cell volume
  double entropy_abs = 0.0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

struct Trajectory {
  std::string model;
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::vector<StepRecord> steps;
};

/// Largest characteristic speed in `direction`: the model's bound when it has
/// one, otherwise the spectral radius of the numerical flux Jacobian.
inline double wave_speed(const CdfModel& model, const StateVector& state, int direction) {
  if (auto a = model.max_wave_speed(state, direction)) return *a;
  return spectrum_summary(flux_jacobian(model, state, direction)).spectral_radius;
}

/// Local Lax-Friedrichs flux ½(F(U_L) + F(U_R)) − ½ a (U_R − U_L).
inline Vector rusanov_flux(const CdfModel& model, const StateVector& left, const StateVector& right, int direction) {
  model.require_admissible(left);
  model.require_admissible(right);
  const double a = std::max(wave_speed(model, left, direction), wave_speed(model, right, direction));
  return 0.5 * (model.flux(left, direction) + model.flux(right, direction)) - 0.5 * a * (right.data() - left.data());
}

struct HyperbolicUpdate {
  Field field;
  Vector boundary_inflow;  ///< net inflow of the conserved block during the step
};

namespace detail {

struct CellTerms {
  Vector flux;
  double speed = 0.0;
};

inline std::string cell_label(const Field& f, int i, int j) {
  return f.dim() == 1 ? "cell " + std::to_string(i) : "cell (" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

inline void validate_boundary(const CdfModel& model, const Field& field, const Boundary& bc) {
  if (bc.kind != BoundaryKind::fixed_state) return;
  if (field.dim() != 1) throw ConfigurationError("fixed-state boundaries are only supported in 1D");
  if (!bc.left || !bc.right) throw ConfigurationError("fixed-state boundary needs left and right states");
  model.require_admissible(*bc.left);
  model.require_admissible(*bc.right);
}

/// Interior index for a neighbour index that may lie in a ghost layer, or -1
/// for the left fixed state and -2 for the right one.
inline int resolve(int k, int count, BoundaryKind kind) {
  if (k >= 0 && k < count) return k;
  switch (kind) {
    case BoundaryKind::periodic: return (k % count + count) % count;
    case BoundaryKind::zero_gradient: return std::clamp(k, 0, count - 1);
    case BoundaryKind::fixed_state: return k < 0 ? -1 : -2;
  }
  return k;
}

inline HyperbolicUpdate advance_hyperbolic(const CdfModel& model, const Field& field, double dt, const Boundary& bc,
                                           double cfl_limit) {
  validate_boundary(model, field, bc);
  if (model.space_dim() < field.dim()) throw ConfigurationError(model.name() + " does not support a 2D grid");
  const int n = model.n_conserved();
  const int nx = field.nx(), ny = field.ny();

  std::vector<std::vector<CellTerms>> terms(static_cast<std::size_t>(field.dim()));
  for (int d = 0; d < field.dim(); ++d) {
    auto& t = terms[static_cast<std::size_t>(d)];
    t.resize(field.cells().size());
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const StateVector& s = field.at(i, j);
        if (!model.admissible(s)) {
          throw SimulationAbort(cell_label(field, i, j) + " inadmissible before transport: " + s.to_string());
        }
        auto& ct = t[static_cast<std::size_t>(field.index(i, j))];
        ct.flux = model.flux(s, d);
        ct.speed = wave_speed(model, s, d);
      }
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double rate = 0.0;
      std::ostringstream speeds;
      for (int d = 0; d < field.dim(); ++d) {
        const double a = terms[static_cast<std::size_t>(d)][static_cast<std::size_t>(field.index(i, j))].speed;
        rate += a / field.spacing(d);
        speeds << (d ? ", " : "") << a;
      }
      if (dt * rate > cfl_limit * (1.0 + 1e-12)) {
        throw CflViolation("CFL violated at " + cell_label(field, i, j) + ": dt=" + std::to_string(dt) +
                           ", speeds=(" + speeds.str() + "), Courant number " + std::to_string(dt * rate));
      }
    }
  }

  CellTerms left_ghost, right_ghost;
  if (bc.kind == BoundaryKind::fixed_state) {
    left_ghost = {model.flux(*bc.left, 0), wave_speed(model, *bc.left, 0)};
    right_ghost = {model.flux(*bc.right, 0), wave_speed(model, *bc.right, 0)};
  }

  HyperbolicUpdate out{field, Vector::Zero(n)};
  for (int d = 0; d < field.dim(); ++d) {
    const auto& t = terms[static_cast<std::size_t>(d)];
    const int count = d == 0 ? nx : ny;
    const int lines = d == 0 ? ny : nx;
    const double ratio = dt / field.spacing(d);
    const double face_area = field.cell_volume() / field.spacing(d);
    for (int line = 0; line < lines; ++line) {
      auto cell_at = [&](int k) -> std::pair<const StateVector*, const CellTerms*> {
        const int r = resolve(k, count, bc.kind);
        if (r == -1) return {&*bc.left, &left_ghost};
        if (r == -2) return {&*bc.right, &right_ghost};
        const int idx = d == 0 ? field.index(r, line) : field.index(line, r);
        return {&field.cells()[static_cast<std::size_t>(idx)], &t[static_cast<std::size_t>(idx)]};
      };
      // Face k sits between cells k-1 and k.
      std::vector<Vector> faces(static_cast<std::size_t>(count + 1));
      for (int k = 0; k <= count; ++k) {
        const auto [ul, tl] = cell_at(k - 1);
        const auto [ur, tr] = cell_at(k);
        const double a = std::max(tl->speed, tr->speed);
        faces[static_cast<std::size_t>(k)] = 0.5 * (tl->flux + tr->flux) - 0.5 * a * (ur->data() - ul->data());
      }
      for (int k = 0; k < count; ++k) {
        const int idx = d == 0 ? field.index(k, line) : field.index(line, k);
        out.field.cells()[static_cast<std::size_t>(idx)].data() -=
            ratio * (faces[static_cast<std::size_t>(k + 1)] - faces[static_cast<std::size_t>(k)]);
      }
      out.boundary_inflow +=
          dt * face_area * (faces.front().head(n) - faces.back().head(n));
    }
  }

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const StateVector& s = out.field.at(i, j);
      if (!model.admissible(s)) {
        throw SimulationAbort(cell_label(field, i, j) + " became inadmissible after transport: " + s.to_string());
      }
    }
  }
  return out;
}

}  // namespace detail

/// First-order finite-volume transport update with Rusanov fluxes. Throws
/// CflViolation when dt · Σ_d a_d/Δx_d exceeds `cfl_limit` in any cell.
inline Field step_hyperbolic(const CdfModel& model, const Field& field, double dt, const Boundary& bc = {},
                             double cfl_limit = 1.0) {
  return detail::advance_hyperbolic(model, field, dt, bc, cfl_limit).field;
}

namespace detail {

inline Vector implicit_midpoint_source(const CdfModel& model, const StateVector& start, double dt) {
  const int m = model.n_dissipative();
  auto rhs = [&](const Vector& v) {
    StateVector s = start;
    s.dissipative() = v;
    return Vector(source(model, s).tail(m));
  };
  const Vector v0 = start.dissipative();
  Vector y = v0;
  double norm = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 50; ++iter) {
    const Vector mid = 0.5 * (v0 + y);
    const Vector g = y - v0 - dt * rhs(mid);
    norm = g.cwiseAbs().maxCoeff();
    if (norm <= 1e-13 * std::max(1.0, y.cwiseAbs().maxCoeff())) return y;
    const Matrix jac = Matrix::Identity(m, m) - 0.5 * dt * numdiff::jacobian_central2(rhs, mid);
    y -= solve_checked(jac, g);
  }
  throw ConvergenceError("implicit source step failed at state " + start.to_string(), norm);
}

}  // namespace detail

/// Integrates dv/dt = q(u, v) over dt in every cell with u frozen. Models that
/// expose a relaxation rate A get the exact solution v ← exp(−A dt) v; others
/// fall back to the implicit midpoint rule solved by Newton.
inline Field step_source_exact(const CdfModel& model, const Field& field, double dt) {
  if (!(dt >= 0.0)) throw ParameterError("source step needs dt >= 0");
  Field out = field;
  for (int c = 0; c < out.cell_count(); ++c) {
    StateVector& s = out.cells()[static_cast<std::size_t>(c)];
    if (auto rate = model.relaxation_rate(s)) {
      const Matrix& a = *rate;
      const bool diagonal = (a - Matrix(a.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
      if (diagonal) {
        for (int k = 0; k < a.rows(); ++k) s.dissipative()(k) *= std::exp(-a(k, k) * dt);
      } else {
        const Eigen::MatrixXd propagator = (-dt * Eigen::MatrixXd(a)).exp();
        s.dissipative() = Vector(propagator * Eigen::VectorXd(s.dissipative()));
      }
    } else {
      s.dissipative() = detail::implicit_midpoint_source(model, s, dt);
    }
    if (!s.all_finite()) throw SimulationAbort("source step produced non-finite state in cell " + std::to_string(c));
  }
  return out;
}

namespace detail {

inline HyperbolicUpdate transport(const CdfModel& model, const Field& field, double dt, const Boundary& bc,
                                  double cfl_limit, TransportScheme scheme) {
  HyperbolicUpdate first = advance_hyperbolic(model, field, dt, bc, cfl_limit);
  if (scheme == TransportScheme::forward_euler) return first;
  HyperbolicUpdate second = advance_hyperbolic(model, first.field, dt, bc, cfl_limit);
  for (std::size_t c = 0; c < second.field.cells().size(); ++c) {
    Vector& x = second.field.cells()[c].data();
    x = 0.5 * (field.cells()[c].data() + x);
  }
  second.boundary_inflow = 0.5 * (first.boundary_inflow + second.boundary_inflow);
  return second;
}

inline HyperbolicUpdate strang(const CdfModel& model, const Field& field, double dt, const Boundary& bc,
                               double cfl_limit, TransportScheme scheme = TransportScheme::forward_euler) {
  Field half = step_source_exact(model, field, 0.5 * dt);
  HyperbolicUpdate transported = transport(model, half, dt, bc, cfl_limit, scheme);
  transported.field = step_source_exact(model, transported.field, 0.5 * dt);
  return transported;
}

}  // namespace detail

/// S(dt/2) ∘ H(dt) ∘ S(dt/2).
inline Field strang_step(const CdfModel& model, const Field& field, double dt, const Boundary& bc = {},
                         double cfl_limit = 1.0, TransportScheme scheme = TransportScheme::forward_euler) {
  return detail::strang(model, field, dt, bc, cfl_limit, scheme).field;
}

/// Σ_d a_d/Δx_d maximised over cells; the stable step is cfl / this value.
inline double max_courant_rate(const CdfModel& model, const Field& field) {
  double rate = 0.0;
  for (const auto& s : field.cells()) {
    double r = 0.0;
    for (int d = 0; d < field.dim(); ++d) r += wave_speed(model, s, d) / field.spacing(d);
    rate = std::max(rate, r);
  }
  return rate;
}

inline StepRecord measure(const CdfModel& model, const Field& field) {
  StepRecord rec;
  const double vol = field.cell_volume();
  rec.totals = Vector::Zero(model.n_conserved());
  rec.boundary_inflow = Vector::Zero(model.n_conserved());
  rec.sigma_min = std::numeric_limits<double>::infinity();
  rec.sigma_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : field.cells()) {
    rec.totals += vol * s.conserved();
    const double eta = model.entropy(s);
    rec.entropy += vol * eta;
    rec.entropy_abs += vol * std::abs(eta);
    const double sigma = entropy_production(model, s);
    rec.sigma_min = std::min(rec.sigma_min, sigma);
    rec.sigma_max = std::max(rec.sigma_max, sigma);
  }
  return rec;
}

/// Refuses models that fail concavity or positive-definiteness on the initial states.
inline void audit_gate(const CdfModel& model, const Field& field) {
  std::vector<StateVector> states;
  const std::size_t stride = std::max<std::size_t>(1, field.cells().size() / 256);
  for (std::size_t k = 0; k < field.cells().size(); k += stride) states.push_back(field.cells()[k]);
  const AuditTolerances tol;
  const auto concave = check_concavity(model, states, tol.concavity);
  const auto dissipative = check_dissipation_matrix(model, states, tol.positive_definite);
  if (!concave.passed || !dissipative.passed) {
    throw AuditFailure(model.name() + " fails the structural audit (" + (concave.passed ? "" : "concavity ") +
                       (dissipative.passed ? "" : "dissipation_matrix ") +
                       "); pass override_audit to run it anyway");
  }
}

/// Integrates a scenario to t_end with dt = cfl / max Σ_d a_d/Δx_d, recording
/// snapshots every `output_every` and bookkeeping after every step.
inline Trajectory run(const Scenario& sc) {
  if (!sc.model) throw ConfigurationError("scenario has no model");
  const CdfModel& model = *sc.model;
  if (!(sc.cfl > 0.0 && sc.cfl < 1.0)) throw ConfigurationError("cfl must lie in (0, 1)");
  if (!(sc.t_end > 0.0) || !std::isfinite(sc.t_end)) throw ConfigurationError("t_end must be > 0");
  if (!(sc.output_every > 0.0)) throw ConfigurationError("output_every must be > 0");
  if (sc.initial.cell_count() == 0) throw ConfigurationError("scenario has an empty initial field");
  for (int c = 0; c < sc.initial.cell_count(); ++c) {
    const StateVector& s = sc.initial.cells()[static_cast<std::size_t>(c)];
    if (!model.admissible(s)) {
      throw ConfigurationError("initial state in cell " + std::to_string(c) + " is inadmissible: " + s.to_string() +
                               (model.admissibility_violation(s) ? " (" + *model.admissibility_violation(s) + ")"
                                                                 : std::string()));
    }
  }
  detail::validate_boundary(model, sc.initial, sc.boundary);
  if (!sc.override_audit) audit_gate(model, sc.initial);

  Trajectory traj;
  traj.model = model.name();
  Field field = sc.initial;
  double t = 0.0;
  Vector inflow = Vector::Zero(model.n_conserved());
  traj.times.push_back(0.0);
  traj.snapshots.push_back(field);
  traj.steps.push_back(measure(model, field));
  traj.steps.back().boundary_inflow = inflow;

  std::size_t next_output = 1;
  const double time_eps = 1e-12 * sc.t_end;
  std::size_t step = 0;
  while (t < sc.t_end - time_eps) {
    if (++step > sc.max_steps) throw SimulationAbort("step limit reached at t=" + std::to_string(t));
    const double target = std::min(sc.t_end, static_cast<double>(next_output) * sc.output_every);
    const double rate = max_courant_rate(model, field);
    double dt = rate > 0.0 ? sc.cfl / rate : sc.t_end - t;
    bool hits_target = false;
    if (t + dt >= target - time_eps) {
      dt = target - t;
      hits_target = true;
    }
    try {
      HyperbolicUpdate up = detail::strang(model, field, dt, sc.boundary, 1.0, sc.transport);
      field = std::move(up.field);
      inflow += up.boundary_inflow;
    } catch (const SimulationAbort& e) {
      throw SimulationAbort("t=" + std::to_string(t) + ", step " + std::to_string(step) + ": " + e.what());
    }
    t = hits_target ? target : t + dt;
    StepRecord rec = measure(model, field);
    rec.step = step;
    rec.time = t;
    rec.dt = dt;
    rec.boundary_inflow = inflow;
    traj.steps.push_back(std::move(rec));
    if (hits_target) {
      traj.times.push_back(t);
      traj.snapshots.push_back(field);
      if (target < sc.t_end) ++next_output;
    }
  }
  if (traj.times.back() < sc.t_end - time_eps) {
    traj.times.push_back(t);
    traj.snapshots.push_back(field);
  }
  return traj;
}

}  // namespace cdf
