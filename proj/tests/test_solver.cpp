#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cdf/diagnostics.hpp"
#include "cdf/fixtures.hpp"
#include "cdf/fluid.hpp"
#include "cdf/heat.hpp"
#include "cdf/presets.hpp"
#include "cdf/solver.hpp"

using namespace cdf;

namespace {

StateVector heat1(double u, double w) {
  Vector d(2);
  d << u, w;
  return StateVector(1, 1, d);
}

Field heat_sine(const HeatParams& p, int cells, const std::string& dissipative = "zero") {
  InitialCondition ic;
  ic.dissipative = dissipative;
  return heat_initial_field(p, Grid1D{cells, 0.0, 1.0}, std::nullopt, ic);
}

double max_diff(const Field& a, const Field& b) {
  double worst = 0.0;
  for (std::size_t c = 0; c < a.cells().size(); ++c) {
    worst = std::max(worst, (a.cells()[c].data() - b.cells()[c].data()).cwiseAbs().maxCoeff());
  }
  return worst;
}

Field advance_fixed(const CdfModel& m, Field f, double t_end, int steps, TransportScheme scheme) {
  const double dt = t_end / steps;
  for (int k = 0; k < steps; ++k) f = strang_step(m, f, dt, {}, 1.0, scheme);
  return f;
}

}  // namespace

TEST(Rusanov, ConsistentForEqualStates) {
  const FluidModel m({1.0, 1.5, 0.1, 0.2, 1.0, 1.0});
  const StateVector s = conserved_from_primitive({1.1, 0.3, 0.8, 0.05, -0.1});
  EXPECT_EQ((rusanov_flux(m, s, s, 0) - m.flux(s, 0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rusanov, HandEvaluatedHeatFlux) {
  const HeatModel m({1.0, 1.0, 1.0, 1});
  const Vector f = rusanov_flux(m, heat1(1.0, 0.0), heat1(1.0, 0.2), 0);
  EXPECT_NEAR(f(0), -0.1, 1e-15);
  EXPECT_NEAR(f(1), 0.9, 1e-15);
}

TEST(Rusanov, DissipationTermIsAntisymmetric) {
  const HeatModel m({1.0, 1.0, 0.5, 1});
  const StateVector a = heat1(0.9, 0.1), b = heat1(1.3, -0.4);
  const Vector fab = rusanov_flux(m, a, b, 0), fba = rusanov_flux(m, b, a, 0);
  const Vector central = 0.5 * (m.flux(a, 0) + m.flux(b, 0));
  EXPECT_LE(((fab - central) + (fba - central)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WaveSpeed, NumericalFallbackMatchesAnalyticBound) {
  const auto broken = fixtures::make_fixture("fixture:broken-flux", {1.0, 1.0, 0.1, 1});
  EXPECT_FALSE(broken->max_wave_speed(heat1(1.0, 0.0), 0).has_value());
  EXPECT_GT(wave_speed(*broken, heat1(1.0, 0.0), 0), 0.0);
  const HeatModel m({1.0, 1.0, 0.1, 1});
  const StateVector s = heat1(1.3, 0.2);
  const double numeric = spectrum_summary(flux_jacobian(m, s, 0)).spectral_radius;
  EXPECT_NEAR(wave_speed(m, s, 0), numeric, 1e-10 * numeric);
}

TEST(StepHyperbolic, UniformFieldUnchanged) {
  const HeatModel m({1.0, 1.0, 0.1, 1});
  Field f(Grid1D{16, 0.0, 1.0}, 1, 1);
  for (auto& c : f.cells()) c = heat1(1.2, 0.3);
  const Field g = step_hyperbolic(m, f, 0.5 / max_courant_rate(m, f));
  EXPECT_EQ(max_diff(f, g), 0.0);
}

TEST(StepHyperbolic, PeriodicConservation) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  const HeatModel m(p);
  const Field f = heat_sine(p, 64, "closure");
  const Field g = step_hyperbolic(m, f, 0.9 / max_courant_rate(m, f));
  double before = 0.0, after = 0.0;
  for (int i = 0; i < 64; ++i) {
    before += f.at(i)[0] / 64.0;
    after += g.at(i)[0] / 64.0;
  }
  EXPECT_LE(std::abs(after - before), 1e-13 * before);
}

TEST(StepHyperbolic, CflViolationNamesCell) {
  const HeatModel m({1.0, 1.0, 0.1, 1});
  const Field f = heat_sine({1.0, 1.0, 0.1, 1}, 32);
  try {
    (void)step_hyperbolic(m, f, 1.5 / max_courant_rate(m, f));
    FAIL() << "expected CflViolation";
  } catch (const CflViolation& e) {
    EXPECT_NE(std::string(e.what()).find("cell"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("speeds"), std::string::npos);
  }
}

TEST(StepHyperbolic, InadmissibleResultAborts) {
  const HeatModel m({1.0, 1.0, 0.01, 1});
  Field f(Grid1D{8, 0.0, 1.0}, 1, 1);
  for (int i = 0; i < 8; ++i) f.at(i) = heat1(0.1, i < 4 ? 1.0 : -1.0);
  EXPECT_THROW((void)step_hyperbolic(m, f, 0.9 / max_courant_rate(m, f)), SimulationAbort);
}

TEST(StepHyperbolic, SelfConvergenceUnderGridDoubling) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  auto solve = [&](int cells) {
    Scenario sc;
    sc.model = heat_model(p);
    sc.initial = heat_sine(p, cells, "closure");
    sc.t_end = 0.1;
    sc.output_every = 0.1;
    return run(sc).snapshots.back().component(0);
  };
  const auto u1 = solve(64), u2 = solve(128), u4 = solve(256);
  auto restrict_gap = [](const std::vector<double>& coarse, const std::vector<double>& fine) {
    double s = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      const double avg = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
      s += std::abs(coarse[i] - avg) / static_cast<double>(coarse.size());
    }
    return s;
  };
  const double order = std::log2(restrict_gap(u1, u2) / restrict_gap(u2, u4));
  EXPECT_GE(order, 0.7);
}

TEST(SourceStep, ExactDecayHandValue) {
  const HeatModel m({1.0, 1.0, 1.0, 1});
  Field f(Grid1D{4, 0.0, 1.0}, 1, 1);
  for (auto& c : f.cells()) c = heat1(1.0, 0.3);
  const Field g = step_source_exact(m, f, std::log(2.0));
  for (const auto& c : g.cells()) {
    EXPECT_NEAR(c[1], 0.15, 1e-15);
    EXPECT_EQ(c[0], 1.0);
  }
  const Field inf = step_source_exact(m, f, 1e6);
  for (const auto& c : inf.cells()) EXPECT_EQ(c[1], 0.0);
}

TEST(SourceStep, ConservedBlockBitwiseUnchangedAndDecayMonotone) {
  const FluidParams p{1.0, 1.5, 0.1, 0.2, 1.0, 1.0};
  const FluidModel m(p);
  InitialCondition ic;
  ic.dissipative = "closure";
  ic.amplitude = 0.3;
  const Field f = fluid_initial_field(p, Grid1D{32, 0.0, 1.0}, ic);
  for (double dt : {1e-4, 1e-1, 10.0, 1e4}) {
    const Field g = step_source_exact(m, f, dt);
    for (std::size_t c = 0; c < f.cells().size(); ++c) {
      const auto& a = f.cells()[c];
      const auto& b = g.cells()[c];
      for (int k = 0; k < 3; ++k) EXPECT_EQ(a[k], b[k]);
      EXPECT_LE(std::abs(b[3]), std::abs(a[3]));
      EXPECT_LE(std::abs(b[4]), std::abs(a[4]));
    }
  }
}

TEST(SourceStep, NewtonFallbackForCustomDissipation) {
  const HeatParams p{1.0, 1.0, 1.0, 1};
  const auto m = heat_model(p, [](double, const Vector&) { return Matrix(Matrix::Constant(1, 1, 2.0)); });
  ASSERT_FALSE(m->relaxation_rate(heat1(1.0, 0.0)).has_value());
  Field f(Grid1D{4, 0.0, 1.0}, 1, 1);
  for (auto& c : f.cells()) c = heat1(1.0, 0.5);
  const Field g = step_source_exact(*m, f, 0.01);
  // Implicit midpoint on the linear decay ẇ = −2w is the (1,1) Padé factor.
  EXPECT_NEAR(g.at(0)[1], 0.5 * (1.0 - 0.01) / (1.0 + 0.01), 1e-14);
  EXPECT_NEAR(g.at(0)[1], 0.5 * std::exp(-0.02), 1e-6);
  for (double dt : {1.0, 100.0, 1e5}) EXPECT_LE(std::abs(step_source_exact(*m, f, dt).at(0)[1]), 0.5);
}

TEST(Strang, EquilibriumUniformFieldUnchanged) {
  const FluidModel m({1.0, 1.5, 0.1, 0.2, 1.0, 1.0});
  Field f(Grid1D{16, 0.0, 1.0}, 3, 2);
  for (auto& c : f.cells()) c = conserved_from_primitive({1.0, 0.2, 1.0, 0.0, 0.0});
  EXPECT_EQ(max_diff(f, strang_step(m, f, 0.5 / max_courant_rate(m, f))), 0.0);
}

TEST(Strang, ZeroSourceRateEqualsTransport) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  const auto m = fixtures::make_fixture("fixture:zero-dissipation", p);
  const Field f = heat_sine(p, 32, "closure");
  const double dt = 0.5 / max_courant_rate(*m, f);
  EXPECT_EQ(max_diff(strang_step(*m, f, dt), step_hyperbolic(*m, f, dt)), 0.0);
}

TEST(Strang, TemporalOrderWithSecondOrderTransport) {
  const HeatParams p{1.0, 1.0, 1.0, 1};
  const HeatModel m(p);
  const Field f = heat_sine(p, 64);
  const double t_end = 0.2;
  const int base = static_cast<int>(std::ceil(t_end * max_courant_rate(m, f) / 0.4));
  const Field ref = advance_fixed(m, f, t_end, 64 * base, TransportScheme::ssp_rk2);
  const double e1 = max_diff(advance_fixed(m, f, t_end, base, TransportScheme::ssp_rk2), ref);
  const double e2 = max_diff(advance_fixed(m, f, t_end, 2 * base, TransportScheme::ssp_rk2), ref);
  const double e4 = max_diff(advance_fixed(m, f, t_end, 4 * base, TransportScheme::ssp_rk2), ref);
  EXPECT_GE(std::log2(e1 / e2), 1.5) << e1 << " " << e2;
  EXPECT_GE(std::log2(e2 / e4), 1.5) << e2 << " " << e4;
}

TEST(Strang, StiffLimitTracksFourierClosure) {
  const HeatParams p{1.0, 1.0, 1e-4, 1};
  const int cells = 512;
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_sine(p, cells);
  sc.t_end = 0.01;
  sc.output_every = 0.01;
  const Field out = run(sc).snapshots.back();
  double worst = 0.0, scale = 0.0;
  const double dx = 1.0 / cells;
  for (int i = 0; i < cells; ++i) {
    ASSERT_TRUE(out.at(i).all_finite());
    const double theta_r = out.at((i + 1) % cells)[0], theta_l = out.at((i + cells - 1) % cells)[0];
    const double fourier = -p.lambda * (theta_r - theta_l) / (2 * dx);
    const double q = -out.at(i)[1] / p.alpha0;
    worst = std::max(worst, std::abs(q - fourier));
    scale = std::max(scale, std::abs(fourier));
  }
  EXPECT_LE(worst, 0.02 * scale);
  // The Rusanov viscosity a·dx/2 grows like α0^(-1/2), so the temperature
  // profile is compared against the perturbation size rather than absolutely.
  const auto ref = reference_diffusion_solve(p, sc.initial.component(0), Grid1D{cells, 0.0, 1.0}, 0.01);
  const auto u = out.component(0);
  double gap = 0.0, amplitude = 0.0;
  for (int i = 0; i < cells; ++i) {
    gap = std::max(gap, std::abs(u[static_cast<std::size_t>(i)] - ref[static_cast<std::size_t>(i)]));
    amplitude = std::max(amplitude, std::abs(ref[static_cast<std::size_t>(i)] - 1.0));
  }
  EXPECT_LE(gap, 0.1 * amplitude);
}

TEST(Run, RejectsInadmissibleInitialDataBeforeStepping) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_sine(p, 16);
  sc.initial.at(5) = heat1(-0.5, 0.0);
  EXPECT_THROW(run(sc), ConfigurationError);
}

TEST(Run, RejectsBadScenarioParameters) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_sine(p, 16);
  sc.cfl = 1.5;
  EXPECT_THROW(run(sc), ConfigurationError);
  sc.cfl = 0.5;
  sc.t_end = 0.0;
  EXPECT_THROW(run(sc), ConfigurationError);
}

TEST(Run, AuditGateRefusesFailingModelsUnlessOverridden) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = fixtures::make_fixture("fixture:zero-dissipation", p);
  sc.initial = heat_sine(p, 16);
  sc.t_end = 0.01;
  sc.output_every = 0.01;
  EXPECT_THROW(run(sc), AuditFailure);
  sc.override_audit = true;
  EXPECT_NO_THROW(run(sc));
}

TEST(Run, SnapshotTimesStrictlyIncreasingAndDeterministic) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_sine(p, 32);
  sc.t_end = 0.25;
  sc.output_every = 0.1;
  const Trajectory a = run(sc), b = run(sc);
  ASSERT_EQ(a.times.size(), 4u);
  for (std::size_t k = 1; k < a.times.size(); ++k) EXPECT_GT(a.times[k], a.times[k - 1]);
  EXPECT_DOUBLE_EQ(a.times[1], 0.1);
  EXPECT_EQ(a.times.back(), 0.25);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  EXPECT_EQ(max_diff(a.snapshots.back(), b.snapshots.back()), 0.0);
}

TEST(Run, HeatSineConservesEnergyToTimeOne) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_sine(p, 128);
  sc.t_end = 1.0;
  const Trajectory t = run(sc);
  EXPECT_LE(conservation_audit(t).worst(), 1e-12);
  EXPECT_TRUE(entropy_audit(t, *sc.model).passed());
}

TEST(Run, FixedStateBoundaryInflowBalancesTotals) {
  const FluidParams p{1.0, 1.5, 0.1, 0.1, 1.0, 1.0};
  InitialCondition ic;
  ic.preset = "riemann";
  ic.left = {{"rho", 1.0}, {"u", 1.0}};
  ic.right = {{"rho", 0.6}, {"u", 0.8}};
  Scenario sc;
  sc.model = fluid_model(p);
  sc.initial = fluid_initial_field(p, Grid1D{100, 0.0, 1.0}, ic);
  sc.boundary = {BoundaryKind::fixed_state, sc.initial.at(0), sc.initial.at(99)};
  sc.t_end = 0.1;
  sc.output_every = 0.1;
  const Trajectory t = run(sc);
  EXPECT_LE(conservation_audit(t).worst(), 1e-12);
  EXPECT_TRUE(entropy_audit(t, *sc.model, -1e-14, 1e-10, false).passed());
}

TEST(Run, ZeroGradientBoundaryKeepsUniformState) {
  const HeatParams p{1.0, 1.0, 0.1, 1};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = Field(Grid1D{16, 0.0, 1.0}, 1, 1);
  for (auto& c : sc.initial.cells()) c = heat1(1.5, 0.0);
  sc.boundary.kind = BoundaryKind::zero_gradient;
  sc.t_end = 0.2;
  sc.output_every = 0.2;
  EXPECT_EQ(max_diff(run(sc).snapshots.back(), sc.initial), 0.0);
}

TEST(Run, TwoDimensionalHeatIsSymmetricAndConservative) {
  const HeatParams p{1.0, 1.0, 0.2, 2};
  InitialCondition ic;
  ic.preset = "gaussian-pulse";
  ic.width = 0.1;
  const Grid1D g{24, 0.0, 1.0};
  Scenario sc;
  sc.model = heat_model(p);
  sc.initial = heat_initial_field(p, g, g, ic);
  sc.t_end = 0.05;
  sc.output_every = 0.05;
  const Trajectory t = run(sc);
  EXPECT_LE(conservation_audit(t).worst(), 1e-12);
  EXPECT_TRUE(entropy_audit(t, *sc.model).passed());
  const Field& f = t.snapshots.back();
  for (int j = 0; j < 24; ++j)
    for (int i = 0; i < 24; ++i) {
      EXPECT_NEAR(f.at(i, j)[0], f.at(j, i)[0], 1e-12);
      EXPECT_NEAR(f.at(i, j)[1], f.at(j, i)[2], 1e-12);
    }
}

TEST(Run, FluidPulseFrontBoundedBySpectralRadius) {
  const FluidParams p{1.0, 1.5, 0.1, 0.1, 0.1, 0.1};
  InitialCondition ic;
  ic.preset = "gaussian-pulse";
  ic.amplitude = 1e-3;
  ic.width = 0.02;
  const int cells = 800;
  Scenario sc;
  sc.model = fluid_model(p);
  sc.initial = fluid_initial_field(p, Grid1D{cells, 0.0, 2.0}, ic);
  for (int i = 0; i < cells; ++i) {
    // Centre the pulse in the wider domain.
    const double x = sc.initial.x_axis().center(i);
    FluidPrimitive prim;
    prim.rho = 1.0 + 1e-3 * std::exp(-0.5 * std::pow((x - 1.0) / 0.02, 2));
    sc.initial.at(i) = conserved_from_primitive(prim);
  }
  sc.t_end = 0.2;
  sc.output_every = 0.2;
  double a_max = 0.0;
  for (const auto& s : sc.initial.cells()) a_max = std::max(a_max, wave_speed(*sc.model, s, 0));
  auto front = [&](const Field& f) {
    double r = 0.0;
    for (int i = 0; i < cells; ++i) {
      if (std::abs(f.at(i)[0] - 1.0) > 1e-5) r = std::max(r, std::abs(f.x_axis().center(i) - 1.0));
    }
    return r;
  };
  const Trajectory t = run(sc);
  const double r0 = front(t.snapshots.front()), r1 = front(t.snapshots.back());
  EXPECT_GT(r1, r0);
  EXPECT_LE(r1 - r0, a_max * sc.t_end) << "front moved " << r1 - r0 << ", bound " << a_max * sc.t_end;
}
