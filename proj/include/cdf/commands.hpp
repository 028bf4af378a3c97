#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdf/config.hpp"
#include "cdf/diagnostics.hpp"
#include "cdf/errors.hpp"
#include "cdf/fluid.hpp"
#include "cdf/solver.hpp"
#include "cdf/verify.hpp"

namespace cdf {

enum ExitCode : int { kPass = 0, kScientificFailure = 1, kConfigurationError = 2 };

struct CommandOptions {
  std::filesystem::path out_dir = "out";
  bool override_audit = false;
  std::size_t threads = 1;
  std::ostream* log = nullptr;  ///< one-line progress messages; null silences them
};

/// Parallelism cap from CDF_LAB_THREADS; falls back to the hardware count.
inline std::size_t threads_from_env(const char* value) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  if (value == nullptr || *value == '\0') return hw;
  char* end = nullptr;
  const long n = std::strtol(value, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigurationError("CDF_LAB_THREADS must be a positive integer");
  return static_cast<std::size_t>(n);
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV table with a metadata comment line and a header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const RunConfig& cfg, const std::vector<std::string>& columns)
      : out_(path) {
    if (!out_) throw ConfigurationError("cannot write " + path.string());
    out_ << "# cdf-lab config_hash=" << hex64(cfg.hash) << " command=" << cfg.command << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

inline nlohmann::json vector_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline nlohmann::json to_json(const AuditReport& report, const CdfModel& model) {
  nlohmann::json doc;
  doc["model"] = report.model;
  doc["passed"] = report.passed();
  doc["seed"] = report.seed;
  doc["samples_used"] = report.samples_used;
  doc["tolerances"] = report.tolerances;
  nlohmann::json box = nlohmann::json::object();
  for (std::size_t i = 0; i < report.coordinates.size() && i < report.box.size(); ++i) {
    box[report.coordinates[i]] = {report.box[i].low, report.box[i].high};
  }
  doc["box"] = box;
  doc["conditions"] = nlohmann::json::array();
  for (const auto& c : report.conditions) {
    nlohmann::json j{{"name", c.name},
                     {"passed", c.passed},
                     {"worst_violation", c.worst_violation},
                     {"extreme", c.extreme},
                     {"tolerance", c.tolerance}};
    if (c.witness) {
      j["witness"] = {{"state", vector_json(c.witness->data())},
                      {"components", model.component_names()},
                      {"coordinates", vector_json(model.to_coordinates(*c.witness))}};
    }
    doc["conditions"].push_back(j);
  }
  return doc;
}

/// Sampling plan of the config: the model's default box with per-coordinate overrides.
inline SamplingPlan sampling_plan(const RunConfig& cfg, const CdfModel& model) {
  SamplingPlan plan = default_plan(model, cfg.audit.samples, cfg.seed);
  const auto names = model.coordinate_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = cfg.audit.box.find(names[i]);
    if (it != cfg.audit.box.end()) plan.box[i] = it->second;
  }
  return plan;
}

inline Grid1D x_grid(const RunConfig& cfg, int cells) { return Grid1D{cells, cfg.grid.x_min, cfg.grid.x_max}; }

/// Scenario described by a run config.
inline Scenario build_scenario(const RunConfig& cfg, bool override_audit = false) {
  Scenario sc;
  sc.name = cfg.model;
  sc.model = make_model(cfg);
  const Grid1D gx = x_grid(cfg, cfg.grid.cells);
  if (cfg.is_fluid()) {
    sc.initial = fluid_initial_field(cfg.fluid, gx, cfg.initial);
  } else {
    std::optional<Grid1D> gy;
    if (cfg.grid.cells_y) gy = Grid1D{*cfg.grid.cells_y, cfg.grid.y_min, cfg.grid.y_max};
    sc.initial = heat_initial_field(cfg.heat, gx, gy, cfg.initial);
  }
  sc.boundary.kind = cfg.boundary;
  if (cfg.boundary == BoundaryKind::fixed_state) {
    sc.boundary.left = sc.initial.at(0);
    sc.boundary.right = sc.initial.at(sc.initial.nx() - 1);
  }
  sc.cfl = cfg.cfl;
  sc.t_end = cfg.t_end;
  sc.output_every = cfg.output_every;
  sc.override_audit = override_audit;
  sc.transport = cfg.transport;
  return sc;
}

namespace detail {

inline void note(const CommandOptions& opt, const std::string& line) {
  if (opt.log) *opt.log << line << "\n";
}

inline void prepare_out(const CommandOptions& opt) {
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) throw ConfigurationError("cannot create output directory " + opt.out_dir.string() + ": " + ec.message());
}

inline void write_snapshot(const std::filesystem::path& path, const RunConfig& cfg, const CdfModel& model,
                           const Field& field) {
  std::vector<std::string> cols{"x"};
  if (field.dim() == 2) cols.push_back("y");
  for (const auto& c : model.component_names()) cols.push_back(c);
  for (const auto& c : model.derived_names()) cols.push_back(c);
  CsvWriter csv(path, cfg, cols);
  for (int j = 0; j < field.ny(); ++j) {
    for (int i = 0; i < field.nx(); ++i) {
      const StateVector& s = field.at(i, j);
      std::vector<double> row{field.x_axis().center(i)};
      if (field.dim() == 2) row.push_back(field.y_axis()->center(j));
      for (int k = 0; k < s.size(); ++k) row.push_back(s[k]);
      const Vector d = model.derived(s);
      for (Eigen::Index k = 0; k < d.size(); ++k) row.push_back(d(k));
      csv.row(row);
    }
  }
}

}  // namespace detail

inline int cmd_verify(const RunConfig& cfg, const CommandOptions& opt) {
  const ModelPtr model = make_model(cfg);
  const AuditReport report = run_full_audit(*model, sampling_plan(cfg, *model));
  detail::prepare_out(opt);
  write_json(opt.out_dir / "audit.json", to_json(report, *model));
  for (const auto& c : report.conditions) {
    detail::note(opt, c.name + ": " + (c.passed ? "pass" : "FAIL") + " (worst violation " +
                          format_double(c.worst_violation) + ")");
  }
  return report.passed() ? kPass : kScientificFailure;
}

inline int cmd_run(const RunConfig& cfg, const CommandOptions& opt) {
  const Scenario sc = build_scenario(cfg, opt.override_audit);
  const Trajectory traj = run(sc);
  detail::prepare_out(opt);
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(4) << std::setfill('0') << k << ".csv";
    detail::write_snapshot(opt.out_dir / name.str(), cfg, *sc.model, traj.snapshots[k]);
  }
  {
    std::ofstream lines(opt.out_dir / "diagnostics.jsonl");
    if (!lines) throw ConfigurationError("cannot write diagnostics.jsonl");
    for (const auto& r : traj.steps) {
      nlohmann::json j{{"step", r.step},           {"time", r.time},           {"dt", r.dt},
                       {"totals", vector_json(r.totals)}, {"entropy", r.entropy}, {"sigma_min", r.sigma_min},
                       {"sigma_max", r.sigma_max}};
      lines << j.dump() << "\n";
    }
  }
  const ConservationAudit cons = conservation_audit(traj);
  const bool closed = cfg.boundary == BoundaryKind::periodic;
  const EntropyAudit ent = entropy_audit(traj, *sc.model, -1e-14, 1e-10, closed);
  const bool cons_ok = cons.worst() <= 1e-12;
  nlohmann::json summary{{"model", sc.model->name()},
                         {"steps", traj.steps.size() - 1},
                         {"snapshots", traj.snapshots.size()},
                         {"snapshot_times", traj.times},
                         {"config_hash", hex64(cfg.hash)},
                         {"conservation", {{"max_relative_drift", vector_json(cons.max_relative_drift)},
                                           {"boundary", cfg.boundary == BoundaryKind::periodic ? "periodic" : "open"},
                                           {"passed", cons_ok}}},
                         {"entropy",
                          {{"sigma_violations", ent.sigma_violations.size()},
                           {"monotonicity_checked", closed},
                           {"monotonicity_violations", ent.monotonicity_violations.size()},
                           {"max_relative_decrease", ent.max_relative_decrease},
                           {"initial", traj.steps.front().entropy},
                           {"final", traj.steps.back().entropy},
                           {"passed", ent.passed()}}}};
  const bool ok = cons_ok && ent.passed();
  summary["passed"] = ok;
  write_json(opt.out_dir / "summary.json", summary);
  detail::note(opt, "steps: " + std::to_string(traj.steps.size() - 1) + ", conservation drift " +
                        format_double(cons.worst()) + ", entropy audit " + (ent.passed() ? "pass" : "FAIL"));
  return ok ? kPass : kScientificFailure;
}

inline int cmd_converge(const RunConfig& cfg, const CommandOptions& opt) {
  detail::prepare_out(opt);
  const StudyConfig& st = cfg.study;
  if (cfg.is_fluid()) {
    FluidLimitStudyConfig fc;
    fc.base = cfg.fluid;
    if (!st.alpha_values.empty()) fc.alpha_values = st.alpha_values;
    fc.grid = x_grid(cfg, st.cells.value_or(fc.grid.n_cells));
    if (st.t_end) fc.t_end = *st.t_end;
    if (cfg.initial_given) fc.initial = cfg.initial;
    fc.cfl = cfg.cfl;
    fc.fraction = st.gradient_fraction;
    fc.threads = opt.threads;
    const FluidLimitStudy study = fluid_relaxation_study(fc);
    CsvWriter csv(opt.out_dir / "study.csv", cfg, {"alpha", "q_deviation", "tau_deviation", "cells_q", "cells_tau"});
    std::size_t smallest = 0;
    for (std::size_t i = 0; i < study.parameters.size(); ++i) {
      const auto& c = study.comparisons[i];
      csv.row({study.parameters[i], c.max_relative_q, c.max_relative_tau, static_cast<double>(c.cells_q),
               static_cast<double>(c.cells_tau)});
      if (study.parameters[i] < study.parameters[smallest]) smallest = i;
    }
    const auto& best = study.comparisons[smallest];
    const double deviation = std::max(best.max_relative_q, best.max_relative_tau);
    const bool ok = deviation <= st.fns_tolerance;
    write_json(opt.out_dir / "study.json", {{"model", "fluid"},
                                             {"smallest_alpha", study.parameters[smallest]},
                                             {"q_deviation", best.max_relative_q},
                                             {"tau_deviation", best.max_relative_tau},
                                             {"tolerance", st.fns_tolerance},
                                             {"passed", ok}});
    detail::note(opt, "FNS deviation at alpha=" + format_double(study.parameters[smallest]) + ": " +
                          format_double(deviation));
    return ok ? kPass : kScientificFailure;
  }
  if (cfg.model != "heat") throw ConfigurationError("'model' must be heat or fluid for converge");
  RelaxationStudyConfig rc;
  rc.base = cfg.heat;
  if (!st.alpha_values.empty()) rc.alpha0_values = st.alpha_values;
  rc.grid = x_grid(cfg, st.cells.value_or(rc.grid.n_cells));
  if (st.t_end) rc.t_end = *st.t_end;
  if (cfg.initial_given) rc.initial = cfg.initial;
  rc.cfl = cfg.cfl;
  rc.threads = opt.threads;
  const ConvergenceStudy study = relaxation_convergence(rc);
  CsvWriter csv(opt.out_dir / "study.csv", cfg, {"alpha0", "L1", "L2", "Linf"});
  for (std::size_t i = 0; i < study.parameters.size(); ++i) {
    csv.row({study.parameters[i], study.errors[i].l1, study.errors[i].l2, study.errors[i].linf});
  }
  const bool ok = study.slope >= st.slope_low && study.slope <= st.slope_high;
  write_json(opt.out_dir / "study.json", {{"model", "heat"},
                                           {"slope", study.slope},
                                           {"slope_band", {st.slope_low, st.slope_high}},
                                           {"monotone", study.monotone},
                                           {"inconclusive", study.inconclusive},
                                           {"passed", ok}});
  detail::note(opt, "fitted slope " + format_double(study.slope) + (study.inconclusive ? " (inconclusive)" : ""));
  return ok ? kPass : kScientificFailure;
}

inline int cmd_powerlaw(const RunConfig& cfg, const CommandOptions& opt) {
  detail::prepare_out(opt);
  const PowerLawSweep& sw = cfg.powerlaw;
  CsvWriter csv(opt.out_dir / "powerlaw.csv", cfg, {"gamma_dot", "tau_closed_form", "tau_fixed_point", "relative_gap"});
  std::vector<double> gammas, magnitudes;
  double max_gap = 0.0;
  const double lmin = std::log(sw.gamma_min), lmax = std::log(sw.gamma_max);
  for (int k = 0; k < sw.points; ++k) {
    const double g = std::exp(lmin + (lmax - lmin) * k / (sw.points - 1));
    const double closed = powerlaw_stress(sw.params, g);
    const double fixed = powerlaw_stress_fixed_point(sw.params, g);
    const double gap = closed == fixed ? 0.0 : std::abs(closed - fixed) / std::abs(closed);
    max_gap = std::max(max_gap, gap);
    csv.row({g, closed, fixed, gap});
    gammas.push_back(g);
    magnitudes.push_back(std::abs(closed));
  }
  const double slope = fit_loglog_slope(gammas, magnitudes);
  const bool ok = max_gap <= 1e-8;
  write_json(opt.out_dir / "powerlaw.json", {{"mu0", sw.params.mu0},
                                              {"alpha", sw.params.alpha},
                                              {"index", sw.params.index()},
                                              {"fitted_slope", slope},
                                              {"max_relative_gap", max_gap},
                                              {"passed", ok}});
  detail::note(opt, "max relative gap " + format_double(max_gap) + ", fitted index " + format_double(slope));
  return ok ? kPass : kScientificFailure;
}

/// Dispatches a parsed config to its command.
inline int run_command(const RunConfig& cfg, const CommandOptions& opt) {
  if (cfg.command == "verify") return cmd_verify(cfg, opt);
  if (cfg.command == "run") return cmd_run(cfg, opt);
  if (cfg.command == "converge") return cmd_converge(cfg, opt);
  if (cfg.command == "powerlaw") return cmd_powerlaw(cfg, opt);
  throw ConfigurationError("unknown command '" + cfg.command + "'");
}

/// Full command pipeline with the exit-status contract: 0 pass, 1 scientific
/// failure, 2 configuration error. Errors are reported on `err`.
inline int execute(const std::string& command, const std::string& config_text, CommandOptions opt,
                   std::ostream& err) {
  try {
    const RunConfig cfg = parse_config(config_text, command);
    return run_command(cfg, opt);
  } catch (const ConfigurationError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigurationError;
  } catch (const ParameterError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kConfigurationError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kScientificFailure;
  }
}

}  // namespace cdf
