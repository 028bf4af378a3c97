#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdf/errors.hpp"
#include "cdf/fixtures.hpp"
#include "cdf/fluid.hpp"
#include "cdf/heat.hpp"
#include "cdf/model.hpp"
#include "cdf/presets.hpp"
#include "cdf/solver.hpp"
#include "cdf/verify.hpp"

namespace cdf {

struct GridConfig {
  int cells = 256;
  double x_min = 0.0;
  double x_max = 1.0;
  std::optional<int> cells_y;  ///< set for 2D heat runs
  double y_min = 0.0;
  double y_max = 1.0;
};

struct AuditConfig {
  std::size_t samples = 1000;
  std::map<std::string, Interval> box;  ///< overrides of the model's default box, by coordinate
};

struct StudyConfig {
  std::vector<double> alpha_values;  ///< empty: model default family
  std::optional<int> cells;
  std::optional<double> t_end;
  double slope_low = 0.8;
  double slope_high = 1.5;
  double fns_tolerance = 0.05;
  double gradient_fraction = 0.1;
};

struct PowerLawSweep {
  PowerLawParams params;
  double gamma_min = 1e-3;
  double gamma_max = 1e3;
  int points = 61;
};

struct RunConfig {
  std::string command;
  std::string model;
  HeatParams heat;
  FluidParams fluid;
  GridConfig grid;
  InitialCondition initial;
  bool initial_given = false;
  BoundaryKind boundary = BoundaryKind::periodic;
  TransportScheme transport = TransportScheme::forward_euler;
  double cfl = 0.45;
  double t_end = 1.0;
  double output_every = 1.0;
  std::uint64_t seed = 20130917;
  AuditConfig audit;
  StudyConfig study;
  PowerLawSweep powerlaw;
  std::string output_dir = "out";
  std::string canonical;  ///< normalised JSON text of the input document
  std::uint64_t hash = 0;

  bool is_fluid() const { return model == "fluid"; }
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"run", "verify", "converge", "powerlaw"};
  return names;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return s;
}

namespace detail {

using Json = nlohmann::json;

inline std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline void reject_unknown(const Json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigurationError("'" + (prefix.empty() ? "<root>" : prefix) + "' must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.contains(it.key())) throw ConfigurationError("unknown key '" + join_key(prefix, it.key()) + "'");
  }
}

inline double read_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigurationError("'" + key + "' must be a number");
  return v.get<double>();
}

inline std::optional<double> opt_number(const Json& obj, const std::string& prefix, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  return read_number(obj.at(key), join_key(prefix, key));
}

inline double req_number(const Json& obj, const std::string& prefix, const std::string& key) {
  if (!obj.contains(key)) throw ConfigurationError("missing required key '" + join_key(prefix, key) + "'");
  return read_number(obj.at(key), join_key(prefix, key));
}

inline std::optional<long long> opt_integer(const Json& obj, const std::string& prefix, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigurationError("'" + join_key(prefix, key) + "' must be an integer");
  return v.get<long long>();
}

inline std::optional<std::string> opt_string(const Json& obj, const std::string& prefix, const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigurationError("'" + join_key(prefix, key) + "' must be a string");
  return v.get<std::string>();
}

inline Interval read_interval(const Json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 2) throw ConfigurationError("'" + key + "' must be a [low, high] pair");
  Interval iv{read_number(v[0], key + "[0]"), read_number(v[1], key + "[1]")};
  if (!(iv.low < iv.high)) throw ConfigurationError("'" + key + "' needs low < high");
  return iv;
}

inline std::map<std::string, double> read_value_map(const Json& v, const std::string& key,
                                                    const std::set<std::string>& allowed) {
  reject_unknown(v, key, allowed);
  std::map<std::string, double> out;
  for (auto it = v.begin(); it != v.end(); ++it) out[it.key()] = read_number(it.value(), join_key(key, it.key()));
  return out;
}

/// Runs a validator and re-labels its ParameterError with the config key.
template <class F>
void validated(const std::string& key, F&& check) {
  try {
    check();
  } catch (const ParameterError& e) {
    throw ConfigurationError("'" + key + "': " + e.what());
  }
}

inline void parse_params(const Json& doc, RunConfig& cfg) {
  if (!doc.contains("params")) throw ConfigurationError("missing required key 'params'");
  const Json& p = doc.at("params");
  if (cfg.is_fluid()) {
    reject_unknown(p, "params", {"R", "c_v", "alpha0", "alpha1", "lambda", "kappa"});
    cfg.fluid.R = req_number(p, "params", "R");
    cfg.fluid.c_v = req_number(p, "params", "c_v");
    cfg.fluid.alpha0 = req_number(p, "params", "alpha0");
    cfg.fluid.alpha1 = req_number(p, "params", "alpha1");
    cfg.fluid.lambda = req_number(p, "params", "lambda");
    cfg.fluid.kappa = req_number(p, "params", "kappa");
    validated("params", [&] { cfg.fluid.validate(); });
  } else {
    reject_unknown(p, "params", {"c_v", "lambda", "alpha0", "space_dim"});
    cfg.heat.c_v = req_number(p, "params", "c_v");
    cfg.heat.lambda = req_number(p, "params", "lambda");
    cfg.heat.alpha0 = req_number(p, "params", "alpha0");
    cfg.heat.space_dim = static_cast<int>(opt_integer(p, "params", "space_dim").value_or(1));
    validated("params", [&] { cfg.heat.validate(); });
  }
}

inline void parse_grid(const Json& doc, RunConfig& cfg) {
  if (!doc.contains("grid")) return;
  const Json& g = doc.at("grid");
  reject_unknown(g, "grid", {"cells", "domain", "cells_y", "domain_y"});
  if (auto n = opt_integer(g, "grid", "cells")) cfg.grid.cells = static_cast<int>(*n);
  if (g.contains("domain")) {
    const Interval d = read_interval(g.at("domain"), "grid.domain");
    cfg.grid.x_min = d.low;
    cfg.grid.x_max = d.high;
  }
  if (auto n = opt_integer(g, "grid", "cells_y")) cfg.grid.cells_y = static_cast<int>(*n);
  if (g.contains("domain_y")) {
    const Interval d = read_interval(g.at("domain_y"), "grid.domain_y");
    cfg.grid.y_min = d.low;
    cfg.grid.y_max = d.high;
  }
  if (cfg.grid.cells < 4) throw ConfigurationError("'grid.cells' must be >= 4");
  if (cfg.grid.cells_y && *cfg.grid.cells_y < 4) throw ConfigurationError("'grid.cells_y' must be >= 4");
}

inline void parse_initial(const Json& doc, RunConfig& cfg) {
  if (!doc.contains("initial")) return;
  const Json& i = doc.at("initial");
  reject_unknown(i, "initial", {"preset", "amplitude", "position", "width", "base", "left", "right", "dissipative"});
  cfg.initial_given = true;
  InitialCondition& ic = cfg.initial;
  if (auto s = opt_string(i, "initial", "preset")) ic.preset = *s;
  if (auto v = opt_number(i, "initial", "amplitude")) ic.amplitude = *v;
  if (auto v = opt_number(i, "initial", "position")) ic.position = *v;
  if (auto v = opt_number(i, "initial", "width")) ic.width = *v;
  if (auto s = opt_string(i, "initial", "dissipative")) ic.dissipative = *s;
  const std::set<std::string> keys = cfg.is_fluid() ? std::set<std::string>{"rho", "v", "u"} : std::set<std::string>{"u"};
  if (i.contains("base")) ic.base = read_value_map(i.at("base"), "initial.base", keys);
  if (i.contains("left")) ic.left = read_value_map(i.at("left"), "initial.left", keys);
  if (i.contains("right")) ic.right = read_value_map(i.at("right"), "initial.right", keys);
  if (!std::isfinite(ic.amplitude)) throw ConfigurationError("'initial.amplitude' must be finite");
  if (ic.preset == "gaussian-pulse" && !(ic.width > 0.0)) throw ConfigurationError("'initial.width' must be > 0");
  if (ic.preset != "sine" && ic.preset != "gaussian-pulse" && ic.preset != "riemann" && ic.preset != "uniform") {
    throw ConfigurationError("'initial.preset' must be one of sine, gaussian-pulse, riemann, uniform");
  }
  if (ic.dissipative != "zero" && ic.dissipative != "closure") {
    throw ConfigurationError("'initial.dissipative' must be 'zero' or 'closure'");
  }
}

inline void parse_audit(const Json& doc, RunConfig& cfg, const std::vector<std::string>& coordinates) {
  if (!doc.contains("audit")) return;
  const Json& a = doc.at("audit");
  reject_unknown(a, "audit", {"samples", "box"});
  if (auto n = opt_integer(a, "audit", "samples")) {
    if (*n < 1) throw ConfigurationError("'audit.samples' must be >= 1");
    cfg.audit.samples = static_cast<std::size_t>(*n);
  }
  if (a.contains("box")) {
    const Json& b = a.at("box");
    reject_unknown(b, "audit.box", std::set<std::string>(coordinates.begin(), coordinates.end()));
    for (auto it = b.begin(); it != b.end(); ++it) {
      cfg.audit.box[it.key()] = read_interval(it.value(), "audit.box." + it.key());
    }
  }
}

inline void parse_study(const Json& doc, RunConfig& cfg) {
  if (!doc.contains("study")) return;
  const Json& s = doc.at("study");
  reject_unknown(s, "study", {"alpha_values", "cells", "t_end", "slope_band", "fns_tolerance", "gradient_fraction"});
  StudyConfig& st = cfg.study;
  if (s.contains("alpha_values")) {
    const Json& v = s.at("alpha_values");
    if (!v.is_array()) throw ConfigurationError("'study.alpha_values' must be an array of numbers");
    for (std::size_t k = 0; k < v.size(); ++k) {
      const double a = read_number(v[k], "study.alpha_values[" + std::to_string(k) + "]");
      if (!(a > 0.0)) throw ConfigurationError("'study.alpha_values' entries must be > 0");
      st.alpha_values.push_back(a);
    }
    if (st.alpha_values.size() < 3) throw ConfigurationError("'study.alpha_values' needs at least 3 entries");
  }
  if (auto n = opt_integer(s, "study", "cells")) {
    if (*n < 4) throw ConfigurationError("'study.cells' must be >= 4");
    st.cells = static_cast<int>(*n);
  }
  if (auto t = opt_number(s, "study", "t_end")) {
    if (!(*t > 0.0)) throw ConfigurationError("'study.t_end' must be > 0");
    st.t_end = *t;
  }
  if (s.contains("slope_band")) {
    const Interval b = read_interval(s.at("slope_band"), "study.slope_band");
    st.slope_low = b.low;
    st.slope_high = b.high;
  }
  if (auto v = opt_number(s, "study", "fns_tolerance")) {
    if (!(*v > 0.0)) throw ConfigurationError("'study.fns_tolerance' must be > 0");
    st.fns_tolerance = *v;
  }
  if (auto v = opt_number(s, "study", "gradient_fraction")) {
    if (!(*v >= 0.0 && *v < 1.0)) throw ConfigurationError("'study.gradient_fraction' must be in [0, 1)");
    st.gradient_fraction = *v;
  }
}

inline void parse_powerlaw(const Json& doc, RunConfig& cfg) {
  if (!doc.contains("powerlaw")) throw ConfigurationError("missing required key 'powerlaw'");
  const Json& p = doc.at("powerlaw");
  reject_unknown(p, "powerlaw", {"mu0", "alpha", "gamma_range", "points"});
  PowerLawSweep& sw = cfg.powerlaw;
  sw.params.mu0 = req_number(p, "powerlaw", "mu0");
  sw.params.alpha = req_number(p, "powerlaw", "alpha");
  validated("powerlaw", [&] { sw.params.validate(); });
  if (p.contains("gamma_range")) {
    const Interval r = read_interval(p.at("gamma_range"), "powerlaw.gamma_range");
    if (!(r.low > 0.0)) throw ConfigurationError("'powerlaw.gamma_range' must be positive");
    sw.gamma_min = r.low;
    sw.gamma_max = r.high;
  }
  if (auto n = opt_integer(p, "powerlaw", "points")) {
    if (*n < 3) throw ConfigurationError("'powerlaw.points' must be >= 3");
    sw.points = static_cast<int>(*n);
  }
}

}  // namespace detail

/// Builds the model named by the config (heat, fluid or a heat test fixture).
inline ModelPtr make_model(const RunConfig& cfg) {
  if (cfg.model == "fluid") return fluid_model(cfg.fluid);
  if (cfg.model == "heat") return heat_model(cfg.heat);
  return fixtures::make_fixture(cfg.model, cfg.heat);
}

/// Parses and validates a JSON config. `command` (when given) must agree with
/// the document's own "command" key if that is present.
inline RunConfig parse_config(const std::string& text, const std::optional<std::string>& command = std::nullopt) {
  using detail::Json;
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigurationError(std::string("malformed config: ") + e.what());
  }
  detail::reject_unknown(doc, "", {"command", "model", "params", "grid", "initial", "boundary", "cfl", "t_end",
                                   "output_every", "seed", "audit", "study", "powerlaw", "output", "transport"});
  RunConfig cfg;
  cfg.canonical = doc.dump();
  cfg.hash = fnv1a(cfg.canonical);

  const auto doc_command = detail::opt_string(doc, "", "command");
  if (command && doc_command && *command != *doc_command) {
    throw ConfigurationError("'command' is '" + *doc_command + "' but '" + *command + "' was requested");
  }
  cfg.command = command ? *command : doc_command.value_or("");
  bool known = false;
  for (const auto& c : command_names()) known = known || c == cfg.command;
  if (!known) throw ConfigurationError("'command' must be one of run, verify, converge, powerlaw");
  if (auto out = detail::opt_string(doc, "", "output")) cfg.output_dir = *out;

  if (cfg.command == "powerlaw") {
    for (const char* k : {"model", "params", "grid", "initial", "boundary", "cfl", "t_end", "output_every", "audit",
                          "study", "transport"}) {
      if (doc.contains(k)) throw ConfigurationError(std::string("unknown key '") + k + "' for the powerlaw command");
    }
    detail::parse_powerlaw(doc, cfg);
    if (auto s = detail::opt_integer(doc, "", "seed")) cfg.seed = static_cast<std::uint64_t>(*s);
    return cfg;
  }
  if (doc.contains("powerlaw")) throw ConfigurationError("unknown key 'powerlaw' outside the powerlaw command");

  cfg.model = detail::opt_string(doc, "", "model").value_or("");
  if (cfg.model.empty()) throw ConfigurationError("missing required key 'model'");
  const auto& fx = fixtures::fixture_names();
  const bool is_fixture = std::find(fx.begin(), fx.end(), cfg.model) != fx.end();
  if (cfg.model != "heat" && cfg.model != "fluid" && !is_fixture) {
    throw ConfigurationError("'model' must be heat, fluid or a fixture:<name>");
  }
  detail::parse_params(doc, cfg);
  detail::parse_grid(doc, cfg);
  detail::parse_initial(doc, cfg);

  if (auto b = detail::opt_string(doc, "", "boundary")) {
    if (*b == "periodic") cfg.boundary = BoundaryKind::periodic;
    else if (*b == "zero-gradient") cfg.boundary = BoundaryKind::zero_gradient;
    else if (*b == "fixed-state") cfg.boundary = BoundaryKind::fixed_state;
    else throw ConfigurationError("'boundary' must be periodic, zero-gradient or fixed-state");
  }
  if (auto tr = detail::opt_string(doc, "", "transport")) {
    if (*tr == "forward-euler") cfg.transport = TransportScheme::forward_euler;
    else if (*tr == "ssp-rk2") cfg.transport = TransportScheme::ssp_rk2;
    else throw ConfigurationError("'transport' must be forward-euler or ssp-rk2");
  }
  if (auto v = detail::opt_number(doc, "", "cfl")) cfg.cfl = *v;
  if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) throw ConfigurationError("'cfl' must satisfy cfl ∈ (0,1)");
  if (auto v = detail::opt_number(doc, "", "t_end")) cfg.t_end = *v;
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) throw ConfigurationError("'t_end' must be > 0");
  cfg.output_every = detail::opt_number(doc, "", "output_every").value_or(cfg.t_end);
  if (!(cfg.output_every > 0.0)) throw ConfigurationError("'output_every' must be > 0");
  if (auto s = detail::opt_integer(doc, "", "seed")) {
    if (*s < 0) throw ConfigurationError("'seed' must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*s);
  }

  const bool two_d = !cfg.is_fluid() && cfg.heat.space_dim == 2;
  if (cfg.grid.cells_y && !two_d) throw ConfigurationError("'grid.cells_y' needs params.space_dim = 2");
  if (two_d && !cfg.grid.cells_y) cfg.grid.cells_y = cfg.grid.cells;
  if (two_d && cfg.boundary == BoundaryKind::fixed_state) {
    throw ConfigurationError("'boundary' fixed-state is available in 1D only");
  }
  if (two_d && cfg.command == "converge") throw ConfigurationError("'params.space_dim' must be 1 for converge");

  const ModelPtr model = make_model(cfg);
  detail::parse_audit(doc, cfg, model->coordinate_names());
  detail::parse_study(doc, cfg);
  return cfg;
}

}  // namespace cdf
