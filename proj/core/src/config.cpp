#include "safex/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace safex {

namespace {

using nlohmann::json;

std::string method_kind_name(MethodSpec::Kind k) {
  switch (k) {
    case MethodSpec::Kind::ise:
      return "ise";
    case MethodSpec::Kind::stageopt:
      return "stageopt";
    case MethodSpec::Kind::heuristic:
      return "heuristic";
    case MethodSpec::Kind::uncertainty:
      return "uncertainty";
  }
  return "unknown";
}

EnvironmentKind parse_env_kind(const std::string& s) {
  if (s == "gp_sample") return EnvironmentKind::gp_sample;
  if (s == "exponential") return EnvironmentKind::exponential;
  if (s == "bump5") return EnvironmentKind::bump5;
  if (s == "heteroskedastic") return EnvironmentKind::heteroskedastic;
  if (s == "pendulum") return EnvironmentKind::pendulum;
  if (s == "cartpole") return EnvironmentKind::cartpole;
  throw ConfigError("unknown environment kind '" + s + "'");
}

Point to_point(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty array");
  Point p(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(std::string(what) + " must contain numbers");
    p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return p;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(std::string("unknown field '") + it.key() + "' in " + where);
  }
}

MethodSpec parse_method_object(const json& j) {
  if (j.is_string()) return parse_method(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("method must be a string or an object");
  check_keys(j, {"kind", "line", "L", "lines", "line_points", "label"}, "method");
  MethodSpec m = parse_method(get_or<std::string>(j, "kind", "ise"));
  m.line = get_or<bool>(j, "line", m.line);
  m.L = get_or<double>(j, "L", m.L);
  m.lines = get_count(j, "lines", m.lines);
  m.line_points = get_count(j, "line_points", m.line_points);
  m.label = get_or<std::string>(j, "label", default_label(m));
  return m;
}

void parse_pendulum(const json& j, PendulumParams& p) {
  check_keys(j,
             {"gravity", "mass", "length", "dt", "max_torque", "max_speed", "theta0", "omega0",
              "steps", "omega_threshold", "absolute"},
             "pendulum");
  p.gravity = get_or(j, "gravity", p.gravity);
  p.mass = get_or(j, "mass", p.mass);
  p.length = get_or(j, "length", p.length);
  p.dt = get_or(j, "dt", p.dt);
  p.max_torque = get_or(j, "max_torque", p.max_torque);
  p.max_speed = get_or(j, "max_speed", p.max_speed);
  p.theta0 = get_or(j, "theta0", p.theta0);
  p.omega0 = get_or(j, "omega0", p.omega0);
  p.steps = get_count(j, "steps", p.steps);
  p.omega_threshold = get_or(j, "omega_threshold", p.omega_threshold);
  p.absolute = get_or(j, "absolute", p.absolute);
}

void parse_cartpole(const json& j, CartPoleParams& p) {
  check_keys(j,
             {"gravity", "cart_mass", "pole_mass", "half_length", "dt", "force_scale", "theta0",
              "steps", "theta_threshold", "absolute", "fallen_angle"},
             "cartpole");
  p.gravity = get_or(j, "gravity", p.gravity);
  p.cart_mass = get_or(j, "cart_mass", p.cart_mass);
  p.pole_mass = get_or(j, "pole_mass", p.pole_mass);
  p.half_length = get_or(j, "half_length", p.half_length);
  p.dt = get_or(j, "dt", p.dt);
  p.force_scale = get_or(j, "force_scale", p.force_scale);
  p.theta0 = get_or(j, "theta0", p.theta0);
  p.steps = get_count(j, "steps", p.steps);
  p.theta_threshold = get_or(j, "theta_threshold", p.theta_threshold);
  p.absolute = get_or(j, "absolute", p.absolute);
  p.fallen_angle = get_or(j, "fallen_angle", p.fallen_angle);
}

void parse_optimizer(const json& j, OptimizerSettings& o) {
  check_keys(j,
             {"restarts", "rejection_draws", "uniform_z_candidates", "max_iterations",
              "max_halvings", "armijo", "analytic_gradient", "fd_step"},
             "optimizer");
  o.restarts = get_count(j, "restarts", o.restarts);
  o.rejection_draws = get_count(j, "rejection_draws", o.rejection_draws);
  o.uniform_z_candidates = get_count(j, "uniform_z_candidates", o.uniform_z_candidates);
  o.max_iterations = get_count(j, "max_iterations", o.max_iterations);
  o.max_halvings = get_count(j, "max_halvings", o.max_halvings);
  o.armijo = get_or(j, "armijo", o.armijo);
  o.analytic_gradient = get_or(j, "analytic_gradient", o.analytic_gradient);
  o.fd_step = get_or(j, "fd_step", o.fd_step);
}

}  // namespace

std::string to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::gp_sample:
      return "gp_sample";
    case EnvironmentKind::exponential:
      return "exponential";
    case EnvironmentKind::bump5:
      return "bump5";
    case EnvironmentKind::heteroskedastic:
      return "heteroskedastic";
    case EnvironmentKind::pendulum:
      return "pendulum";
    case EnvironmentKind::cartpole:
      return "cartpole";
  }
  return "unknown";
}

std::string default_label(const MethodSpec& m) {
  std::string s = (m.line ? "line-" : "") + method_kind_name(m.kind);
  if (m.kind == MethodSpec::Kind::stageopt) s += "(L=" + format_double(m.L) + ")";
  return s;
}

MethodSpec parse_method(const std::string& text) {
  MethodSpec m;
  std::string body = text;
  if (body.rfind("line-", 0) == 0) {
    m.line = true;
    body = body.substr(5);
  }
  std::string kind = body;
  std::string arg;
  if (const auto colon = body.find(':'); colon != std::string::npos) {
    kind = body.substr(0, colon);
    arg = body.substr(colon + 1);
  }
  if (kind == "ise") {
    m.kind = MethodSpec::Kind::ise;
  } else if (kind == "stageopt") {
    m.kind = MethodSpec::Kind::stageopt;
  } else if (kind == "heuristic") {
    m.kind = MethodSpec::Kind::heuristic;
  } else if (kind == "uncertainty") {
    m.kind = MethodSpec::Kind::uncertainty;
  } else {
    throw ConfigError("unknown method '" + text + "'");
  }
  if (!arg.empty()) {
    if (m.kind != MethodSpec::Kind::stageopt) {
      throw ConfigError("only stageopt takes an argument: '" + text + "'");
    }
    try {
      std::size_t used = 0;
      m.L = std::stod(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw ConfigError("invalid Lipschitz constant in '" + text + "'");
    }
  }
  m.label = default_label(m);
  return m;
}

ExperimentConfig default_config(EnvironmentKind kind, std::size_t dimension) {
  ExperimentConfig c;
  EnvironmentSpec& e = c.environment;
  e.kind = kind;
  std::size_t d = dimension;
  double lengthscale = 1.0;
  switch (kind) {
    case EnvironmentKind::gp_sample:
      d = d ? d : 2;
      e.domain = Box::cube(d, -2.5, 2.5);
      e.seed_point = Point::Zero(static_cast<Eigen::Index>(d));
      e.noise_variance = 0.05;
      lengthscale = 0.1;
      c.gp.outputscale = 150.0;
      c.iterations = 100;
      c.baseline_grid = 701;
      break;
    case EnvironmentKind::exponential:
      d = 1;
      e.domain = Box::cube(1, -5.0, 5.0);
      e.seed_point = Point::Zero(1);
      e.noise_variance = 0.05;
      lengthscale = 1.2;
      c.gp.outputscale = 100.0;
      c.baseline_grid = 501;
      c.coverage.grid = 1000;
      break;
    case EnvironmentKind::bump5:
      d = d ? d : 5;
      e.domain = Box::cube(d, -7.0, 7.0);
      e.seed_point = Point::Constant(static_cast<Eigen::Index>(d), -0.2);
      e.noise_variance = 0.5;
      lengthscale = 1.6;
      c.gp.outputscale = 1.0;
      c.iterations = 100;
      break;
    case EnvironmentKind::heteroskedastic:
      d = d ? d : 9;
      e.domain = Box::cube(d, -7.0, 7.0);
      e.seed_point = Point::Zero(static_cast<Eigen::Index>(d));
      e.noise_variance = 0.05;
      e.noise_variance_below = 0.5;
      lengthscale = 1.6;
      c.gp.outputscale = 1.0;
      c.iterations = 100;
      break;
    case EnvironmentKind::pendulum: {
      d = 2;
      Point lo(2), hi(2), s(2);
      lo << -12.0, -6.0;
      hi << 0.0, 0.0;
      s << -8.0, -3.0;
      e.domain = Box(lo, hi);
      e.seed_point = s;
      e.noise_variance = 0.04;
      lengthscale = 1.3;
      c.gp.outputscale = 6.6;
      break;
    }
    case EnvironmentKind::cartpole: {
      d = 3;
      Point lo(3), hi(3), s(3);
      lo << 0.0, -1.0, -2.0;
      hi << 6.0, 3.0, 2.0;
      s << 3.0, 1.0, 0.5;
      e.domain = Box(lo, hi);
      e.seed_point = s;
      e.noise_variance = 0.05;
      lengthscale = 0.8;
      c.gp.outputscale = 5.0;
      c.baseline_grid = 41;
      break;
    }
  }
  c.name = to_string(kind);
  c.gp.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), lengthscale);
  c.methods = {parse_method("ise")};
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j,
             {"schema_version", "name", "environment", "gp", "method", "methods", "iterations",
              "beta", "optimizer", "baseline_grid", "coverage", "seed", "replications",
              "regret_probe_period", "record_timing"},
             "config");
  const int version = get_or<int>(j, "schema_version", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version));
  }
  if (!j.contains("environment") || !j["environment"].is_object()) {
    throw ConfigError("missing 'environment' object");
  }
  const json& je = j["environment"];
  check_keys(je,
             {"kind", "dimension", "lower", "upper", "seed_point", "noise_variance",
              "noise_variance_below", "sample_grid", "pendulum", "cartpole"},
             "environment");
  if (!je.contains("kind")) throw ConfigError("environment.kind is required");
  const EnvironmentKind kind = parse_env_kind(get_or<std::string>(je, "kind", ""));
  ExperimentConfig c = default_config(kind, get_count(je, "dimension", 0));
  EnvironmentSpec& e = c.environment;
  if (je.contains("lower") || je.contains("upper")) {
    if (!je.contains("lower") || !je.contains("upper")) {
      throw ConfigError("environment.lower and environment.upper go together");
    }
    try {
      e.domain = Box(to_point(je["lower"], "environment.lower"),
                     to_point(je["upper"], "environment.upper"));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
  }
  if (je.contains("seed_point")) e.seed_point = to_point(je["seed_point"], "environment.seed_point");
  e.noise_variance = get_or(je, "noise_variance", e.noise_variance);
  e.noise_variance_below = get_or(je, "noise_variance_below", e.noise_variance_below);
  e.sample_grid = get_count(je, "sample_grid", e.sample_grid);
  if (je.contains("pendulum")) parse_pendulum(je["pendulum"], e.pendulum);
  if (je.contains("cartpole")) parse_cartpole(je["cartpole"], e.cartpole);

  c.name = get_or<std::string>(j, "name", c.name);
  if (j.contains("gp")) {
    const json& jg = j["gp"];
    check_keys(jg, {"lengthscale", "outputscale"}, "gp");
    if (jg.contains("lengthscale")) {
      const json& l = jg["lengthscale"];
      if (l.is_number()) {
        c.gp.lengthscales = Eigen::VectorXd::Constant(
            static_cast<Eigen::Index>(e.domain.dim()), l.get<double>());
      } else {
        c.gp.lengthscales = to_point(l, "gp.lengthscale");
      }
    }
    c.gp.outputscale = get_or(jg, "outputscale", c.gp.outputscale);
  }
  if (static_cast<std::size_t>(c.gp.lengthscales.size()) != e.domain.dim()) {
    c.gp.lengthscales = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(e.domain.dim()),
                                                  c.gp.lengthscales[0]);
  }
  if (j.contains("method") && j.contains("methods")) {
    throw ConfigError("use either 'method' or 'methods'");
  }
  if (j.contains("method")) c.methods = {parse_method_object(j["method"])};
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw ConfigError("'methods' must be an array");
    c.methods.clear();
    for (const auto& m : j["methods"]) c.methods.push_back(parse_method_object(m));
  }
  c.iterations = get_count(j, "iterations", c.iterations);
  c.beta = get_or(j, "beta", c.beta);
  if (j.contains("optimizer")) parse_optimizer(j["optimizer"], c.optimizer);
  c.baseline_grid = get_count(j, "baseline_grid", c.baseline_grid);
  if (j.contains("coverage")) {
    const json& jc = j["coverage"];
    check_keys(jc, {"grid", "monte_carlo"}, "coverage");
    c.coverage.grid = get_count(jc, "grid", c.coverage.grid);
    c.coverage.monte_carlo = get_count(jc, "monte_carlo", c.coverage.monte_carlo);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.replications = get_count(j, "replications", c.replications);
  c.regret_probe_period = get_count(j, "regret_probe_period", c.regret_probe_period);
  c.record_timing = get_or(j, "record_timing", c.record_timing);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void validate(const ExperimentConfig& c) {
  const EnvironmentSpec& e = c.environment;
  const std::size_t d = e.domain.dim();
  if (d == 0) throw ConfigError("empty domain");
  if (static_cast<std::size_t>(e.seed_point.size()) != d) {
    throw ConfigError("seed_point dimension does not match the domain");
  }
  if (!e.domain.contains(e.seed_point, 1e-12)) throw ConfigError("seed_point outside the domain");
  if (!(e.noise_variance > 0.0) || !(e.noise_variance_below > 0.0)) {
    throw ConfigError("noise variances must be positive");
  }
  if ((c.gp.lengthscales.array() <= 0.0).any() || !(c.gp.outputscale > 0.0)) {
    throw ConfigError("gp lengthscale and outputscale must be positive");
  }
  if (c.methods.empty()) throw ConfigError("no method given");
  if (c.replications == 0) throw ConfigError("replications must be positive");
  if (!(c.beta >= 0.0)) throw ConfigError("beta must be non-negative");
  if (c.optimizer.restarts == 0) throw ConfigError("optimizer.restarts must be positive");
  if (e.kind == EnvironmentKind::gp_sample && e.sample_grid < 2) {
    throw ConfigError("environment.sample_grid must be at least 2");
  }
  if (e.kind == EnvironmentKind::exponential && d != 1) throw ConfigError("exponential is 1D");
  if (e.kind == EnvironmentKind::pendulum && d != 2) throw ConfigError("pendulum is 2D");
  if (e.kind == EnvironmentKind::cartpole && d != 3) throw ConfigError("cartpole is 3D");
  if (d <= 2 && c.coverage.grid < 2) throw ConfigError("coverage.grid must be at least 2");
  if (d > 2 && c.coverage.monte_carlo == 0) throw ConfigError("coverage.monte_carlo must be positive");
  for (const auto& m : c.methods) {
    if (m.kind == MethodSpec::Kind::stageopt && !(m.L >= 0.0)) {
      throw ConfigError("Lipschitz constant must be non-negative");
    }
    if (m.line && (m.lines == 0 || m.line_points < 2)) {
      throw ConfigError("line methods need at least one line and two points per line");
    }
    if (!m.line && m.kind != MethodSpec::Kind::ise) {
      if (c.baseline_grid < 2) throw ConfigError("baseline_grid must be at least 2");
      const double size = std::pow(static_cast<double>(c.baseline_grid), static_cast<double>(d));
      if (d > 3 || size > 2e6) {
        throw ConfigError("grid method '" + m.label + "' needs a discretizable domain (d <= 3)");
      }
    }
  }
}

std::optional<MethodSpec> find_method(const ExperimentConfig& cfg, const std::string& name) {
  for (const auto& m : cfg.methods) {
    if (m.label == name) return m;
  }
  for (const auto& m : cfg.methods) {
    if (default_label(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace safex
