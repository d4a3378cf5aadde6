#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <set>

#include "shapeopt/errors.hpp"
#include "shapeopt/experiments.hpp"

namespace shapeopt {

namespace {

YAML::Node load(const std::string& path) {
  try {
    auto n = YAML::LoadFile(path);
    if (n.IsNull()) return YAML::Node(YAML::NodeType::Map);
    if (!n.IsMap()) throw ConfigError(fmt::format("{}: top level must be a mapping", path));
    return n;
  } catch (const YAML::BadFile&) {
    throw ConfigError(fmt::format("cannot read config '{}'", path));
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("{}: {}", path, e.what()));
  }
}

void check_keys(const YAML::Node& n, const std::set<std::string>& allowed, const std::string& where) {
  if (!n.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", where));
  for (const auto& kv : n) {
    const auto k = kv.first.as<std::string>();
    if (!allowed.count(k)) throw ConfigError(fmt::format("unknown key '{}' in {}", k, where));
  }
}

template <class T>
void get(const YAML::Node& n, const char* key, T& out) {
  if (!n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("bad value for '{}'", key));
  }
}

void get_point(const YAML::Node& n, const char* key, std::array<double, 2>& out) {
  if (!n[key]) return;
  std::vector<double> v;
  get(n, key, v);
  if (v.size() != 2) throw ConfigError(fmt::format("'{}' needs two coordinates", key));
  out = {v[0], v[1]};
}

void get_optimizer(const YAML::Node& root, OptimizerOptions& o) {
  if (!root["optimizer"]) return;
  const auto n = root["optimizer"];
  check_keys(n, {"tol", "max_iter", "c1", "c2", "max_trials", "initial_step", "lbfgs", "lbfgs_memory"}, "optimizer");
  get(n, "tol", o.tol);
  get(n, "max_iter", o.max_iter);
  get(n, "c1", o.c1);
  get(n, "c2", o.c2);
  get(n, "max_trials", o.max_trials);
  get(n, "initial_step", o.initial_step);
  get(n, "lbfgs", o.lbfgs);
  get(n, "lbfgs_memory", o.lbfgs_memory);
}

void get_grid(const YAML::Node& root, const char* key, BathymetryParams& g) {
  if (!root[key]) return;
  const auto n = root[key];
  check_keys(n, {"m_x", "m_y", "order", "c"}, key);
  get(n, "m_x", g.m_x);
  get(n, "m_y", g.m_y);
  get(n, "order", g.order);
  get(n, "c", g.c);
}

void positive(double v, const char* what) {
  if (!(v > 0.0)) throw ConfigError(fmt::format("'{}' must be positive", what));
}

}  // namespace

ConvergenceConfig load_convergence_config(const std::string& path) {
  const auto n = load(path);
  check_keys(n, {"order", "R", "s", "grids", "T", "dt_fraction", "seed"}, path);
  ConvergenceConfig c;
  get(n, "order", c.order);
  get(n, "R", c.R);
  get(n, "s", c.s);
  get(n, "T", c.T);
  get(n, "dt_fraction", c.dt_fraction);
  get(n, "seed", c.seed);
  if (n["grids"]) {
    std::vector<std::vector<int>> g;
    get(n, "grids", g);
    for (const auto& mn : g) {
      if (mn.size() != 2) throw ConfigError("each grid is a pair [m, n]");
      c.grids.emplace_back(mn[0], mn[1]);
    }
  }
  positive(c.R, "R");
  positive(c.T, "T");
  positive(c.dt_fraction, "dt_fraction");
  if (!(c.s > 0.0 && c.s < 1.0)) throw ConfigError("'s' must lie in (0, 1)");
  return c;
}

BathymetryConfig load_bathymetry_config(const std::string& path) {
  const auto n = load(path);
  check_keys(n,
             {"grid", "data_grid", "source", "receiver", "sigma", "shift", "T", "dt_fraction", "data_dt_fraction",
              "gamma", "optimizer", "truth", "snapshots", "checkpoint_stride", "seed"},
             path);
  BathymetryConfig c;
  get_grid(n, "grid", c.grid);
  get_grid(n, "data_grid", c.data_grid);
  get_point(n, "source", c.source);
  get_point(n, "receiver", c.receiver);
  get(n, "sigma", c.sigma);
  get(n, "shift", c.shift);
  get(n, "T", c.T);
  get(n, "dt_fraction", c.dt_fraction);
  get(n, "data_dt_fraction", c.data_dt_fraction);
  get(n, "gamma", c.gamma);
  get(n, "truth", c.truth);
  c.truth_vector(2);  // validates the name
  get(n, "snapshots", c.snapshots);
  get(n, "checkpoint_stride", c.checkpoint_stride);
  get(n, "seed", c.seed);
  get_optimizer(n, c.optimizer);
  positive(c.sigma, "sigma");
  positive(c.T, "T");
  positive(c.dt_fraction, "dt_fraction");
  positive(c.data_dt_fraction, "data_dt_fraction");
  if (c.gamma < 0.0) throw ConfigError("'gamma' must be non-negative");
  return c;
}

HornConfig load_horn_config(const std::string& path) {
  const auto n = load(path);
  check_keys(n,
             {"geometry", "amplitudes", "frequencies", "incident", "T", "dt_fraction", "gamma", "optimizer", "sweep", "threads",
              "seed"},
             path);
  HornConfig c;
  if (n["geometry"]) {
    const auto g = n["geometry"];
    check_keys(g, {"order", "m_guide", "m_flare", "m_box", "m_low", "m_upper", "c"}, "geometry");
    get(g, "order", c.geometry.order);
    get(g, "m_guide", c.geometry.m_guide);
    get(g, "m_flare", c.geometry.m_flare);
    get(g, "m_box", c.geometry.m_box);
    get(g, "m_low", c.geometry.m_low);
    get(g, "m_upper", c.geometry.m_upper);
    get(g, "c", c.geometry.c);
  }
  get(n, "amplitudes", c.amplitudes);
  get(n, "frequencies", c.frequencies);
  get(n, "incident", c.incident);
  c.phase();  // validates the name
  get(n, "T", c.T);
  get(n, "dt_fraction", c.dt_fraction);
  get(n, "gamma", c.gamma);
  get(n, "threads", c.threads);
  get(n, "seed", c.seed);
  get_optimizer(n, c.optimizer);
  if (n["sweep"]) {
    const auto s = n["sweep"];
    check_keys(s, {"min", "max", "count"}, "sweep");
    get(s, "min", c.sweep_min);
    get(s, "max", c.sweep_max);
    get(s, "count", c.sweep_count);
  }
  if (c.frequencies.empty() || c.amplitudes.size() != c.frequencies.size()) {
    throw ConfigError("horn needs matching, non-empty amplitude and frequency lists");
  }
  check_horn_frequencies(c.frequencies);
  positive(c.dt_fraction, "dt_fraction");
  if (c.T < 0.0) throw ConfigError("'T' must be non-negative");
  if (c.sweep_count < 0) throw ConfigError("'sweep.count' must be non-negative");
  check_horn_frequencies(c.sweep_frequencies());
  return c;
}

GradientCheckConfig load_gradient_check_config(const std::string& path) {
  const auto n = load(path);
  check_keys(n, {"grid", "T", "eps", "dt_fractions", "data_dt_divisor", "gamma", "design_scale", "threads", "seed"},
             path);
  GradientCheckConfig c;
  get_grid(n, "grid", c.grid);
  get(n, "T", c.T);
  get(n, "eps", c.eps);
  get(n, "dt_fractions", c.dt_fractions);
  get(n, "data_dt_divisor", c.data_dt_divisor);
  get(n, "gamma", c.gamma);
  get(n, "design_scale", c.design_scale);
  get(n, "threads", c.threads);
  get(n, "seed", c.seed);
  positive(c.T, "T");
  positive(c.eps, "eps");
  for (double f : c.dt_fractions) positive(f, "dt_fractions");
  return c;
}

}  // namespace shapeopt
