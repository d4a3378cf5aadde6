// Command-line driver for the experiments. Every run writes its CSVs and a
// manifest.json into the output directory.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "shapeopt/errors.hpp"
#include "shapeopt/experiments.hpp"

using namespace shapeopt;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
  return out;
}

std::string num(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : std::string(); }

json optimization_summary(const OptimizationResult& r) {
  return {{"iterations", r.iterations}, {"evaluations", r.evaluations}, {"resets", r.resets},
          {"converged", r.converged},   {"reason", r.reason},           {"J_final", r.J},
          {"gnorm_inf_final", r.g.lpNorm<Eigen::Infinity>()}};
}

void print_iteration(const IterationRecord& h, const Vec&) {
  fmt::print("iter {:4d}  J = {:.6e}  |g| = {:.3e}  step = {:.3e}\n", h.iter, h.J, h.gnorm, h.step);
  std::fflush(stdout);
}

// Iteration log without wall time so repeated runs give identical bytes.
void write_iterations(const fs::path& p, const OptimizationResult& r) { write_history_csv(p.string(), r, false); }

json run_convergence_cmd(const std::string& cfg_path, const fs::path& out, int) {
  const auto cfg = load_convergence_config(cfg_path);
  std::vector<ConvergenceRow> rows;
  for (auto [m, n] : cfg.grids) {
    CircleParams prm{cfg.R, cfg.s, m, n, cfg.order};
    rows.push_back(circle_error(prm, cfg.T, cfg.dt_fraction, cfg.seed));
    fill_rates(rows);
    const auto& r = rows.back();
    fmt::print("m = {:4d}  n = {:4d}  N = {:7d}  log10(e) = {:.2f}  rate = {}\n", r.m, r.n, r.N, r.log10_error(),
               std::isnan(r.rate) ? std::string("-") : fmt::format("{:.2f}", r.rate));
    std::fflush(stdout);
  }
  if (rows.empty()) throw ConfigError("convergence study needs at least one grid");
  write_convergence_csv((out / "convergence.csv").string(), rows);
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"N", r.N}, {"log10_error", r.log10_error()}, {"rate", std::isnan(r.rate) ? json() : json(r.rate)}});
  }
  return {{"outputs", {"convergence.csv"}}, {"rows", j}};
}

json run_bathymetry_cmd(const std::string& cfg_path, const fs::path& out, int) {
  const auto cfg = load_bathymetry_config(cfg_path);
  const auto r = run_bathymetry(cfg, print_iteration);
  std::vector<std::string> files{"iterations.csv", "seabed.csv", "receiver_data.csv", "receiver_final.csv"};
  write_iterations(out / "iterations.csv", r.opt);

  auto sb = open_out(out / "seabed.csv");
  sb << "i,x,truth,initial,final\n";
  for (int i = 0; i < r.x.size(); ++i) {
    sb << fmt::format("{},{},{},{},{}\n", i, num(r.x[i]), num(r.truth[i]), num(r.p0[i]), num(r.opt.p[i]));
  }
  auto rd = open_out(out / "receiver_data.csv");
  rd << "t,value\n";
  for (std::size_t k = 0; k < r.data.t.size(); ++k) rd << num(r.data.t[k]) << ',' << num(r.data.values(k, 0)) << '\n';
  write_series_csv((out / "receiver_final.csv").string(), r.dt, r.final_receiver);

  // requested snapshots plus the last iterate, one file each
  fs::create_directories(out / "snapshots");
  std::vector<int> its;
  for (int k : cfg.snapshots) {
    if (k >= 0 && k < static_cast<int>(r.opt.snapshots.size())) its.push_back(k);
  }
  its.push_back(static_cast<int>(r.opt.snapshots.size()) - 1);
  std::sort(its.begin(), its.end());
  its.erase(std::unique(its.begin(), its.end()), its.end());
  for (int k : its) {
    const std::string name = fmt::format("snapshots/seabed_iter_{:04d}.csv", k);
    auto s = open_out(out / name);
    s << "i,x,p\n";
    const Vec& p = r.opt.snapshots[k];
    for (int i = 0; i < p.size(); ++i) s << fmt::format("{},{},{}\n", i, num(r.x[i]), num(p[i]));
    files.push_back(name);
  }
  fmt::print("relative seabed error {:.3e} -> {:.3e} ({})\n", r.error0, r.error, r.opt.reason);
  return {{"outputs", files},
          {"optimization", optimization_summary(r.opt)},
          {"dt", r.dt},
          {"J0", r.J0},
          {"relative_error_initial", r.error0},
          {"relative_error_final", r.error}};
}

json run_horn_cmd(const std::string& cfg_path, const fs::path& out, int threads) {
  auto cfg = load_horn_config(cfg_path);
  if (threads > 0) cfg.threads = threads;
  const auto r = run_horn(cfg, print_iteration);
  std::vector<std::string> files{"iterations.csv", "flare.csv"};
  write_iterations(out / "iterations.csv", r.opt);
  auto fl = open_out(out / "flare.csv");
  fl << "i,x,p\n";
  for (int i = 0; i < r.x.size(); ++i) fl << fmt::format("{},{},{}\n", i, num(r.x[i]), num(r.opt.p[i]));
  if (!r.sweep_f.empty()) {
    auto sp = open_out(out / "spectrum.csv");
    sp << "frequency,loss_initial,loss_final\n";
    for (std::size_t k = 0; k < r.sweep_f.size(); ++k) {
      sp << fmt::format("{},{},{}\n", num(r.sweep_f[k]), num(r.sweep_initial[k]), num(r.sweep_final[k]));
    }
    files.push_back("spectrum.csv");
  }
  fmt::print("loss {:.3e} -> {:.3e}, reflection {:.3e} -> {:.3e} ({:.2f} orders, {})\n", r.J0, r.opt.J,
             r.reflection0, r.reflection, r.reflection_orders(), r.opt.reason);
  return {{"outputs", files},
          {"optimization", optimization_summary(r.opt)},
          {"dt", r.dt},
          {"T", cfg.final_time()},
          {"J0", r.J0},
          {"reflection_initial", r.reflection0},
          {"reflection_final", r.reflection},
          {"reflection_orders_reduced", r.reflection_orders()}};
}

json run_gradient_check_cmd(const std::string& cfg_path, const fs::path& out, int threads) {
  auto cfg = load_gradient_check_config(cfg_path);
  if (threads > 0) cfg.threads = threads;
  const auto rows = run_gradient_check(cfg);
  auto s = open_out(out / "gradient_check.csv");
  s << "dt,steps,rel_error\n";
  auto c = open_out(out / "gradient_components.csv");
  c << "dt,i,adjoint,fd,volume,damping,regularization\n";
  json j = json::array();
  for (const auto& r : rows) {
    s << fmt::format("{},{},{}\n", num(r.dt), r.steps, num(r.rel_error));
    for (int i = 0; i < r.adjoint.size(); ++i) {
      c << fmt::format("{},{},{},{},{},{},{}\n", num(r.dt), i, num(r.adjoint[i]), num(r.fd[i]),
                       num(r.report.volume[i]), num(r.report.damping[i]), num(r.report.regularization[i]));
    }
    fmt::print("dt = {:.4e}  steps = {:5d}  relative error = {:.3e}\n", r.dt, r.steps, r.rel_error);
    j.push_back({{"dt", r.dt}, {"rel_error", r.rel_error}});
  }
  return {{"outputs", {"gradient_check.csv", "gradient_components.csv"}}, {"rows", j}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shape optimization experiments for the acoustic wave equation"};
  app.require_subcommand(1);
  std::string config, out_dir;
  int threads = 0;  // 0: take the config value
  struct Cmd {
    const char* name;
    const char* help;
    json (*run)(const std::string&, const fs::path&, int);
  };
  const Cmd cmds[] = {
      {"convergence", "grid convergence study on the disc", run_convergence_cmd},
      {"bathymetry", "seabed reconstruction from one receiver", run_bathymetry_cmd},
      {"horn", "horn flare optimization and reflection spectrum", run_horn_cmd},
      {"gradient-check", "adjoint gradient against finite differences", run_gradient_check_cmd},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    s->add_option("-c,--config", config, "YAML config file")->required()->check(CLI::ExistingFile);
    s->add_option("-o,--out", out_dir, "output directory")->required();
    s->add_option("-j,--threads", threads, "worker threads (horn sweep, finite differences)")->check(CLI::PositiveNumber);
    subs.push_back(s);
  }
  CLI11_PARSE(app, argc, argv);

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const Cmd& cmd = cmds[which];

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", out.string(), ec.message()));
    json result = cmd.run(config, out, threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {
        {"experiment", cmd.name},
        {"config", fs::absolute(config).string()},
        {"config_hash_fnv1a", file_hash(config)},
        {"timestamp_utc", utc_now()},
        {"versions",
         {{"shapeopt", SHAPEOPT_VERSION},
          {"compiler", fmt::format("{} {}", "gcc", __VERSION__)},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fmt", FMT_VERSION},
          {"cli11", CLI11_VERSION}}},
        {"timings", {{"wall_seconds", wall}}},
        {"threads", threads},
        {"result", result},
    };
    auto m = open_out(out / "manifest.json");
    m << manifest.dump(2) << '\n';
    fmt::print("wrote {} ({:.1f} s)\n", (out / "manifest.json").string(), wall);
    return 0;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
