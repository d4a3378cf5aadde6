#include "shapeopt/experiments.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "shapeopt/errors.hpp"

namespace shapeopt {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int nt = std::max(1, std::min(threads, n));
  if (nt == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

// ---------------------------------------------------------------------------

double ConvergenceRow::log10_error() const { return std::log10(error); }

ConvergenceRow circle_error(const CircleParams& prm, double T, double dt_fraction, unsigned seed) {
  const auto sys = assemble_global(circle_system(prm), Vec());
  const Vec U = sample(sys, [](double x, double y) { return std::sin(3 * M_PI * x) * std::sin(4 * M_PI * y); });
  // Dirichlet data through the affine projection: u = v + (I - P) U cos(5 pi t)
  const Vec PU = sys.project(U);
  const Vec lift = sys.project(sys.c * sys.c * sys.apply_A(U - PU));
  Forcing f;
  f.add([](double t) { return std::cos(5 * M_PI * t); }, lift);
  StableDtOptions so;
  so.seed = seed;
  ForwardOptions o;
  o.T = T;
  o.dt = dt_fraction * stable_dt(sys, so);
  o.initial = std::make_pair(PU, Vec(Vec::Zero(sys.N)));
  const auto tr = solve_forward(sys, f, o);
  const Vec e = tr.final_w - PU * std::cos(5 * M_PI * T);
  ConvergenceRow r;
  r.m = prm.m;
  r.n = prm.n;
  r.N = sys.N;
  r.dt = tr.dt;
  r.steps = tr.n_steps;
  r.error = std::sqrt(sys.inner(e, e));
  r.rate = std::nan("");
  return r;
}

void fill_rates(std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].rate = k == 0 ? std::nan("")
                          : std::log(rows[k - 1].error / rows[k].error) /
                                std::log(std::sqrt(static_cast<double>(rows[k].N) / rows[k - 1].N));
  }
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& cfg) {
  if (cfg.grids.empty()) throw ConfigError("convergence study needs at least one grid");
  std::vector<ConvergenceRow> rows;
  for (auto [m, n] : cfg.grids) {
    CircleParams prm;
    prm.R = cfg.R;
    prm.s = cfg.s;
    prm.m = m;
    prm.n = n;
    prm.order = cfg.order;
    rows.push_back(circle_error(prm, cfg.T, cfg.dt_fraction, cfg.seed));
  }
  fill_rates(rows);
  return rows;
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << "m,n,N,dt,steps,error,log10_error,rate\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{:.17g},{},{:.17g},{:.6f},{}\n", r.m, r.n, r.N, r.dt, r.steps, r.error,
                       r.log10_error(), std::isnan(r.rate) ? std::string() : fmt::format("{:.6f}", r.rate));
  }
}

// ---------------------------------------------------------------------------

namespace {

Forcing ricker_source(const GlobalSystem& sys, const BathymetryConfig& cfg) {
  SourceSignal s;
  s.sigma = cfg.sigma;
  s.shift = cfg.shift;
  s.validate();
  Forcing f;
  f.add(s, build_point_source(sys, cfg.source[0], cfg.source[1]));
  return f;
}

// absolute when the truth is flat
double rel_error(const Vec& p, const Vec& truth) {
  const double n = truth.norm();
  return n > 0 ? (p - truth).norm() / n : p.norm();
}

}  // namespace

Vec BathymetryConfig::truth_vector(int m_x) const {
  if (truth == "two_bump") return bathymetry_truth_vector(m_x);
  if (truth == "flat") return Vec::Zero(m_x);
  throw ConfigError(fmt::format("unknown seabed truth '{}' (two_bump or flat)", truth));
}

SyntheticData bathymetry_data(const BathymetryConfig& cfg) {
  const auto spec = bathymetry_system(cfg.data_grid);
  const auto sys = assemble_global(spec, cfg.truth_vector(cfg.data_grid.m_x));
  StableDtOptions so;
  so.seed = cfg.seed;
  ForwardOptions o;
  o.T = cfg.T;
  o.dt = cfg.data_dt_fraction * stable_dt(sys, so);
  o.observe = receiver_row(sys, cfg.receiver[0], cfg.receiver[1]);
  const auto tr = solve_forward(sys, ricker_source(sys, cfg), o);
  SyntheticData d;
  for (int k = 0; k <= tr.n_steps; ++k) d.t.push_back(tr.time(k));
  d.values = tr.obs;
  return d;
}

LossProblem bathymetry_problem(const BathymetryConfig& cfg, const SyntheticData& data) {
  LossProblem prob;
  prob.spec = bathymetry_system(cfg.grid);
  prob.T = cfg.T;
  prob.gamma = cfg.gamma;
  prob.checkpoint_stride = cfg.checkpoint_stride;
  prob.forcing = [cfg](const GlobalSystem& s) { return ricker_source(s, cfg); };
  auto target = linear_series(data.t, data.values);
  prob.misfit = [cfg, target](const GlobalSystem& s) {
    Misfit m;
    m.Q = receiver_row(s, cfg.receiver[0], cfg.receiver[1]);
    m.weight = Vec::Ones(1);
    m.target = target;
    return m;
  };
  StableDtOptions so;
  so.seed = cfg.seed;
  prob.dt = cfg.dt_fraction * stable_dt(assemble_global(prob.spec, Vec::Zero(cfg.grid.m_x)), so);
  return prob;
}

BathymetryResult run_bathymetry(const BathymetryConfig& cfg, const IterationCallback& cb) {
  BathymetryResult r;
  r.data = bathymetry_data(cfg);
  const LossProblem prob = bathymetry_problem(cfg, r.data);
  r.dt = prob.dt;
  r.x = design_edge_x(prob.spec, 1);
  r.truth = cfg.truth_vector(cfg.grid.m_x);
  r.p0 = Vec::Zero(cfg.grid.m_x);
  Objective f = [&prob](const Vec& p) {
    auto ev = evaluate(prob, p, true);
    return std::make_pair(ev.J, ev.grad.g);
  };
  r.opt = minimize(f, r.p0, cfg.optimizer, cb);
  r.J0 = r.opt.history.front().J;
  r.error0 = rel_error(r.p0, r.truth);
  r.error = rel_error(r.opt.p, r.truth);
  r.final_receiver = evaluate(prob, r.opt.p, false).fwd.obs.col(0);
  return r;
}

// ---------------------------------------------------------------------------

double HornConfig::phase() const {
  if (incident == "sine") return -0.5 * M_PI;
  if (incident == "cosine") return 0.0;
  throw ConfigError(fmt::format("unknown incident wave '{}' (sine or cosine)", incident));
}

LossProblem horn_problem(const HornConfig& cfg, const std::vector<double>& amplitudes,
                         const std::vector<double>& frequencies, double dt) {
  const double phi = cfg.phase();
  const SourceSignal g = horn_signal(amplitudes, frequencies, std::vector<double>(frequencies.size(), phi));
  LossProblem prob;
  prob.spec = horn_system(cfg.geometry);
  prob.T = cfg.final_time();
  prob.gamma = cfg.gamma;
  prob.dt = dt;
  prob.forcing = [g](const GlobalSystem& s) {
    Forcing f;
    f.add(g, s.inflow);
    return f;
  };
  const double nf = static_cast<double>(frequencies.size());
  prob.misfit = [amplitudes, frequencies, nf, phi](const GlobalSystem& s) {
    Misfit m;
    m.Q = edge_selector(s, 0, Side::West);
    m.weight = edge_weights(s, 0, Side::West) / (nf * nf);
    const int rows = static_cast<int>(m.Q.rows());
    // the incident wave the inflow data launch from rest
    m.target = [amplitudes, frequencies, rows, phi](double t) {
      double v = 0.0;
      for (std::size_t j = 0; j < frequencies.size(); ++j) {
        v += amplitudes[j] * (std::cos(2 * M_PI * frequencies[j] * t + phi) - std::cos(phi));
      }
      return Vec(Vec::Constant(rows, v));
    };
    return m;
  };
  return prob;
}

namespace {

double horn_dt(const HornConfig& cfg) {
  StableDtOptions so;
  so.seed = cfg.seed;
  const auto spec = horn_system(cfg.geometry);
  return cfg.dt_fraction * stable_dt(assemble_global(spec, Vec::Zero(design_size(spec))), so);
}

}  // namespace

std::vector<double> horn_spectrum(const HornConfig& cfg, const Vec& p, double dt, const std::vector<double>& f) {
  std::vector<double> out(f.size());
  parallel_for(static_cast<int>(f.size()), cfg.threads, [&](int k) {
    const auto prob = horn_problem(cfg, {1.0}, {f[k]}, dt);
    out[k] = evaluate(prob, p, false).J_data;
  });
  return out;
}

void check_horn_frequencies(const std::vector<double>& f) {
  for (double v : f) {
    if (!(v > 100.0 && v < 850.0)) throw ConfigError(fmt::format("horn frequency {} Hz outside (100, 850)", v));
  }
}

std::vector<double> HornConfig::sweep_frequencies() const {
  std::vector<double> f;
  for (int k = 0; k < sweep_count; ++k) {
    f.push_back(sweep_count == 1 ? sweep_min : sweep_min + (sweep_max - sweep_min) * k / (sweep_count - 1));
  }
  return f;
}

double HornResult::reflection_orders() const { return std::log10(reflection0 / reflection); }

HornResult run_horn(const HornConfig& cfg, const IterationCallback& cb) {
  check_horn_frequencies(cfg.frequencies);
  HornResult r;
  r.sweep_f = cfg.sweep_frequencies();
  check_horn_frequencies(r.sweep_f);
  r.dt = horn_dt(cfg);
  const LossProblem prob = horn_problem(cfg, cfg.amplitudes, cfg.frequencies, r.dt);
  r.x = design_edge_x(prob.spec, 2).segment(1, design_size(prob.spec));
  const Vec p0 = Vec::Zero(design_size(prob.spec));
  Objective f = [&prob](const Vec& p) {
    auto ev = evaluate(prob, p, true);
    return std::make_pair(ev.J, ev.grad.g);
  };
  r.opt = minimize(f, p0, cfg.optimizer, cb);
  r.J0 = r.opt.history.front().J;
  r.reflection0 = evaluate(prob, p0, false).J_data;
  r.reflection = evaluate(prob, r.opt.p, false).J_data;
  if (!r.sweep_f.empty()) {
    r.sweep_initial = horn_spectrum(cfg, p0, r.dt, r.sweep_f);
    r.sweep_final = horn_spectrum(cfg, r.opt.p, r.dt, r.sweep_f);
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<GradientCheckRow> run_gradient_check(const GradientCheckConfig& cfg) {
  if (cfg.dt_fractions.empty()) throw ConfigError("gradient check needs at least one time step");
  if (cfg.data_dt_divisor < 1) throw ConfigError("data time-step divisor must be at least 1");
  BathymetryConfig bc;
  bc.grid = cfg.grid;
  bc.T = cfg.T;
  bc.gamma = cfg.gamma;
  bc.seed = cfg.seed;
  const auto spec = bathymetry_system(cfg.grid);
  StableDtOptions so;
  so.seed = cfg.seed;
  const double dt_stable = stable_dt(assemble_global(spec, Vec::Zero(cfg.grid.m_x)), so);
  const Vec p = cfg.design_scale * bathymetry_truth_vector(cfg.grid.m_x);

  std::vector<GradientCheckRow> rows;
  for (double frac : cfg.dt_fractions) {
    // data: truth seabed, same spatial grid, finer time grid
    bc.data_grid = cfg.grid;
    bc.dt_fraction = frac;
    bc.data_dt_fraction = frac / cfg.data_dt_divisor;
    const SyntheticData data = bathymetry_data(bc);
    LossProblem prob = bathymetry_problem(bc, data);
    prob.dt = frac * dt_stable;
    GradientCheckRow row;
    auto ev = evaluate(prob, p, true);
    row.dt = ev.fwd.dt;
    row.steps = ev.fwd.n_steps;
    row.report = ev.grad;
    row.adjoint = ev.grad.g;
    row.fd = Vec(p.size());
    parallel_for(static_cast<int>(p.size()), cfg.threads, [&](int i) {
      Vec a = p, b = p;
      a[i] += cfg.eps;
      b[i] -= cfg.eps;
      row.fd[i] = (evaluate(prob, a, false).J - evaluate(prob, b, false).J) / (2 * cfg.eps);
    });
    row.rel_error = (row.adjoint - row.fd).norm() / row.fd.norm();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  std::uint64_t h = 14695981039346656037ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace shapeopt
