#include "shapeopt/forward.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>

#include "shapeopt/errors.hpp"

namespace shapeopt {

double ricker(double t, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("Ricker width must be positive");
  const double s = t / sigma;
  return 2.0 / (std::sqrt(3.0 * sigma) * std::pow(M_PI, 0.25)) * (1.0 - s * s) * std::exp(-0.5 * s * s);
}

void SourceSignal::validate() const {
  switch (kind) {
    case Kind::Ricker:
      if (!(sigma > 0.0)) throw ConfigError(fmt::format("Ricker sigma must be positive, got {}", sigma));
      break;
    case Kind::HornMultifrequency:
      if (amplitudes.size() != frequencies.size() || frequencies.empty()) {
        throw ConfigError("horn signal needs matching, non-empty amplitude and frequency lists");
      }
      if (!phases.empty() && phases.size() != frequencies.size()) {
        throw ConfigError("horn signal needs one phase per frequency");
      }
      for (double f : frequencies) {
        if (!(f > 100.0 && f < 850.0)) {
          throw ConfigError(fmt::format("horn frequency {} Hz outside (100, 850) Hz", f));
        }
      }
      break;
    case Kind::Samples:
      if (sample_t.size() != sample_v.size() || sample_t.size() < 2) {
        throw ConfigError("sampled signal needs at least two (t, value) pairs");
      }
      if (!std::is_sorted(sample_t.begin(), sample_t.end())) throw ConfigError("sample times must increase");
      break;
  }
}

double SourceSignal::operator()(double t) const {
  const double s = t - shift;
  switch (kind) {
    case Kind::Ricker:
      return ricker(s, sigma);
    case Kind::HornMultifrequency: {
      double g = 0.0;
      for (std::size_t j = 0; j < frequencies.size(); ++j) {
        const double w = 2.0 * M_PI * frequencies[j];
        g -= 2.0 * amplitudes[j] * w * std::sin(w * s + (phases.empty() ? 0.0 : phases[j]));
      }
      return g;
    }
    case Kind::Samples: {
      if (s <= sample_t.front()) return sample_v.front();
      if (s >= sample_t.back()) return sample_v.back();
      auto it = std::upper_bound(sample_t.begin(), sample_t.end(), s);
      const std::size_t k = static_cast<std::size_t>(it - sample_t.begin()) - 1;
      const double a = (s - sample_t[k]) / (sample_t[k + 1] - sample_t[k]);
      return (1 - a) * sample_v[k] + a * sample_v[k + 1];
    }
  }
  return 0.0;
}

SourceSignal horn_signal(std::vector<double> amplitudes, std::vector<double> frequencies,
                         std::vector<double> phases) {
  SourceSignal s;
  s.kind = SourceSignal::Kind::HornMultifrequency;
  s.amplitudes = std::move(amplitudes);
  s.frequencies = std::move(frequencies);
  s.phases = std::move(phases);
  s.validate();
  return s;
}

void Forcing::add(std::function<double(double)> s, Vec v) {
  signals.push_back(std::move(s));
  vectors.push_back(std::move(v));
}

void Forcing::accumulate(double t, Vec& out) const {
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    const double a = signals[k](t);
    if (a != 0.0) out += a * vectors[k];
  }
}

Vec second_derivative(const GlobalSystem& sys, const Vec& w, const Vec& v) {
  const Vec pw = sys.project(w);
  const Vec pv = sys.project(v);
  Vec r = sys.Hbar_inv.cwiseProduct(sys.c * sys.c * (sys.K * pw) + sys.c * sys.Bdiag.cwiseProduct(pv));
  return sys.project(r);
}

void rk4_step(const GlobalSystem& sys, const Forcing& f, double t, double dt, Vec& w, Vec& wt) {
  auto acc = [&](double s, const Vec& a, const Vec& b) {
    Vec r = second_derivative(sys, a, b);
    f.accumulate(s, r);
    return r;
  };
  const double h2 = 0.5 * dt;
  const Vec k1w = wt;
  const Vec k1v = acc(t, w, wt);
  const Vec k2w = wt + h2 * k1v;
  const Vec k2v = acc(t + h2, w + h2 * k1w, k2w);
  const Vec k3w = wt + h2 * k2v;
  const Vec k3v = acc(t + h2, w + h2 * k2w, k3w);
  const Vec k4w = wt + dt * k3v;
  const Vec k4v = acc(t + dt, w + dt * k3w, k4w);
  w += (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
  wt += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

double companion_spectral_radius(const GlobalSystem& sys, const StableDtOptions& opt) {
  const int N = sys.N;
  std::mt19937 gen(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec a(N), b(N);
  for (int k = 0; k < N; ++k) a[k] = u(gen);
  for (int k = 0; k < N; ++k) b[k] = u(gen);
  Vec x(2 * N);
  x << sys.project(a), sys.project(b);
  auto apply = [&](const Vec& s) {
    Vec out(2 * N);
    out.head(N) = s.tail(N);
    out.tail(N) = second_derivative(sys, s.head(N), s.tail(N));
    return out;
  };
  x /= x.norm();
  double prev = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Vec y = apply(x);
    const Vec z = apply(y);
    Eigen::MatrixXd V(2 * N, 2), MV(2 * N, 2);
    V << x, y;
    MV << y, z;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(2 * N, 2);
    const Eigen::Matrix2d R = Q.transpose() * V;
    double rho;
    if (std::abs(R(1, 1)) <= 1e-14 * std::abs(R(0, 0))) {
      rho = y.norm();  // x is (numerically) an eigenvector
    } else {
      const Eigen::Matrix2d G = Q.transpose() * MV * R.inverse();
      rho = G.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (!std::isfinite(rho)) break;
    if (it > 2 && std::abs(rho - prev) <= opt.tol * rho) return rho;
    prev = rho;
    const double zn = z.norm();
    if (!(zn > 0.0)) return 0.0;
    x = z / zn;
  }
  throw NumericalError(fmt::format(
      "power iteration for the companion spectral radius did not converge in {} iterations; "
      "inspect the grid for nearly degenerate cells",
      opt.max_iter));
}

double stable_dt(const GlobalSystem& sys, const StableDtOptions& opt) {
  const double rho = companion_spectral_radius(sys, opt);
  if (!(rho > 0.0)) throw NumericalError("companion operator has zero spectral radius");
  return opt.safety * opt.rk4_extent / rho;
}

std::pair<int, double> time_grid(double T, double dt_max) {
  if (!(T > 0.0) || !(dt_max > 0.0)) throw ConfigError("final time and time step must be positive");
  const int n = std::max(11, static_cast<int>(std::ceil(T / dt_max - 1e-12)));
  return {n, T / n};
}

namespace {

void check_finite(const Vec& w, const Vec& wt, int step) {
  if (!w.allFinite() || !wt.allFinite()) {
    throw NumericalError(fmt::format("solution diverged (non-finite values) at step {}", step));
  }
}

}  // namespace

Trajectory solve_forward(const GlobalSystem& sys, const Forcing& f, const ForwardOptions& opt) {
  if (opt.checkpoint_stride < 1) throw ConfigError("checkpoint stride must be at least 1");
  const double dt_max = opt.dt > 0.0 ? opt.dt : stable_dt(sys);
  auto [n, dt] = time_grid(opt.T, dt_max);
  if (opt.dt > 0.0 && std::abs(n * opt.dt - opt.T) <= 1e-12 * opt.T) dt = opt.dt;

  Trajectory tr;
  tr.dt = dt;
  tr.n_steps = n;
  tr.stride = opt.checkpoint_stride;
  const int nobs = static_cast<int>(opt.observe.rows());
  if (nobs > 0 && opt.observe.cols() != sys.N) {
    throw DimensionError(fmt::format("observation operator has {} columns, system has {} unknowns",
                                     opt.observe.cols(), sys.N));
  }
  tr.obs.resize(n + 1, nobs);
  tr.obs_t.resize(n + 1, nobs);

  Vec w = Vec::Zero(sys.N), wt = Vec::Zero(sys.N);
  if (opt.initial) {
    if (opt.initial->first.size() != sys.N || opt.initial->second.size() != sys.N) {
      throw DimensionError("initial state does not match the system size");
    }
    w = opt.initial->first;
    wt = opt.initial->second;
  }
  std::optional<EnergyEvaluator> energy;
  if (opt.energy) energy.emplace(sys);

  auto record = [&](int k) {
    if (nobs > 0) {
      tr.obs.row(k) = (opt.observe * w).transpose();
      tr.obs_t.row(k) = (opt.observe * wt).transpose();
    }
    if (energy) tr.energy.push_back((*energy)(w, wt));
    if (opt.store_states && (k % tr.stride == 0)) {
      tr.w.push_back(w);
      tr.wt.push_back(wt);
      tr.state_step.push_back(k);
    }
  };
  record(0);
  for (int k = 0; k < n; ++k) {
    rk4_step(sys, f, k * dt, dt, w, wt);
    check_finite(w, wt, k + 1);
    record(k + 1);
  }
  tr.final_w = w;
  tr.final_wt = wt;
  return tr;
}

EnergyEvaluator::EnergyEvaluator(const GlobalSystem& sys) : sys_(&sys) {
  for (const auto& b : sys.blocks) {
    Dx_.push_back(b.Dx());
    Dy_.push_back(b.Dy());
    R_.push_back(b.remainder_form());
  }
}

double EnergyEvaluator::operator()(const Vec& w, const Vec& wt) const {
  const auto& sys = *sys_;
  const Vec pw = sys.project(w), pv = sys.project(wt);
  double e = 0.0;
  const double c2 = sys.c * sys.c;
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto& blk = sys.blocks[b];
    const Vec u = pw.segment(sys.offsets[b], blk.size());
    const Vec v = pv.segment(sys.offsets[b], blk.size());
    const Vec dx = Dx_[b] * u, dy = Dy_[b] * u;
    e += v.dot(blk.H.cwiseProduct(v)) +
         c2 * (dx.dot(blk.H.cwiseProduct(dx)) + dy.dot(blk.H.cwiseProduct(dy)) + u.dot(R_[b] * u));
  }
  return e;
}

StateReader::StateReader(const GlobalSystem& sys, const Forcing& f, const Trajectory& traj)
    : sys_(&sys), f_(&f), traj_(&traj) {
  if (traj.w.empty()) throw ConfigError("trajectory holds no states; enable state storage");
}

const Vec& StateReader::w(int k) {
  const auto& tr = *traj_;
  if (k < 0 || k > tr.n_steps) throw DimensionError(fmt::format("step {} outside [0, {}]", k, tr.n_steps));
  if (tr.stride == 1) return tr.w[k];
  const int seg = k / tr.stride;
  if (seg != seg_) {
    const int k0 = seg * tr.stride;
    const int len = std::min(tr.stride, tr.n_steps - k0);
    buf_.assign(1, tr.w[seg]);
    Vec w = tr.w[seg], wt = tr.wt[seg];
    for (int s = 0; s < len; ++s) {
      rk4_step(*sys_, *f_, (k0 + s) * tr.dt, tr.dt, w, wt);
      buf_.push_back(w);
    }
    seg_ = seg;
  }
  return buf_[k - seg * tr.stride];
}

void write_series_csv(const std::string& path, double dt, const Vec& values, const std::string& header) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << header << "\n";
  for (int k = 0; k < values.size(); ++k) out << fmt::format("{:.17g},{:.17g}\n", k * dt, values[k]);
}

void write_checkpoints(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  const char magic[8] = {'S', 'O', 'T', 'R', 'A', 'J', '0', '1'};
  out.write(magic, 8);
  const int32_t N = traj.w.empty() ? 0 : static_cast<int32_t>(traj.w[0].size());
  const int32_t stride = traj.stride;
  const int64_t records = static_cast<int64_t>(traj.w.size());
  out.write(reinterpret_cast<const char*>(&N), sizeof N);
  out.write(reinterpret_cast<const char*>(&stride), sizeof stride);
  out.write(reinterpret_cast<const char*>(&records), sizeof records);
  out.write(reinterpret_cast<const char*>(&traj.dt), sizeof traj.dt);
  for (std::size_t r = 0; r < traj.w.size(); ++r) {
    const int64_t step = traj.state_step[r];
    out.write(reinterpret_cast<const char*>(&step), sizeof step);
    out.write(reinterpret_cast<const char*>(traj.w[r].data()), sizeof(double) * N);
    out.write(reinterpret_cast<const char*>(traj.wt[r].data()), sizeof(double) * N);
  }
}

Trajectory read_checkpoints(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "SOTRAJ01", 8) != 0) throw ConfigError(fmt::format("'{}' is not a checkpoint file", path));
  int32_t N = 0, stride = 1;
  int64_t records = 0;
  Trajectory tr;
  in.read(reinterpret_cast<char*>(&N), sizeof N);
  in.read(reinterpret_cast<char*>(&stride), sizeof stride);
  in.read(reinterpret_cast<char*>(&records), sizeof records);
  in.read(reinterpret_cast<char*>(&tr.dt), sizeof tr.dt);
  tr.stride = stride;
  for (int64_t r = 0; r < records; ++r) {
    int64_t step = 0;
    Vec w(N), wt(N);
    in.read(reinterpret_cast<char*>(&step), sizeof step);
    in.read(reinterpret_cast<char*>(w.data()), sizeof(double) * N);
    in.read(reinterpret_cast<char*>(wt.data()), sizeof(double) * N);
    if (!in) throw ConfigError(fmt::format("'{}' is truncated", path));
    tr.state_step.push_back(static_cast<int>(step));
    tr.w.push_back(std::move(w));
    tr.wt.push_back(std::move(wt));
  }
  tr.n_steps = tr.state_step.empty() ? 0 : tr.state_step.back();
  return tr;
}

}  // namespace shapeopt
