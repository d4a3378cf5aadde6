#include "shapeopt/optimizer.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double alpha = 0.0, f = kInf, dphi = 0.0;
  Vec g;
  bool ok() const { return std::isfinite(f); }
};

// Minimizer of the cubic through (a, fa, da), (b, fb, db); NaN if none.
double cubic_min(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (disc < 0) return std::nan("");
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2 * d2);
}

class LineSearch {
 public:
  LineSearch(const Objective& f, const Vec& p, const Vec& d, double f0, double d0,
             const OptimizerOptions& opt)
      : f_(f), p_(p), d_(d), f0_(f0), d0_(d0), opt_(opt) {}

  // Strong Wolfe search. Returns true on success; best() holds the lowest
  // Armijo-acceptable trial either way.
  bool run(double alpha0) {
    Point prev{0.0, f0_, d0_, Vec()};
    double alpha = alpha0;
    for (int i = 0; trials_ < opt_.max_trials; ++i) {
      Point cur = eval(alpha);
      if (!cur.ok() || cur.f > f0_ + opt_.c1 * alpha * d0_ || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (std::abs(cur.dphi) <= -opt_.c2 * d0_) return accept(cur);
      if (cur.dphi >= 0) return zoom(cur, prev);
      prev = cur;
      alpha *= 2.0;
    }
    return false;
  }

  const Point& best() const { return best_; }
  bool has_best() const { return best_.ok(); }
  int trials() const { return trials_; }

 private:
  Point eval(double alpha) {
    ++trials_;
    Point pt;
    pt.alpha = alpha;
    try {
      auto [J, g] = f_(p_ + alpha * d_);
      if (std::isfinite(J) && g.allFinite()) {
        pt.f = J;
        pt.g = std::move(g);
        pt.dphi = pt.g.dot(d_);
      }
    } catch (const FoldedMeshError&) {
    } catch (const NumericalError&) {
    }
    if (pt.ok() && pt.f <= f0_ + opt_.c1 * alpha * d0_ && (!best_.ok() || pt.f < best_.f)) best_ = pt;
    return pt;
  }

  bool accept(const Point& pt) {
    best_ = pt;
    return true;
  }

  bool zoom(Point lo, Point hi) {
    while (trials_ < opt_.max_trials) {
      const double a = lo.alpha, b = hi.alpha;
      double alpha = std::nan("");
      if (hi.ok()) alpha = cubic_min(a, lo.f, lo.dphi, b, hi.f, hi.dphi);
      const double lo_b = std::min(a, b), hi_b = std::max(a, b), w = hi_b - lo_b;
      if (!std::isfinite(alpha) || alpha < lo_b + 0.1 * w || alpha > hi_b - 0.1 * w) alpha = 0.5 * (a + b);
      if (!hi.ok()) alpha = a + 0.3 * (b - a);  // inadmissible side: back off hard
      Point cur = eval(alpha);
      if (!cur.ok() || cur.f > f0_ + opt_.c1 * alpha * d0_ || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::abs(cur.dphi) <= -opt_.c2 * d0_) return accept(cur);
        if (cur.dphi * (b - a) >= 0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.alpha - lo.alpha) <= 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
    }
    return false;
  }

  const Objective& f_;
  const Vec& p_;
  const Vec& d_;
  double f0_, d0_;
  const OptimizerOptions& opt_;
  int trials_ = 0;
  Point best_;
};

}  // namespace

OptimizationResult minimize(const Objective& f, const Vec& p0, const OptimizerOptions& opt,
                            const IterationCallback& cb) {
  if (!(opt.tol > 0.0)) throw ConfigError("optimizer tolerance must be positive");
  if (opt.max_iter < 0 || opt.max_trials < 1) throw ConfigError("optimizer iteration limits must be positive");
  if (!(0.0 < opt.c1 && opt.c1 < opt.c2 && opt.c2 < 1.0)) throw ConfigError("Wolfe constants need 0 < c1 < c2 < 1");
  if (!(opt.initial_step > 0.0)) throw ConfigError("initial step must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  OptimizationResult r;
  const int n = static_cast<int>(p0.size());
  r.p = p0;
  try {
    auto [J, g] = f(p0);
    r.J = J;
    r.g = std::move(g);
  } catch (const FoldedMeshError& e) {
    throw NumericalError(fmt::format("initial design is inadmissible: {}", e.what()));
  }
  if (!std::isfinite(r.J) || !r.g.allFinite()) throw NumericalError("loss or gradient at the initial design is not finite");
  r.evaluations = 1;
  if (!opt.lbfgs) r.Hinv = Eigen::MatrixXd::Identity(n, n);
  std::deque<std::pair<Vec, Vec>> mem;  // (s, y) for L-BFGS
  bool fresh = true;                     // no curvature information yet

  auto record = [&](int it, double step, int evals) {
    IterationRecord rec{it, r.J, r.g.lpNorm<Eigen::Infinity>(), step, wall(), evals};
    r.history.push_back(rec);
    r.snapshots.push_back(r.p);
    if (cb) cb(rec, r.p);
  };
  auto converged = [&] { return r.g.lpNorm<Eigen::Infinity>() <= opt.tol * std::max(1.0, std::abs(r.J)); };

  auto direction = [&]() -> Vec {
    if (!opt.lbfgs) return -(r.Hinv * r.g);
    Vec q = r.g;
    std::vector<double> a(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      a[k] = mem[k].first.dot(q) / mem[k].second.dot(mem[k].first);
      q -= a[k] * mem[k].second;
    }
    if (!mem.empty()) q *= mem.back().first.dot(mem.back().second) / mem.back().second.squaredNorm();
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const double b = mem[k].second.dot(q) / mem[k].second.dot(mem[k].first);
      q += (a[k] - b) * mem[k].first;
    }
    return -q;
  };
  auto reset = [&] {
    if (!opt.lbfgs) r.Hinv.setIdentity();
    mem.clear();
    fresh = true;
    ++r.resets;
  };

  record(0, 0.0, 1);
  if (converged()) {
    r.converged = true;
    r.reason = "gradient tolerance";
    return r;
  }
  for (int it = 1; it <= opt.max_iter; ++it) {
    Vec d = direction();
    double d0 = r.g.dot(d);
    if (!(d0 < 0.0)) {
      reset();
      d = -r.g;
      d0 = r.g.dot(d);
    }
    const double alpha0 = fresh ? opt.initial_step / d.lpNorm<Eigen::Infinity>() : 1.0;
    LineSearch ls(f, r.p, d, r.J, d0, opt);
    const bool ok = ls.run(alpha0);
    r.evaluations += ls.trials();
    if (!ls.has_best()) {
      r.iterations = it - 1;
      r.reason = "line search failed";
      return r;
    }
    const Point& pt = ls.best();
    const Vec s = pt.alpha * d;
    const Vec y = pt.g - r.g;
    r.p += s;
    r.J = pt.f;
    r.g = pt.g;
    r.iterations = it;
    const double sy = s.dot(y);
    if (!(sy > 0.0)) {
      reset();
    } else if (opt.lbfgs) {
      mem.emplace_back(s, y);
      if (static_cast<int>(mem.size()) > opt.lbfgs_memory) mem.pop_front();
      fresh = false;
    } else {
      if (fresh) r.Hinv *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Vec Hy = r.Hinv * y;
      r.Hinv += (rho * rho * y.dot(Hy) + rho) * s * s.transpose() - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }
    record(it, pt.alpha, ls.trials());
    if (converged()) {
      r.converged = true;
      r.reason = "gradient tolerance";
      return r;
    }
    if (!ok) {
      // accepted an Armijo point without curvature; keep going but note it
      r.reason = "weak line search";
    }
  }
  r.reason = "iteration limit";
  return r;
}

void write_history_csv(const std::string& path, const OptimizationResult& r, bool with_wall_time) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << (with_wall_time ? "iter,J,gnorm_inf,step,wall_time\n" : "iter,J,gnorm_inf,step\n");
  for (const auto& h : r.history) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g}", h.iter, h.J, h.gnorm, h.step);
    if (with_wall_time) out << fmt::format(",{:.3f}", h.wall);
    out << "\n";
  }
}

void write_snapshots_csv(const std::string& path, const OptimizationResult& r, const Vec& x) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << "iter,i,x,p\n";
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    const Vec& p = r.snapshots[k];
    for (int i = 0; i < p.size(); ++i) {
      out << fmt::format("{},{},{:.17g},{:.17g}\n", r.history[k].iter, i, x.size() == p.size() ? x[i] : double(i), p[i]);
    }
  }
}

}  // namespace shapeopt
