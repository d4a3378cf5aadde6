// Acceptance criteria. One [PASS]/[FAIL] line per criterion; tolerances are
// fixed here. The horn run is long and only runs with --long.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "shapeopt/adjoint.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/experiments.hpp"

using namespace shapeopt;

namespace {

// criterion 1
constexpr double kDef1Tol = 1e-13, kDef2Tol = 1e-13, kProjTol = 1e-12, kSelfAdjTol = 1e-11;
// criterion 2
constexpr int kEnergySteps = 2000;
constexpr double kEnergyTol = 1e-10;
// criterion 3
constexpr double kTableTol = 0.1;
constexpr double kQ4Lo = 3.8, kQ4Hi = 4.4, kQ6Lo = 4.9, kQ6Hi = 5.9;
// criterion 4
constexpr double kGradTol = 1e-4;
// criterion 5
constexpr double kDerivTol = 1e-6, kDerivEps = 1e-6;
constexpr int kDerivSamples = 5;
// criterion 6
constexpr double kLossOrders = 2.0, kErrorFactor = 5.0;
// criterion 7
constexpr double kHornOrders = 1.5;

// Reference convergence rows: N, log10 e4, log10 e6
struct TableRow {
  int N;
  double e4, e6;
};
constexpr TableRow kTable[] = {{4797, -2.98, -3.25}, {10553, -3.71, -4.24}, {18549, -4.22, -4.94}};
// (m, n) giving the same total point counts on the five-block disc
constexpr std::pair<int, int> kTableGrids[] = {{41, 19}, {61, 28}, {81, 37}};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

Vec random_vec(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

// ---------------------------------------------------------------------------

double def1_residual(const SbpOperatorSet1D& op) {
  Eigen::MatrixXd Q = op.H.asDiagonal() * Eigen::MatrixXd(op.D1);
  Eigen::MatrixXd B = Q + Q.transpose();
  B(0, 0) += 1.0;
  B(op.m - 1, op.m - 1) -= 1.0;
  return B.cwiseAbs().maxCoeff();
}

double def2_residual(const SbpOperatorSet1D& op, const SbpSecondDerivative1D& d2) {
  Eigen::MatrixXd lhs = op.H.asDiagonal() * Eigen::MatrixXd(d2.D2c);
  Eigen::MatrixXd rhs = -Eigen::MatrixXd(d2.Mc);
  rhs.row(0) -= d2.c[0] * op.d_l.transpose();
  rhs.row(op.m - 1) += d2.c[op.m - 1] * op.d_r.transpose();
  return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff());
}

struct Geometry {
  std::string name;
  SystemSpec spec;
  Vec p;
};

std::vector<Geometry> three_geometries(int order) {
  std::vector<Geometry> g;
  CircleParams cp;
  cp.order = order;
  cp.m = order == 4 ? 13 : 17;
  cp.n = order == 4 ? 9 : 13;
  g.push_back({"circle", circle_system(cp), Vec()});
  BathymetryParams bp;
  bp.order = order;
  bp.m_x = 15;
  bp.m_y = 13;
  auto bs = bathymetry_system(bp);
  g.push_back({"bathymetry", bs, 0.5 * bathymetry_truth_vector(bp.m_x)});
  HornParams hp;
  hp.order = order;
  if (order == 6) hp.m_guide = hp.m_low = 13;
  auto hs = horn_system(hp);
  Vec hpv(design_size(hs));
  for (int i = 0; i < hpv.size(); ++i) hpv[i] = 0.02 * std::sin(M_PI * (i + 1) / (hpv.size() + 1));
  g.push_back({"horn", hs, hpv});
  return g;
}

Outcome criterion1() {
  double d1 = 0, d2 = 0, proj = 0, sa = 0;
  for (int order : {4, 6}) {
    for (int m : {minimum_points(order), 21, 41}) {
      auto op = build_first_derivative(m, 1.0 / (m - 1), order);
      d1 = std::max(d1, def1_residual(op));
      Vec c = Vec::Ones(m) + 0.5 * random_vec(m, m).cwiseAbs();
      d2 = std::max(d2, def2_residual(op, build_second_derivative(op, c)));
    }
    for (const auto& geo : three_geometries(order)) {
      auto sys = assemble_global(geo.spec, geo.p);
      for (unsigned s = 0; s < 3; ++s) {
        const Vec u = random_vec(sys.N, 10 * s + 1), v = random_vec(sys.N, 10 * s + 2);
        const Vec Pu = sys.project(u);
        proj = std::max(proj, (sys.project(Pu) - Pu).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff());
        if (sys.P.rank() > 0) proj = std::max(proj, (sys.P.L() * Pu).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff());
        // (u, D v) = (D u, v) and (u, E v) = (E u, v) in the Hbar inner product
        const Vec Du = sys.apply_D(u), Dv = sys.apply_D(v), Eu = sys.apply_E(u), Ev = sys.apply_E(v);
        const double nD = std::sqrt(sys.inner(u, u) * sys.inner(Dv, Dv)) + std::sqrt(sys.inner(v, v) * sys.inner(Du, Du));
        const double nE = std::sqrt(sys.inner(u, u) * sys.inner(Ev, Ev)) + std::sqrt(sys.inner(v, v) * sys.inner(Eu, Eu));
        sa = std::max(sa, std::abs(sys.inner(u, Dv) - sys.inner(Du, v)) / nD);
        if (nE > 0) sa = std::max(sa, std::abs(sys.inner(u, Ev) - sys.inner(Eu, v)) / nE);
      }
    }
  }
  Outcome o;
  o.pass = d1 <= kDef1Tol && d2 <= kDef2Tol && proj <= kProjTol && sa <= kSelfAdjTol;
  o.detail = fmt::format("first-derivative identity {:.1e}, second-derivative identity {:.1e}, projection {:.1e}, "
                         "self-adjointness {:.1e}",
                         d1, d2, proj, sa);
  return o;
}

// ---------------------------------------------------------------------------

Outcome criterion2() {
  BathymetryParams bp;  // 41 x 21 blocks
  auto sys = assemble_global(bathymetry_system(bp), bathymetry_truth_vector(bp.m_x));
  // random combination of smooth modes
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::array<double, 4>> modes;
  for (int k = 0; k < 6; ++k) modes.push_back({u(gen), u(gen), 1 + 3 * std::abs(u(gen)), 1 + 3 * std::abs(u(gen))});
  auto field = [&](double x, double y) {
    double v = 0;
    for (const auto& m : modes) v += m[0] * std::sin(m[2] * M_PI * x + m[1]) * std::cos(m[3] * M_PI * y);
    return v;
  };
  ForwardOptions o;
  o.dt = stable_dt(sys);
  o.T = kEnergySteps * o.dt;
  o.energy = true;
  o.initial = std::make_pair(sys.project(sample(sys, field)), Vec(0.3 * sys.project(sample(sys, [&](double x, double y) {
                                                                      return field(y, x);
                                                                    }))));
  auto tr = solve_forward(sys, Forcing{}, o);
  const double e0 = tr.energy.front();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < tr.energy.size(); ++k) worst = std::max(worst, tr.energy[k] - tr.energy[k - 1]);
  Outcome out;
  out.pass = tr.n_steps == kEnergySteps && e0 > 0 && worst <= kEnergyTol * e0;
  out.detail = fmt::format("{} steps, E(T)/E(0) = {:.3e}, worst per-step increase {:.2e} E(0)", tr.n_steps,
                           tr.energy.back() / e0, worst / e0);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<ConvergenceRow> table_rows(int order) {
  ConvergenceConfig c;
  c.order = order;
  for (auto g : kTableGrids) c.grids.push_back(g);
  return run_convergence(c);
}

Outcome criterion3(const std::vector<ConvergenceRow>& r4, const std::vector<ConvergenceRow>& r6) {
  bool ok = true;
  std::string d;
  for (std::size_t k = 0; k < r4.size(); ++k) {
    const auto& t = kTable[k];
    const bool n_ok = r4[k].N == t.N && r6[k].N == t.N;
    const double d4 = r4[k].log10_error() - t.e4, d6 = r6[k].log10_error() - t.e6;
    ok = ok && n_ok && std::abs(d4) <= kTableTol && std::abs(d6) <= kTableTol;
    d += fmt::format("N={}: e4 {:.2f} ({:+.2f}), e6 {:.2f} ({:+.2f}); ", r4[k].N, r4[k].log10_error(), d4,
                     r6[k].log10_error(), d6);
  }
  for (std::size_t k = 1; k < r4.size(); ++k) {
    ok = ok && r4[k].rate >= kQ4Lo && r4[k].rate <= kQ4Hi && r6[k].rate >= kQ6Lo && r6[k].rate <= kQ6Hi;
  }
  d += fmt::format("q4 {:.2f}, {:.2f}; q6 {:.2f}, {:.2f}", r4[1].rate, r4[2].rate, r6[1].rate, r6[2].rate);
  return {ok, d};
}

// ---------------------------------------------------------------------------

Outcome criterion4(const std::vector<GradientCheckRow>& rows) {
  bool ok = rows.size() == 3;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    ok = ok && rows[k].rel_error <= kGradTol;
    if (k > 0) ok = ok && rows[k].rel_error < rows[k - 1].rel_error;
  }
  std::string d = "relative error";
  for (const auto& r : rows) d += fmt::format(" {:.2e}", r.rel_error);
  d += " at dt, dt/2, dt/4";
  return {ok, d};
}

GradientCheckConfig gradient_config() {
  GradientCheckConfig c;  // 11 x 8 blocks, eps 1e-5, dt = stable/4, /8, /16
  c.eps = 1e-5;
  return c;
}

// ---------------------------------------------------------------------------

struct DerivativeSample {
  int i;
  double errD, errE;
};

std::vector<DerivativeSample> derivative_samples() {
  BathymetryParams bp;
  bp.m_x = 11;
  bp.m_y = 8;
  bp.c = 1.3;
  auto spec = bathymetry_system(bp);
  const Vec p = 0.5 * bathymetry_truth_vector(bp.m_x);
  auto sys = assemble_global(spec, p);
  const Vec w = sys.project(sample(sys, [](double x, double y) { return std::sin(3 * x + 0.3) * std::cos(2 * y); })) +
                0.01 * Vec::Ones(sys.N);
  std::mt19937 gen(77);
  std::vector<int> idx(bp.m_x);
  for (int i = 0; i < bp.m_x; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), gen);
  std::vector<DerivativeSample> out;
  for (int k = 0; k < kDerivSamples; ++k) {
    const int i = idx[k];
    auto d = shape_derivative(sys, i);
    Vec pp = p, pm = p;
    pp[i] += kDerivEps;
    pm[i] -= kDerivEps;
    auto sp = assemble_global(spec, pp), sm = assemble_global(spec, pm);
    const Vec fdD = (sp.apply_D(w) - sm.apply_D(w)) / (2 * kDerivEps);
    const Vec fdE = (sp.apply_E(w) - sm.apply_E(w)) / (2 * kDerivEps);
    // dE vanishes for columns away from the outflow edges; measure against the operator scale
    out.push_back({i, (apply_dD(sys, d, w) - fdD).norm() / fdD.norm(),
                   (apply_dE(sys, d, w) - fdE).norm() / std::max(fdE.norm(), sys.apply_E(w).norm())});
  }
  return out;
}

Outcome criterion5(const std::vector<DerivativeSample>& s) {
  double wD = 0, wE = 0;
  std::string cols;
  for (const auto& x : s) {
    wD = std::max(wD, x.errD);
    wE = std::max(wE, x.errE);
    cols += fmt::format("{}{}", cols.empty() ? "" : ",", x.i);
  }
  return {wD <= kDerivTol && wE <= kDerivTol,
          fmt::format("columns {}: worst dD {:.1e}, worst dE {:.1e}", cols, wD, wE)};
}

// ---------------------------------------------------------------------------

Outcome criterion6(const std::string& config) {
  BathymetryConfig c = config.empty() ? BathymetryConfig{} : load_bathymetry_config(config);
  if (config.empty()) {
    c.data_grid = {161, 81, 6, 1.0};
    c.optimizer.max_iter = 300;
    c.optimizer.initial_step = 0.05;
  }
  auto r = run_bathymetry(c);
  const double orders = std::log10(r.J0 / r.opt.J);
  const double factor = r.error0 / r.error;
  Outcome o;
  o.pass = r.opt.converged && orders >= kLossOrders && factor >= kErrorFactor;
  o.detail = fmt::format("{} after {} iterations, loss down {:.2f} orders, seabed error {:.3f} -> {:.3f} ({:.1f}x)",
                         r.opt.reason, r.opt.iterations, orders, r.error0, r.error, factor);
  return o;
}

Outcome criterion7(const std::string& config) {
  HornConfig c = config.empty() ? HornConfig{} : load_horn_config(config);
  c.sweep_count = 0;
  auto r = run_horn(c);
  const double orders = r.reflection_orders();
  return {orders >= kHornOrders,
          fmt::format("{} after {} iterations, reflection loss {:.3e} -> {:.3e} ({:.2f} orders)", r.opt.reason,
                      r.opt.iterations, r.reflection0, r.reflection, orders)};
}

// ---------------------------------------------------------------------------

bool same_rows(const std::vector<ConvergenceRow>& a, const std::vector<ConvergenceRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].N != b[k].N || a[k].steps != b[k].steps || a[k].error != b[k].error || a[k].dt != b[k].dt) return false;
  }
  return true;
}

bool same_grad(const std::vector<GradientCheckRow>& a, const std::vector<GradientCheckRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].adjoint != b[k].adjoint || a[k].fd != b[k].fd || a[k].rel_error != b[k].rel_error) return false;
  }
  return true;
}

bool same_deriv(const std::vector<DerivativeSample>& a, const std::vector<DerivativeSample>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].i != b[k].i || a[k].errD != b[k].errD || a[k].errE != b[k].errE) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool run_long = false;
  std::set<int> only;
  std::set<int> expected_fail;
  std::string bathy_cfg, horn_cfg;
  app.add_flag("--long", run_long, "also run the horn optimization (criterion 7)");
  app.add_option("--expect-fail", expected_fail, "known gaps: still reported as FAIL but not counted in the exit code");
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--bathymetry-config", bathy_cfg, "config for criterion 6 (default: desk scale)");
  app.add_option("--horn-config", horn_cfg, "config for criterion 7 (default: 300 Hz, coarse grid)");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int k) { return only.empty() || only.count(k); };

  int failed = 0, unexpected = 0;
  auto report = [&](int k, const std::string& name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double s = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) {
      ++failed;
      if (!expected_fail.count(k)) ++unexpected;
    }
    fmt::print("[{}] {}. {}: {} ({:.1f} s){}\n", o.pass ? "PASS" : "FAIL", k, name, o.detail, s,
               !o.pass && expected_fail.count(k) ? " [known gap]" : "");
    std::fflush(stdout);
  };

  if (want(1)) report(1, "SBP identities, projection and self-adjointness", criterion1);
  if (want(2)) report(2, "energy stability", criterion2);

  std::vector<ConvergenceRow> r4, r6;
  std::vector<GradientCheckRow> grad;
  std::vector<DerivativeSample> deriv;
  auto conv = [&] {
    r4 = table_rows(4);
    r6 = table_rows(6);
  };
  if (want(3)) report(3, "convergence against reference errors", [&] { return conv(), criterion3(r4, r6); });
  if (want(4)) report(4, "adjoint gradient against finite differences", [&] {
    grad = run_gradient_check(gradient_config());
    return criterion4(grad);
  });
  if (want(5)) report(5, "operator derivative actions", [&] { return deriv = derivative_samples(), criterion5(deriv); });
  if (want(6)) report(6, "seabed reconstruction", [&] { return criterion6(bathy_cfg); });
  if (run_long && want(7)) report(7, "horn at 300 Hz", [&] { return criterion7(horn_cfg); });
  if (want(8)) {
    report(8, "determinism", [&] {
      if (r4.empty()) conv();
      if (grad.empty()) grad = run_gradient_check(gradient_config());
      if (deriv.empty()) deriv = derivative_samples();
      const bool a = same_rows(r4, table_rows(4)) && same_rows(r6, table_rows(6));
      const bool b = same_grad(grad, run_gradient_check(gradient_config()));
      const bool c = same_deriv(deriv, derivative_samples());
      return Outcome{a && b && c, fmt::format("repeat runs identical: convergence {}, gradient {}, derivatives {}",
                                              a ? "yes" : "no", b ? "yes" : "no", c ? "yes" : "no")};
    });
  }
  fmt::print("{} criteria failed, {} of them unexpected\n", failed, unexpected);
  return unexpected == 0 ? 0 : 1;
}
