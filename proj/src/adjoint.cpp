#include "shapeopt/adjoint.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

using Triplet = Eigen::Triplet<double>;

Vec widen(const Vec& v, int lo, int n) {
  Vec out = Vec::Zero(n);
  out.segment(lo, v.size()) = v;
  return out;
}

}  // namespace

std::pair<int, int> locate_design(const SystemSpec& spec, int i) {
  int off = 0;
  for (int b = 0; b < static_cast<int>(spec.blocks.size()); ++b) {
    const auto& d = spec.blocks[b].design;
    if (!d.enabled) continue;
    if (i < off + d.count) return {b, i - off};
    off += d.count;
  }
  throw ConfigError(fmt::format("design index {} out of range [0, {})", i, off));
}

ShapeDerivative shape_derivative(const GlobalSystem& sys, int i) {
  if (i < 0) throw ConfigError(fmt::format("design index {} out of range", i));
  const auto [b, li] = locate_design(sys.spec, i);
  const auto& blk = sys.blocks[b];
  const auto& bs = sys.spec.blocks[b];
  const int n = blk.size(), my = blk.m_eta, o = sys.offsets[b];
  const MetricSensitivity ms = metric_sensitivity(blk.geo, bs, li, blk.ops);
  const int lo = ms.col_lo * my;
  const Vec da1 = widen(ms.dalpha1, lo, n), da2 = widen(ms.dalpha2, lo, n), dbeta = widen(ms.dbeta, lo, n);
  const Vec dW1 = widen(ms.dW1, lo, n), dW2 = widen(ms.dW2, lo, n);
  const BlockForms forms = block_forms(blk.ops, blk.Hvol, da1, da2, dbeta, true);

  ShapeDerivative d;
  d.index = i;
  d.dHbar = Vec::Zero(sys.N);
  d.dHbar.segment(o, n) = blk.Hvol.cwiseProduct(widen(ms.dJ, lo, n));
  d.dB = Vec::Zero(sys.N);

  auto edge_dHk = [&](Side s) {
    const auto& e = blk.edges[static_cast<int>(s)];
    const bool vertical = (s == Side::West || s == Side::East);
    Vec dHk(static_cast<int>(e.nodes.size()));
    for (int q = 0; q < dHk.size(); ++q) dHk[q] = e.Hedge[q] * (vertical ? dW2[e.nodes[q]] : dW1[e.nodes[q]]);
    return dHk;
  };

  std::vector<Triplet> t;
  for (int r = 0; r < forms.K.rows(); ++r) {
    for (SpMat::InnerIterator it(forms.K, r); it; ++it) t.emplace_back(o + r, o + it.col(), it.value());
  }
  for (int s = 0; s < 4; ++s) {
    const EdgeTag tag = sys.spec.tags[b][s];
    if (tag == EdgeTag::Dirichlet || tag == EdgeTag::Interface) continue;
    const auto& e = blk.edges[s];
    const SpMat& dF = forms.F[s];
    for (int q = 0; q < dF.rows(); ++q) {
      for (SpMat::InnerIterator it(dF, q); it; ++it) t.emplace_back(o + e.nodes[q], o + it.col(), -it.value());
    }
    if (tag == EdgeTag::Outflow || tag == EdgeTag::Inflow) {
      const Vec dHk = edge_dHk(static_cast<Side>(s));
      if (tag == EdgeTag::Inflow && !dHk.isZero(0.0)) {
        throw ConfigError(fmt::format("block '{}': an inflow edge that moves with the design is not supported", bs.name));
      }
      for (int q = 0; q < dHk.size(); ++q) d.dB[o + e.nodes[q]] -= dHk[q];
    }
  }
  for (const auto& im : sys.interfaces) {
    const auto& is = im.spec;
    const bool on_a = is.block_a == b, on_b = is.block_b == b;
    if (!on_a && !on_b) continue;
    const auto& ea = sys.blocks[is.block_a].edges[static_cast<int>(is.side_a)];
    const auto& eb = sys.blocks[is.block_b].edges[static_cast<int>(is.side_b)];
    const int oa = sys.offsets[is.block_a], ob = sys.offsets[is.block_b];
    const int m = static_cast<int>(ea.nodes.size());
    const Vec dHa = on_a ? edge_dHk(is.side_a) : Vec(Vec::Zero(m));
    const Vec dHb = on_b ? edge_dHk(is.side_b) : Vec(Vec::Zero(m));
    for (int q = 0; q < m; ++q) {
      const int row = oa + ea.nodes[q];
      const int qb = im.perm[q];
      if (on_a) {
        const SpMat& dF = forms.F[static_cast<int>(is.side_a)];
        for (SpMat::InnerIterator it(dF, q); it; ++it) t.emplace_back(row, oa + it.col(), -it.value());
      }
      const double ratio = ea.Hk[q] / eb.Hk[qb];
      const double dratio = dHa[q] / eb.Hk[qb] - ea.Hk[q] * dHb[qb] / (eb.Hk[qb] * eb.Hk[qb]);
      if (dratio != 0.0) {
        for (SpMat::InnerIterator it(eb.F, qb); it; ++it) t.emplace_back(row, ob + it.col(), -dratio * it.value());
      }
      if (on_b) {
        const SpMat& dF = forms.F[static_cast<int>(is.side_b)];
        for (SpMat::InnerIterator it(dF, qb); it; ++it) t.emplace_back(row, ob + it.col(), -ratio * it.value());
      }
    }
  }
  d.dK.resize(sys.N, sys.N);
  d.dK.setFromTriplets(t.begin(), t.end());
  d.dK.prune(0.0);
  return d;
}

std::vector<ShapeDerivative> shape_derivatives(const GlobalSystem& sys) {
  std::vector<ShapeDerivative> out;
  const int m = design_size(sys.spec);
  out.reserve(m);
  for (int i = 0; i < m; ++i) out.push_back(shape_derivative(sys, i));
  return out;
}

Vec apply_dP(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& u) {
  const Vec q = u - sys.project(u);
  return sys.project(sys.Hbar_inv.cwiseProduct(d.dHbar.cwiseProduct(q)));
}

Vec apply_dD(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& w) {
  const Vec pw = sys.project(w);
  const Vec Kpw = sys.K * pw;
  const Vec Apw = sys.Hbar_inv.cwiseProduct(Kpw);
  const Vec dApw = sys.Hbar_inv.cwiseProduct(d.dK * pw) -
                   sys.Hbar_inv.cwiseProduct(d.dHbar.cwiseProduct(Apw));
  const Vec dPw = apply_dP(sys, d, w);
  const Vec r = apply_dP(sys, d, Apw) + sys.project(dApw) + sys.project(sys.apply_A(dPw));
  return sys.c * sys.c * r;
}

Vec apply_dE(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& w) {
  const Vec pw = sys.project(w);
  const Vec Bpw = sys.Hbar_inv.cwiseProduct(sys.Bdiag.cwiseProduct(pw));
  const Vec dBpw = sys.Hbar_inv.cwiseProduct(d.dB.cwiseProduct(pw)) -
                   sys.Hbar_inv.cwiseProduct(d.dHbar.cwiseProduct(Bpw));
  const Vec dPw = apply_dP(sys, d, w);
  const Vec r = apply_dP(sys, d, Bpw) + sys.project(dBpw) +
                sys.project(sys.Hbar_inv.cwiseProduct(sys.Bdiag.cwiseProduct(dPw)));
  return sys.c * r;
}

std::pair<double, double> operator_derivative_actions(const GlobalSystem& sys, const ShapeDerivative& d,
                                                      const Vec& w, const Vec& lambda,
                                                      const Vec& lambda_t) {
  return {sys.inner(lambda, apply_dD(sys, d, w)), sys.inner(lambda_t, apply_dE(sys, d, w))};
}

// ---------------------------------------------------------------------------

Vec Misfit::target_at(double t) const {
  if (!target) return Vec::Zero(Q.rows());
  return target(t);
}

std::function<Vec(double)> linear_series(std::vector<double> times, Eigen::MatrixXd values) {
  if (times.size() < 2 || static_cast<Eigen::Index>(times.size()) != values.rows()) {
    throw ConfigError("sampled series needs at least two samples and one row per sample time");
  }
  if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("sample times must increase");
  return [times = std::move(times), values = std::move(values)](double t) -> Vec {
    if (t <= times.front()) return values.row(0).transpose();
    if (t >= times.back()) return values.row(values.rows() - 1).transpose();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const auto k = static_cast<Eigen::Index>(it - times.begin()) - 1;
    const double a = (t - times[k]) / (times[k + 1] - times[k]);
    return ((1 - a) * values.row(k) + a * values.row(k + 1)).transpose();
  };
}

Eigen::MatrixXd misfit_series(const Trajectory& fwd, const Misfit& m) {
  if (fwd.obs.cols() != m.Q.rows()) throw DimensionError("trajectory was not recorded with this misfit's Q");
  Eigen::MatrixXd r = fwd.obs;
  if (m.target) {
    for (int k = 0; k <= fwd.n_steps; ++k) r.row(k) -= m.target(fwd.time(k)).transpose();
  }
  return r;
}

double data_loss(const Trajectory& fwd, const Misfit& m) {
  const Eigen::MatrixXd r = misfit_series(fwd, m);
  const Vec wq = build_time_quadrature(fwd.n_steps, fwd.dt);
  double J = 0.0;
  for (int k = 0; k <= fwd.n_steps; ++k) J += wq[k] * r.row(k).cwiseAbs2().dot(m.weight);
  return 0.5 * J;
}

Trajectory solve_adjoint(const GlobalSystem& sys, const Trajectory& fwd, const Misfit& m,
                         const AdjointVisitor& visit, bool store_states) {
  const int n = fwd.n_steps;
  const double dt = fwd.dt, T = n * dt;
  const int nobs = static_cast<int>(m.Q.rows());
  if (fwd.obs.rows() != n + 1 || fwd.obs.cols() != nobs || fwd.obs_t.rows() != n + 1) {
    throw DimensionError("forward observations do not match the adjoint grid");
  }
  // residual at any t from a cubic Hermite fit of (Q w, Q w_t)
  auto residual = [&fwd, &m, dt, n](int row, double t) {
    double s = t / dt;
    int k = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
    const double a = s - k;
    const double h00 = (1 + 2 * a) * (1 - a) * (1 - a), h10 = a * (1 - a) * (1 - a);
    const double h01 = a * a * (3 - 2 * a), h11 = a * a * (a - 1);
    double q = h00 * fwd.obs(k, row) + h01 * fwd.obs(k + 1, row) +
               dt * (h10 * fwd.obs_t(k, row) + h11 * fwd.obs_t(k + 1, row));
    if (m.target) q -= m.target(t)[row];
    return q;
  };
  Forcing adj;
  const SpMat Qt = m.Q.transpose();
  for (int r = 0; r < nobs; ++r) {
    Vec v = -sys.Hbar_inv.cwiseProduct(Vec(Qt.col(r)));
    const double wr = m.weight[r];
    adj.add([residual, r, wr, T](double tau) { return wr * residual(r, T - tau); }, std::move(v));
  }

  Trajectory tr;
  tr.dt = dt;
  tr.n_steps = n;
  Vec lam = Vec::Zero(sys.N), lam_t = Vec::Zero(sys.N);
  for (int j = 0; j <= n; ++j) {
    if (visit) visit(j, lam, lam_t);
    if (store_states) {
      tr.w.push_back(lam);
      tr.wt.push_back(lam_t);
      tr.state_step.push_back(j);
    }
    if (j == n) break;
    rk4_step(sys, adj, j * dt, dt, lam, lam_t);
    if (!lam.allFinite() || !lam_t.allFinite()) {
      throw NumericalError(fmt::format("adjoint solution diverged (non-finite values) at step {}", j + 1));
    }
  }
  tr.final_w = lam;
  tr.final_wt = lam_t;
  return tr;
}

Regularizer build_regularizer(const SystemSpec& spec) {
  const int m = design_size(spec);
  Regularizer r;
  r.G = Eigen::MatrixXd::Zero(m, m);
  int off = 0;
  for (const auto& b : spec.blocks) {
    if (!b.design.enabled) continue;
    const int cnt = b.design.count;
    const auto& e = b.edges[static_cast<int>(b.design.side)];
    const double len = std::abs(e.at(1.0).x() - e.at(0.0).x());
    if (cnt >= minimum_points(b.order)) {
      const double h = len / (b.m_xi - 1);
      auto op = build_first_derivative(cnt, h, b.order);
      const Eigen::MatrixXd D2 = Eigen::MatrixXd(build_D2(op, Vec::Ones(cnt)));
      r.G.block(off, off, cnt, cnt) = D2.transpose() * op.H.asDiagonal() * D2;
    }
    off += cnt;
  }
  return r;
}

void GradientReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << "i,total,volume,damping,regularization\n";
  for (int i = 0; i < g.size(); ++i) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, g[i], volume[i], damping[i], regularization[i]);
  }
}

GradientReport compute_gradient(const GlobalSystem& sys, const Forcing& f, const Trajectory& fwd,
                                const Misfit& m, const Regularizer& reg, const Vec& p, double gamma) {
  const int mg = design_size(sys.spec);
  if (p.size() != mg) throw DimensionError("design vector does not match the system");
  const int n = fwd.n_steps;
  const auto derivs = shape_derivatives(sys);
  const Vec wq = build_time_quadrature(n, fwd.dt);
  const double c = sys.c, c2 = c * c;

  // Diagonal parts are contracted once at the end against time-integrated
  // densities; dK needs one sparse product per index and step.
  Vec SH_D = Vec::Zero(sys.N), SH_E = Vec::Zero(sys.N), SB = Vec::Zero(sys.N);
  Vec aK = Vec::Zero(mg);
  StateReader reader(sys, f, fwd);
  auto visit = [&](int j, const Vec& lam, const Vec& lam_tau) {
    const int k = n - j;
    const double wk = wq[k];
    const Vec& w = reader.w(k);
    const Vec pw = sys.project(w);
    const Vec qw = w - pw;
    const Vec pl = sys.project(lam);
    const Vec pm = -sys.project(lam_tau);  // lambda_t(t) = -lambda_tau(T - t)
    const Vec PApw = sys.project(sys.apply_A(pw));
    const Vec PAPl = sys.project(sys.apply_A(pl));
    SH_D += wk * c2 * (PAPl.cwiseProduct(qw) - pl.cwiseProduct(PApw));
    const Vec PBpw = sys.project(sys.Hbar_inv.cwiseProduct(sys.Bdiag.cwiseProduct(pw)));
    const Vec PBpm = sys.project(sys.Hbar_inv.cwiseProduct(sys.Bdiag.cwiseProduct(pm)));
    SH_E += wk * c * (PBpm.cwiseProduct(qw) - pm.cwiseProduct(PBpw));
    SB += wk * c * pm.cwiseProduct(pw);
    for (int i = 0; i < mg; ++i) aK[i] += wk * c2 * pl.dot(derivs[i].dK * pw);
  };
  solve_adjoint(sys, fwd, m, visit);

  GradientReport r;
  r.volume.resize(mg);
  r.damping.resize(mg);
  for (int i = 0; i < mg; ++i) {
    r.volume[i] = -(aK[i] + derivs[i].dHbar.dot(SH_D));
    r.damping[i] = derivs[i].dB.dot(SB) + derivs[i].dHbar.dot(SH_E);
  }
  r.regularization = reg.gradient(p, gamma);
  r.g = r.volume + r.damping + r.regularization;
  if (!r.g.allFinite()) throw NumericalError("gradient has non-finite entries");
  return r;
}

Evaluation evaluate(const LossProblem& prob, const Vec& p, bool gradient) {
  if (!(prob.dt > 0.0)) throw ConfigError("loss problem needs a fixed positive time step");
  if (!(prob.gamma >= 0.0)) throw ConfigError("regularization weight must be non-negative");
  const GlobalSystem sys = assemble_global(prob.spec, p);
  const Forcing f = prob.forcing ? prob.forcing(sys) : Forcing{};
  const Misfit m = prob.misfit(sys);
  if (m.weight.size() != m.Q.rows()) throw DimensionError("misfit weights do not match Q");
  ForwardOptions fo;
  fo.T = prob.T;
  fo.dt = prob.dt;
  fo.observe = m.Q;
  fo.store_states = gradient;
  fo.checkpoint_stride = prob.checkpoint_stride;
  Evaluation ev;
  ev.fwd = solve_forward(sys, f, fo);
  const Regularizer reg = build_regularizer(prob.spec);
  ev.J_data = data_loss(ev.fwd, m);
  ev.J_reg = reg.value(p, prob.gamma);
  ev.J = ev.J_data + ev.J_reg;
  if (gradient) ev.grad = compute_gradient(sys, f, ev.fwd, m, reg, p, prob.gamma);
  return ev;
}

Vec fd_gradient(const std::function<double(const Vec&)>& J, const Vec& p, double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite-difference step must be positive");
  Vec g(p.size());
  for (int i = 0; i < p.size(); ++i) {
    Vec a = p, b = p;
    a[i] += eps;
    b[i] -= eps;
    g[i] = (J(a) - J(b)) / (2.0 * eps);
  }
  return g;
}

}  // namespace shapeopt
