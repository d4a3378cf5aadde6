#include "shapeopt/discretization.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "shapeopt/errors.hpp"
#include "shapeopt/grid_ops.hpp"

namespace shapeopt {

namespace {

using Triplet = Eigen::Triplet<double>;

SpMat kron_xi(const SpMat& D, int m_eta) {
  std::vector<Triplet> t;
  for (int r = 0; r < D.rows(); ++r) {
    for (SpMat::InnerIterator it(D, r); it; ++it) {
      for (int j = 0; j < m_eta; ++j) t.emplace_back(node(m_eta, r, j), node(m_eta, it.col(), j), it.value());
    }
  }
  SpMat A(D.rows() * m_eta, D.cols() * m_eta);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SpMat kron_eta(const SpMat& D, int m_xi) {
  const int m_eta = static_cast<int>(D.rows());
  std::vector<Triplet> t;
  for (int i = 0; i < m_xi; ++i) {
    for (int r = 0; r < m_eta; ++r) {
      for (SpMat::InnerIterator it(D, r); it; ++it) t.emplace_back(node(m_eta, i, r), node(m_eta, i, it.col()), it.value());
    }
  }
  SpMat A(m_xi * m_eta, m_xi * m_eta);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

std::vector<int> edge_nodes(int m_xi, int m_eta, Side s) {
  std::vector<int> n;
  switch (s) {
    case Side::West:
      for (int j = 0; j < m_eta; ++j) n.push_back(node(m_eta, 0, j));
      break;
    case Side::East:
      for (int j = 0; j < m_eta; ++j) n.push_back(node(m_eta, m_xi - 1, j));
      break;
    case Side::South:
      for (int i = 0; i < m_xi; ++i) n.push_back(node(m_eta, i, 0));
      break;
    case Side::North:
      for (int i = 0; i < m_xi; ++i) n.push_back(node(m_eta, i, m_eta - 1));
      break;
  }
  return n;
}

// Flux rows F_k = H_k d_k. West/east use d_l/d_r along xi and D_eta for the
// cross term; south/north the other way around.
SpMat edge_flux(const BlockOperators1D& ops, const Vec& a1, const Vec& a2, const Vec& beta,
                bool cross, Side s) {
  const int mx = ops.xi.m, my = ops.eta.m;
  const auto& ox = ops.xi;
  const auto& oy = ops.eta;
  std::vector<Triplet> t;
  const bool vertical = (s == Side::West || s == Side::East);
  const double sign = (s == Side::West || s == Side::South) ? -1.0 : 1.0;
  const int count = vertical ? my : mx;
  for (int q = 0; q < count; ++q) {
    if (vertical) {
      const int i = (s == Side::West) ? 0 : mx - 1;
      const int n = node(my, i, q);
      const double w = sign * oy.H[q];
      const Vec& d = (s == Side::West) ? ox.d_l : ox.d_r;
      for (int c = 0; c < mx; ++c) {
        if (d[c] != 0.0 && a1[n] != 0.0) t.emplace_back(q, node(my, c, q), w * a1[n] * d[c]);
      }
      if (cross && beta[n] != 0.0) {
        for (SpMat::InnerIterator it(oy.D1, q); it; ++it) {
          t.emplace_back(q, node(my, i, it.col()), w * beta[n] * it.value());
        }
      }
    } else {
      const int j = (s == Side::South) ? 0 : my - 1;
      const int n = node(my, q, j);
      const double w = sign * ox.H[q];
      const Vec& d = (s == Side::South) ? oy.d_l : oy.d_r;
      for (int c = 0; c < my; ++c) {
        if (d[c] != 0.0 && a2[n] != 0.0) t.emplace_back(q, node(my, q, c), w * a2[n] * d[c]);
      }
      if (cross && beta[n] != 0.0) {
        for (SpMat::InnerIterator it(ox.D1, q); it; ++it) {
          t.emplace_back(q, node(my, it.col(), j), w * beta[n] * it.value());
        }
      }
    }
  }
  SpMat F(count, mx * my);
  F.setFromTriplets(t.begin(), t.end());
  return F;
}

struct Rect {
  double x0, y0, Lx, Ly;
};

// Axis-aligned rectangle with straight edges, no rotation and no design.
bool as_rectangle(const BlockGeometrySpec& s, Rect& r) {
  if (s.design.enabled || s.quarter_turns % 4 != 0) return false;
  for (const auto& e : s.edges) {
    if (e.kind != EdgeCurve::Kind::Line) return false;
  }
  const auto& S = s.edges[static_cast<int>(Side::South)];
  const auto& N = s.edges[static_cast<int>(Side::North)];
  const auto& W = s.edges[static_cast<int>(Side::West)];
  const auto& E = s.edges[static_cast<int>(Side::East)];
  const double x0 = S.a.x(), y0 = S.a.y(), x1 = S.b.x(), y1 = N.a.y();
  auto eq = [](double a, double b) { return std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)); };
  if (!(eq(S.b.y(), y0) && eq(N.a.x(), x0) && eq(N.b.x(), x1) && eq(N.b.y(), y1))) return false;
  if (!(eq(W.a.x(), x0) && eq(W.b.x(), x0) && eq(W.a.y(), y0) && eq(W.b.y(), y1))) return false;
  if (!(eq(E.a.x(), x1) && eq(E.b.x(), x1) && eq(E.a.y(), y0) && eq(E.b.y(), y1))) return false;
  if (!(x1 > x0 && y1 > y0)) return false;
  r = {x0, y0, x1 - x0, y1 - y0};
  return true;
}

CurvilinearBlock rectangle_metrics(const Rect& r, int mx, int my) {
  CurvilinearBlock b;
  b.m_xi = mx;
  b.m_eta = my;
  const int n = mx * my;
  b.x.resize(n);
  b.y.resize(n);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) {
      b.x[node(my, i, j)] = r.x0 + r.Lx * i / (mx - 1);
      b.y[node(my, i, j)] = r.y0 + r.Ly * j / (my - 1);
    }
  }
  b.Xxi = Vec::Constant(n, r.Lx);
  b.Yeta = Vec::Constant(n, r.Ly);
  b.Xeta = Vec::Zero(n);
  b.Yxi = Vec::Zero(n);
  b.J = Vec::Constant(n, r.Lx * r.Ly);
  b.alpha1 = Vec::Constant(n, r.Ly / r.Lx);
  b.alpha2 = Vec::Constant(n, r.Lx / r.Ly);
  b.beta = Vec::Zero(n);
  b.W1 = Vec::Constant(n, r.Lx);
  b.W2 = Vec::Constant(n, r.Ly);
  return b;
}

}  // namespace

const char* tag_name(EdgeTag t) {
  switch (t) {
    case EdgeTag::Dirichlet: return "dirichlet";
    case EdgeTag::Neumann: return "neumann";
    case EdgeTag::Outflow: return "outflow";
    case EdgeTag::Inflow: return "inflow";
    case EdgeTag::Interface: return "interface";
    case EdgeTag::Symmetry: return "symmetry";
  }
  return "?";
}

EdgeTag parse_tag(const std::string& s) {
  if (s == "dirichlet") return EdgeTag::Dirichlet;
  if (s == "neumann" || s == "wall") return EdgeTag::Neumann;
  if (s == "outflow") return EdgeTag::Outflow;
  if (s == "inflow") return EdgeTag::Inflow;
  if (s == "interface") return EdgeTag::Interface;
  if (s == "symmetry") return EdgeTag::Symmetry;
  throw ConfigError(fmt::format("unknown edge tag '{}'", s));
}

BlockForms block_forms(const BlockOperators1D& ops, const Vec& Hvol, const Vec& a1, const Vec& a2,
                       const Vec& beta, bool cross) {
  const int mx = ops.xi.m, my = ops.eta.m, n = mx * my;
  BlockForms f;
  std::vector<Triplet> t;
  Vec line(mx);
  for (int j = 0; j < my; ++j) {
    for (int i = 0; i < mx; ++i) line[i] = a1[node(my, i, j)];
    if (line.isZero(0.0)) continue;
    SpMat D2 = build_D2(ops.xi, line);
    for (int i = 0; i < mx; ++i) {
      for (SpMat::InnerIterator it(D2, i); it; ++it) t.emplace_back(node(my, i, j), node(my, it.col(), j), Hvol[node(my, i, j)] * it.value());
    }
  }
  Vec col(my);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) col[j] = a2[node(my, i, j)];
    if (col.isZero(0.0)) continue;
    SpMat D2 = build_D2(ops.eta, col);
    for (int j = 0; j < my; ++j) {
      for (SpMat::InnerIterator it(D2, j); it; ++it) t.emplace_back(node(my, i, j), node(my, i, it.col()), Hvol[node(my, i, j)] * it.value());
    }
  }
  f.K.resize(n, n);
  f.K.setFromTriplets(t.begin(), t.end());
  if (cross && !beta.isZero(0.0)) {
    SpMat Dxi = kron_xi(ops.xi.D1, my);
    SpMat Deta = kron_eta(ops.eta.D1, mx);
    SpMat bDxi = beta.asDiagonal() * Dxi;
    SpMat bDeta = beta.asDiagonal() * Deta;
    SpMat c1 = Deta * bDxi;
    SpMat c2 = Dxi * bDeta;
    SpMat crossK = c1 + c2;
    SpMat Kc = Hvol.asDiagonal() * crossK;
    f.K += Kc;
  }
  f.K.prune(0.0);
  for (Side s : {Side::West, Side::East, Side::South, Side::North}) {
    f.F[static_cast<int>(s)] = edge_flux(ops, a1, a2, beta, cross, s);
  }
  return f;
}

BlockOperators2D assemble_block(const CurvilinearBlock& geo, const BlockOperators1D& ops) {
  BlockOperators2D b;
  b.m_xi = ops.xi.m;
  b.m_eta = ops.eta.m;
  b.ops = ops;
  b.geo = geo;
  const int mx = b.m_xi, my = b.m_eta, n = mx * my;
  if (geo.size() != n) throw DimensionError("metric data does not match the operator sizes");
  for (int k = 0; k < n; ++k) {
    if (!(geo.J[k] > 0.0)) {
      throw FoldedMeshError(fmt::format("folded mesh: J = {:.3e} at node {}", geo.J[k], k),
                            static_cast<std::size_t>(k));
    }
  }
  b.has_cross_terms = geo.beta.cwiseAbs().maxCoeff() > 0.0;

  b.Hvol.resize(n);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) b.Hvol[node(my, i, j)] = ops.xi.H[i] * ops.eta.H[j];
  }
  b.H = b.Hvol.cwiseProduct(geo.J);

  auto forms = block_forms(ops, b.Hvol, geo.alpha1, geo.alpha2, geo.beta, b.has_cross_terms);
  b.K = std::move(forms.K);

  for (Side s : {Side::West, Side::East, Side::South, Side::North}) {
    auto& e = b.edges[static_cast<int>(s)];
    e.nodes = edge_nodes(mx, my, s);
    const bool vertical = (s == Side::West || s == Side::East);
    e.Hedge = vertical ? ops.eta.H : ops.xi.H;
    e.W.resize(static_cast<int>(e.nodes.size()));
    for (int q = 0; q < e.W.size(); ++q) e.W[q] = vertical ? geo.W2[e.nodes[q]] : geo.W1[e.nodes[q]];
    e.Hk = e.Hedge.cwiseProduct(e.W);
    e.F = std::move(forms.F[static_cast<int>(s)]);
  }
  return b;
}

SpMat BlockOperators2D::laplacian() const {
  SpMat L = H.cwiseInverse().asDiagonal() * K;
  return L;
}

SpMat BlockOperators2D::Dx() const {
  SpMat Dxi = kron_xi(ops.xi.D1, m_eta);
  SpMat Deta = kron_eta(ops.eta.D1, m_xi);
  const Vec Jinv = geo.J.cwiseInverse();
  SpMat a = Jinv.cwiseProduct(geo.Yeta).asDiagonal() * Dxi;
  SpMat b = Jinv.cwiseProduct(geo.Yxi).asDiagonal() * Deta;
  SpMat r = a - b;
  return r;
}

SpMat BlockOperators2D::Dy() const {
  SpMat Dxi = kron_xi(ops.xi.D1, m_eta);
  SpMat Deta = kron_eta(ops.eta.D1, m_xi);
  const Vec Jinv = geo.J.cwiseInverse();
  SpMat a = Jinv.cwiseProduct(geo.Xxi).asDiagonal() * Deta;
  SpMat b = Jinv.cwiseProduct(geo.Xeta).asDiagonal() * Dxi;
  SpMat r = a - b;
  return r;
}

SpMat BlockOperators2D::remainder_form() const {
  const int mx = m_xi, my = m_eta;
  std::vector<Triplet> t;
  Vec line(mx);
  for (int j = 0; j < my; ++j) {
    for (int i = 0; i < mx; ++i) line[i] = geo.alpha1[node(my, i, j)];
    SpMat R = build_second_derivative(ops.xi, line).Rc;
    for (int i = 0; i < mx; ++i) {
      for (SpMat::InnerIterator it(R, i); it; ++it) t.emplace_back(node(my, i, j), node(my, it.col(), j), ops.eta.H[j] * it.value());
    }
  }
  Vec col(my);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) col[j] = geo.alpha2[node(my, i, j)];
    SpMat R = build_second_derivative(ops.eta, col).Rc;
    for (int j = 0; j < my; ++j) {
      for (SpMat::InnerIterator it(R, j); it; ++it) t.emplace_back(node(my, i, j), node(my, i, it.col()), ops.xi.H[i] * it.value());
    }
  }
  SpMat R(mx * my, mx * my);
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

SpMat cartesian_laplacian(int m_x, int m_y, double Lx, double Ly, int order) {
  auto ox = build_first_derivative(m_x, Lx / (m_x - 1), order);
  auto oy = build_first_derivative(m_y, Ly / (m_y - 1), order);
  SpMat Dxx = kron_xi(build_D2(ox, Vec::Ones(m_x)), m_y);
  SpMat Dyy = kron_eta(build_D2(oy, Vec::Ones(m_y)), m_x);
  SpMat L = Dxx + Dyy;
  return L;
}

// ---------------------------------------------------------------------------

Projection::Projection(SpMat L, const Vec& Hbar) : Hinv_(Hbar.cwiseInverse()) {
  // drop exact duplicate rows
  std::vector<std::vector<std::pair<int, double>>> rows;
  std::set<std::vector<std::pair<int, double>>> seen;
  for (int r = 0; r < L.rows(); ++r) {
    std::vector<std::pair<int, double>> row;
    for (SpMat::InnerIterator it(L, r); it; ++it) {
      if (it.value() != 0.0) row.push_back({static_cast<int>(it.col()), it.value()});
    }
    if (row.empty()) continue;
    if (seen.insert(row).second) rows.push_back(row);
  }
  std::vector<Triplet> t;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
    for (auto [c, v] : rows[r]) t.emplace_back(r, c, v);
  }
  L_.resize(static_cast<int>(rows.size()), L.cols());
  L_.setFromTriplets(t.begin(), t.end());
  Lt_ = Eigen::SparseMatrix<double>(L_.transpose());
  solver_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  if (L_.rows() == 0) return;
  Eigen::SparseMatrix<double> Lc(L_);
  Eigen::SparseMatrix<double> S = Lc * Hinv_.asDiagonal() * Lt_;
  solver_->compute(S);
  if (solver_->info() != Eigen::Success) {
    throw ConstraintRankError("factorization of L H^{-1} L^T failed");
  }
  const Vec d = solver_->vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  for (int i = 0; i < d.size(); ++i) {
    if (!(d[i] > 1e-12 * dmax)) {
      throw ConstraintRankError(
          fmt::format("constraint matrix is rank deficient (pivot {} of {} is {:.3e}); "
                      "check for duplicated or dependent strong conditions",
                      i, d.size(), d[i]));
    }
  }
}

Vec Projection::apply(const Vec& u) const {
  if (L_.rows() == 0) return u;
  Vec Lu = L_ * u;
  Vec s = solver_->solve(Lu);
  Vec out = u - Hinv_.cwiseProduct(Lt_ * s);
  return out;
}

SpMat build_constraints(int N, const std::vector<std::vector<std::pair<int, int>>>& matches,
                        const std::vector<int>& dirichlet_nodes) {
  std::vector<int> parent(N);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  std::vector<char> touched(N, 0);
  for (const auto& m : matches) {
    for (auto [a, b] : m) {
      touched[a] = touched[b] = 1;
      const int ra = find(a), rb = find(b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }
  std::vector<char> dir(N, 0);
  for (int n : dirichlet_nodes) {
    dir[n] = 1;
    touched[n] = 1;
  }
  std::map<int, std::vector<int>> classes;
  for (int n = 0; n < N; ++n) {
    if (touched[n]) classes[find(n)].push_back(n);
  }
  std::vector<Triplet> t;
  int row = 0;
  for (auto& [root, members] : classes) {
    (void)root;
    const bool fixed = std::any_of(members.begin(), members.end(), [&](int n) { return dir[n] != 0; });
    if (fixed) {
      for (int n : members) t.emplace_back(row++, n, 1.0);
    } else {
      for (std::size_t k = 1; k < members.size(); ++k) {
        t.emplace_back(row, members[0], 1.0);
        t.emplace_back(row, members[k], -1.0);
        ++row;
      }
    }
  }
  SpMat L(row, N);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

// ---------------------------------------------------------------------------

int design_size(const SystemSpec& spec) {
  int n = 0;
  for (const auto& b : spec.blocks) {
    if (b.design.enabled) n += b.design.count;
  }
  return n;
}

GlobalSystem assemble_global(const SystemSpec& spec, const Vec& p) {
  const int nb = static_cast<int>(spec.blocks.size());
  if (nb == 0) throw ConfigError("system has no blocks");
  if (static_cast<int>(spec.tags.size()) != nb) {
    throw TopologyError(fmt::format("{} blocks but {} edge tag sets", nb, spec.tags.size()));
  }
  if (p.size() != design_size(spec)) {
    throw DimensionError(fmt::format("design vector has length {}, the system expects {}", p.size(),
                                     design_size(spec)));
  }
  if (!(spec.c > 0.0)) throw ConfigError("wave speed must be positive");

  GlobalSystem sys;
  sys.spec = spec;
  sys.c = spec.c;
  sys.blocks.reserve(nb);
  int off = 0, poff = 0;
  for (int b = 0; b < nb; ++b) {
    const auto& bs = spec.blocks[b];
    auto ops = reference_operators(bs.m_xi, bs.m_eta, bs.order);
    CurvilinearBlock geo;
    Rect r{};
    if (as_rectangle(bs, r)) {
      geo = rectangle_metrics(r, bs.m_xi, bs.m_eta);
    } else {
      Vec x, y;
      Vec pb = bs.design.enabled ? Vec(p.segment(poff, bs.design.count)) : Vec();
      block_coordinates(bs, pb, x, y);
      try {
        geo = compute_metrics(x, y, ops);
      } catch (const FoldedMeshError& e) {
        throw FoldedMeshError(fmt::format("block '{}': {}", bs.name, e.what()), e.index());
      }
    }
    if (bs.design.enabled) poff += bs.design.count;
    sys.blocks.push_back(assemble_block(geo, ops));
    sys.offsets.push_back(off);
    off += sys.blocks.back().size();
  }
  sys.N = off;
  const int N = sys.N;
  sys.Hbar.resize(N);
  for (int b = 0; b < nb; ++b) sys.Hbar.segment(sys.offsets[b], sys.blocks[b].size()) = sys.blocks[b].H;
  sys.Hbar_inv = sys.Hbar.cwiseInverse();

  // interface bookkeeping
  std::vector<std::array<int, 4>> iface_count(nb, {0, 0, 0, 0});
  for (const auto& is : spec.interfaces) {
    if (is.block_a < 0 || is.block_a >= nb || is.block_b < 0 || is.block_b >= nb) {
      throw TopologyError("interface references an unknown block");
    }
    iface_count[is.block_a][static_cast<int>(is.side_a)]++;
    iface_count[is.block_b][static_cast<int>(is.side_b)]++;
  }
  for (int b = 0; b < nb; ++b) {
    for (int s = 0; s < 4; ++s) {
      const bool tagged_iface = spec.tags[b][s] == EdgeTag::Interface;
      if (tagged_iface && iface_count[b][s] != 1) {
        throw TopologyError(fmt::format("edge {}:{} is tagged interface but appears in {} interface "
                                        "pairs",
                                        spec.blocks[b].name, side_name(static_cast<Side>(s)),
                                        iface_count[b][s]));
      }
      if (!tagged_iface && iface_count[b][s] != 0) {
        throw TopologyError(fmt::format("edge {}:{} is listed in an interface but tagged {}",
                                        spec.blocks[b].name, side_name(static_cast<Side>(s)),
                                        tag_name(spec.tags[b][s])));
      }
    }
  }

  std::vector<std::vector<std::pair<int, int>>> matches;
  for (const auto& is : spec.interfaces) {
    const auto& A = sys.blocks[is.block_a];
    const auto& B = sys.blocks[is.block_b];
    const auto& ea = A.edges[static_cast<int>(is.side_a)];
    const auto& eb = B.edges[static_cast<int>(is.side_b)];
    const std::string label = fmt::format("{}:{} / {}:{}", spec.blocks[is.block_a].name,
                                          side_name(is.side_a), spec.blocks[is.block_b].name,
                                          side_name(is.side_b));
    if (ea.nodes.size() != eb.nodes.size()) {
      throw TopologyError(fmt::format("non-conforming interface {}: {} vs {} points", label,
                                      ea.nodes.size(), eb.nodes.size()));
    }
    const int m = static_cast<int>(ea.nodes.size());
    double scale = 1.0;
    for (int q = 0; q < m; ++q) {
      scale = std::max({scale, std::abs(A.geo.x[ea.nodes[q]]), std::abs(A.geo.y[ea.nodes[q]])});
    }
    const double tol = 1e-12 * scale;
    auto dist = [&](int qa, int qb) {
      return std::hypot(A.geo.x[ea.nodes[qa]] - B.geo.x[eb.nodes[qb]],
                        A.geo.y[ea.nodes[qa]] - B.geo.y[eb.nodes[qb]]);
    };
    bool fwd = true, rev = true;
    for (int q = 0; q < m; ++q) {
      fwd = fwd && dist(q, q) <= tol;
      rev = rev && dist(q, m - 1 - q) <= tol;
    }
    if (!fwd && !rev) {
      throw TopologyError(
          fmt::format("non-conforming interface {}: edge coordinates differ by more than {:.1e}",
                      label, tol));
    }
    InterfaceMap im;
    im.spec = is;
    im.perm.resize(m);
    std::vector<std::pair<int, int>> pairs;
    for (int q = 0; q < m; ++q) {
      im.perm[q] = fwd ? q : m - 1 - q;
      pairs.push_back({sys.offsets[is.block_a] + ea.nodes[q], sys.offsets[is.block_b] + eb.nodes[im.perm[q]]});
    }
    matches.push_back(std::move(pairs));
    sys.interfaces.push_back(std::move(im));
  }

  // K, B and inflow
  std::vector<Triplet> t;
  sys.Bdiag = Vec::Zero(N);
  sys.inflow = Vec::Zero(N);
  std::vector<int> dirichlet;
  for (int b = 0; b < nb; ++b) {
    const auto& blk = sys.blocks[b];
    const int o = sys.offsets[b];
    for (int r = 0; r < blk.K.rows(); ++r) {
      for (SpMat::InnerIterator it(blk.K, r); it; ++it) t.emplace_back(o + r, o + it.col(), it.value());
    }
    for (int s = 0; s < 4; ++s) {
      const auto& e = blk.edges[s];
      const EdgeTag tag = spec.tags[b][s];
      if (tag == EdgeTag::Dirichlet) {
        for (int n : e.nodes) dirichlet.push_back(o + n);
        continue;
      }
      if (tag == EdgeTag::Interface) continue;
      for (int q = 0; q < e.F.rows(); ++q) {
        for (SpMat::InnerIterator it(e.F, q); it; ++it) t.emplace_back(o + e.nodes[q], o + it.col(), -it.value());
      }
      if (tag == EdgeTag::Outflow || tag == EdgeTag::Inflow) {
        for (int q = 0; q < static_cast<int>(e.nodes.size()); ++q) sys.Bdiag[o + e.nodes[q]] -= e.Hk[q];
      }
      if (tag == EdgeTag::Inflow) {
        for (int q = 0; q < static_cast<int>(e.nodes.size()); ++q) {
          sys.inflow[o + e.nodes[q]] += sys.c * e.Hk[q] * sys.Hbar_inv[o + e.nodes[q]];
        }
      }
    }
  }
  for (const auto& im : sys.interfaces) {
    const auto& is = im.spec;
    const auto& ea = sys.blocks[is.block_a].edges[static_cast<int>(is.side_a)];
    const auto& eb = sys.blocks[is.block_b].edges[static_cast<int>(is.side_b)];
    const int oa = sys.offsets[is.block_a], ob = sys.offsets[is.block_b];
    for (int q = 0; q < static_cast<int>(ea.nodes.size()); ++q) {
      const int row = oa + ea.nodes[q];
      for (SpMat::InnerIterator it(ea.F, q); it; ++it) t.emplace_back(row, oa + it.col(), -it.value());
      const int qb = im.perm[q];
      const double ratio = ea.Hk[q] / eb.Hk[qb];
      for (SpMat::InnerIterator it(eb.F, qb); it; ++it) t.emplace_back(row, ob + it.col(), -ratio * it.value());
    }
  }
  sys.K.resize(N, N);
  sys.K.setFromTriplets(t.begin(), t.end());
  sys.K.prune(0.0);

  sys.P = Projection(build_constraints(N, matches, dirichlet), sys.Hbar);
  return sys;
}

Vec GlobalSystem::apply_A(const Vec& u) const { return Hbar_inv.cwiseProduct(K * u); }

Vec GlobalSystem::apply_D(const Vec& u) const {
  Vec pu = P.apply(u);
  Vec r = P.apply(apply_A(pu));
  return c * c * r;
}

Vec GlobalSystem::apply_E(const Vec& u) const {
  Vec pu = P.apply(u);
  Vec r = P.apply(Hbar_inv.cwiseProduct(Bdiag.cwiseProduct(pu)));
  return c * r;
}

double GlobalSystem::inner(const Vec& u, const Vec& v) const {
  return u.dot(Hbar.cwiseProduct(v));
}

int GlobalSystem::block_of(int g) const {
  for (int b = static_cast<int>(offsets.size()) - 1; b >= 0; --b) {
    if (g >= offsets[b]) return b;
  }
  return -1;
}

// ---------------------------------------------------------------------------

Vec discrete_delta_1d(const SbpOperatorSet1D& op, double x0, double x_s) {
  const int m = op.m, q = op.order;
  const double h = op.h;
  const double s = (x_s - x0) / h;
  if (!(s >= 0.0 && s <= m - 1)) {
    throw UnsupportedSourceError(fmt::format("point {} lies outside the grid line", x_s));
  }
  int j0 = static_cast<int>(std::floor(s)) - q / 2 + 1;
  j0 = std::clamp(j0, 0, m - q);
  const double center = j0 + 0.5 * (q - 1);
  Eigen::MatrixXd V(q, q);
  Eigen::VectorXd rhs(q);
  for (int k = 0; k < q; ++k) {
    for (int j = 0; j < q; ++j) V(k, j) = std::pow(j0 + j - center, k);
    rhs[k] = std::pow(s - center, k);
  }
  Eigen::VectorXd a = V.partialPivLu().solve(rhs);
  Vec d = Vec::Zero(m);
  for (int j = 0; j < q; ++j) {
    // snap roundoff so nodal sources are exact unit vectors
    double v = a[j];
    if (std::abs(v) < 1e-14) v = 0.0;
    if (std::abs(v - 1.0) < 1e-14) v = 1.0;
    d[j0 + j] = v / op.H[j0 + j];
  }
  return d;
}

Vec build_point_source(const GlobalSystem& sys, double xs, double ys) {
  for (int b = 0; b < static_cast<int>(sys.blocks.size()); ++b) {
    Rect r{};
    if (!as_rectangle(sys.spec.blocks[b], r)) continue;
    if (xs > r.x0 && xs < r.x0 + r.Lx && ys > r.y0 && ys < r.y0 + r.Ly) {
      const auto& blk = sys.blocks[b];
      auto ox = build_first_derivative(blk.m_xi, r.Lx / (blk.m_xi - 1), blk.ops.xi.order);
      auto oy = build_first_derivative(blk.m_eta, r.Ly / (blk.m_eta - 1), blk.ops.eta.order);
      Vec dx = discrete_delta_1d(ox, r.x0, xs);
      Vec dy = discrete_delta_1d(oy, r.y0, ys);
      Vec d = Vec::Zero(sys.N);
      for (int i = 0; i < blk.m_xi; ++i) {
        if (dx[i] == 0.0) continue;
        for (int j = 0; j < blk.m_eta; ++j) d[sys.offsets[b] + node(blk.m_eta, i, j)] = dx[i] * dy[j];
      }
      return d;
    }
  }
  throw UnsupportedSourceError(fmt::format(
      "point ({}, {}) is not strictly inside a fixed rectangular block; sources and receivers "
      "in mapped or design blocks are not supported",
      xs, ys));
}

}  // namespace shapeopt
