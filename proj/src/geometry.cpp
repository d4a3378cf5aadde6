#include "shapeopt/geometry.hpp"

#include <fmt/format.h>

#include <cmath>

#include "shapeopt/errors.hpp"
#include "shapeopt/grid_ops.hpp"

namespace shapeopt {

namespace {

constexpr double kFoldThreshold = 1e-12;

Eigen::Vector2d rotate_quarter(const Eigen::Vector2d& v, int turns) {
  double x = v.x(), y = v.y();
  for (int t = 0; t < ((turns % 4) + 4) % 4; ++t) {
    const double nx = -y;
    y = x;
    x = nx;
  }
  return {x, y};
}

}  // namespace

const char* side_name(Side s) {
  switch (s) {
    case Side::West: return "west";
    case Side::East: return "east";
    case Side::South: return "south";
    case Side::North: return "north";
  }
  return "?";
}

Side parse_side(const std::string& s) {
  if (s == "west") return Side::West;
  if (s == "east") return Side::East;
  if (s == "south") return Side::South;
  if (s == "north") return Side::North;
  throw ConfigError(fmt::format("unknown block side '{}'", s));
}

EdgeCurve EdgeCurve::line(Eigen::Vector2d a, Eigen::Vector2d b) {
  EdgeCurve c;
  c.kind = Kind::Line;
  c.a = a;
  c.b = b;
  return c;
}

EdgeCurve EdgeCurve::arc(Eigen::Vector2d center, double radius, double theta0, double theta1) {
  EdgeCurve c;
  c.kind = Kind::Arc;
  c.center = center;
  c.radius = radius;
  c.theta0 = theta0;
  c.theta1 = theta1;
  c.a = center + radius * Eigen::Vector2d(std::cos(theta0), std::sin(theta0));
  c.b = center + radius * Eigen::Vector2d(std::cos(theta1), std::sin(theta1));
  return c;
}

Eigen::Vector2d EdgeCurve::at(double s) const {
  if (kind == Kind::Line) {
    if (s == 0.0) return a;
    if (s == 1.0) return b;
    return a + s * (b - a);
  }
  if (s == 0.0) return a;
  if (s == 1.0) return b;
  const double t = theta0 + s * (theta1 - theta0);
  return center + radius * Eigen::Vector2d(std::cos(t), std::sin(t));
}

void transfinite_map(const Vec& p, int m_xi, int m_eta, double x_l, double x_r, double L_I, Vec& x,
                     Vec& y) {
  if (p.size() != m_xi) {
    throw DimensionError(
        fmt::format("design vector has length {}, expected m_xi = {}", p.size(), m_xi));
  }
  if (m_xi < 2 || m_eta < 2 || !(x_r > x_l)) {
    throw ConfigError("transfinite map needs at least two points per direction and x_r > x_l");
  }
  for (int i = 0; i < m_xi; ++i) {
    if (p[i] >= L_I) {
      throw FoldedMeshError(
          fmt::format("design value p[{}] = {} reaches the interface level {}", i, p[i], L_I),
          static_cast<std::size_t>(i));
    }
  }
  x.resize(m_xi * m_eta);
  y.resize(m_xi * m_eta);
  for (int i = 0; i < m_xi; ++i) {
    const double xi = static_cast<double>(i) / (m_xi - 1);
    for (int j = 0; j < m_eta; ++j) {
      const double eta = static_cast<double>(j) / (m_eta - 1);
      x[node(m_eta, i, j)] = x_l + (x_r - x_l) * xi;
      y[node(m_eta, i, j)] = p[i] + (L_I - p[i]) * eta;
    }
  }
}

double design_shape(const DesignEdge& d, double eta) {
  return d.side == Side::South ? 1.0 - eta : eta;
}

void block_coordinates(const BlockGeometrySpec& spec, const Vec& p, Vec& x, Vec& y) {
  const int mx = spec.m_xi, my = spec.m_eta;
  const auto& S = spec.edges[static_cast<int>(Side::South)];
  const auto& Nn = spec.edges[static_cast<int>(Side::North)];
  const auto& W = spec.edges[static_cast<int>(Side::West)];
  const auto& E = spec.edges[static_cast<int>(Side::East)];
  const Eigen::Vector2d c00 = S.at(0.0), c10 = S.at(1.0), c01 = Nn.at(0.0), c11 = Nn.at(1.0);

  x.resize(mx * my);
  y.resize(mx * my);
  for (int i = 0; i < mx; ++i) {
    const double xi = static_cast<double>(i) / (mx - 1);
    const Eigen::Vector2d s = S.at(xi), n = Nn.at(xi);
    for (int j = 0; j < my; ++j) {
      const double eta = static_cast<double>(j) / (my - 1);
      Eigen::Vector2d q;
      if (j == 0) {
        q = s;
      } else if (j == my - 1) {
        q = n;
      } else if (i == 0) {
        q = W.at(eta);
      } else if (i == mx - 1) {
        q = E.at(eta);
      } else {
        q = (1 - eta) * s + eta * n + (1 - xi) * W.at(eta) + xi * E.at(eta) -
            ((1 - xi) * (1 - eta) * c00 + xi * (1 - eta) * c10 + (1 - xi) * eta * c01 +
             xi * eta * c11);
      }
      q = rotate_quarter(q, spec.quarter_turns);
      x[node(my, i, j)] = q.x();
      y[node(my, i, j)] = q.y();
    }
  }

  if (spec.design.enabled) {
    const auto& d = spec.design;
    if (p.size() != d.count) {
      throw DimensionError(fmt::format("block '{}' expects {} design values, got {}", spec.name,
                                       d.count, p.size()));
    }
    for (int k = 0; k < d.count; ++k) {
      const int col = d.first_col + k;
      for (int j = 0; j < my; ++j) {
        const double eta = static_cast<double>(j) / (my - 1);
        y[node(my, col, j)] += p[k] * design_shape(d, eta);
      }
    }
  }
}

BlockOperators1D reference_operators(int m_xi, int m_eta, int order) {
  if (m_xi < 2 || m_eta < 2) throw ConfigError("block needs at least two points per direction");
  return {build_first_derivative(m_xi, 1.0 / (m_xi - 1), order),
          build_first_derivative(m_eta, 1.0 / (m_eta - 1), order)};
}

CurvilinearBlock compute_metrics(const Vec& x, const Vec& y, const BlockOperators1D& ops) {
  CurvilinearBlock b;
  b.m_xi = ops.xi.m;
  b.m_eta = ops.eta.m;
  const int n = b.size();
  if (x.size() != n || y.size() != n) {
    throw DimensionError(fmt::format("coordinate vectors have length {}/{}, block has {} points",
                                     x.size(), y.size(), n));
  }
  b.x = x;
  b.y = y;
  b.Xxi = apply_xi(ops.xi.D1, x, b.m_eta);
  b.Yxi = apply_xi(ops.xi.D1, y, b.m_eta);
  b.Xeta = apply_eta(ops.eta.D1, x, b.m_eta);
  b.Yeta = apply_eta(ops.eta.D1, y, b.m_eta);
  b.J = b.Xxi.cwiseProduct(b.Yeta) - b.Xeta.cwiseProduct(b.Yxi);
  for (int k = 0; k < n; ++k) {
    if (!(b.J[k] > kFoldThreshold)) {
      throw FoldedMeshError(
          fmt::format("folded mesh: J = {:.3e} at node {} (xi index {}, eta index {})", b.J[k], k,
                      k / b.m_eta, k % b.m_eta),
          static_cast<std::size_t>(k));
    }
  }
  const Vec Jinv = b.J.cwiseInverse();
  b.alpha1 = (b.Xeta.array().square() + b.Yeta.array().square()) * Jinv.array();
  b.beta = -(b.Xxi.array() * b.Xeta.array() + b.Yxi.array() * b.Yeta.array()) * Jinv.array();
  b.alpha2 = (b.Xxi.array().square() + b.Yxi.array().square()) * Jinv.array();
  b.W1 = (b.Xxi.array().square() + b.Yxi.array().square()).sqrt();
  b.W2 = (b.Xeta.array().square() + b.Yeta.array().square()).sqrt();
  return b;
}

MetricSensitivity metric_sensitivity(const CurvilinearBlock& block, const BlockGeometrySpec& spec,
                                     int i, const BlockOperators1D& ops) {
  const auto& d = spec.design;
  if (!d.enabled) {
    throw ConfigError(fmt::format("block '{}' has no design edge", spec.name));
  }
  if (i < 0 || i >= d.count) {
    throw ConfigError(
        fmt::format("design index {} out of range [0, {}) for block '{}'", i, d.count, spec.name));
  }
  const int my = block.m_eta;
  const int col = d.first_col + i;

  // Rows of D_xi that read column col.
  int lo = col, hi = col;
  for (int r = 0; r < ops.xi.m; ++r) {
    for (SpMat::InnerIterator it(ops.xi.D1, r); it; ++it) {
      if (it.col() == col && it.value() != 0.0) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  }

  MetricSensitivity s;
  s.index = i;
  s.col_lo = lo;
  s.col_hi = hi;
  const int w = (hi - lo + 1) * my;
  s.dx = Vec::Zero(w);
  s.dy = Vec::Zero(w);
  s.dXxi = Vec::Zero(w);
  s.dXeta = Vec::Zero(w);
  s.dYxi = Vec::Zero(w);
  s.dYeta = Vec::Zero(w);

  Vec phi(my);
  for (int j = 0; j < my; ++j) phi[j] = design_shape(d, static_cast<double>(j) / (my - 1));
  s.dy.segment((col - lo) * my, my) = phi;
  const Vec dphi = ops.eta.D1 * phi;
  s.dYeta.segment((col - lo) * my, my) = dphi;
  for (int r = lo; r <= hi; ++r) {
    double coef = 0.0;
    for (SpMat::InnerIterator it(ops.xi.D1, r); it; ++it) {
      if (it.col() == col) coef = it.value();
    }
    s.dYxi.segment((r - lo) * my, my) = coef * phi;
  }

  const int off = lo * my;
  auto seg = [&](const Vec& v) { return v.segment(off, w).array(); };
  const auto J = seg(block.J);
  s.dJ = seg(block.Xxi) * s.dYeta.array() - seg(block.Xeta) * s.dYxi.array();
  s.dalpha1 = (2.0 * seg(block.Yeta) * s.dYeta.array() - seg(block.alpha1) * s.dJ.array()) / J;
  s.dbeta = (-(s.dYxi.array() * seg(block.Yeta) + seg(block.Yxi) * s.dYeta.array()) -
             seg(block.beta) * s.dJ.array()) /
            J;
  s.dalpha2 = (2.0 * seg(block.Yxi) * s.dYxi.array() - seg(block.alpha2) * s.dJ.array()) / J;
  s.dW1 = seg(block.Yxi) * s.dYxi.array() / seg(block.W1);
  s.dW2 = seg(block.Yeta) * s.dYeta.array() / seg(block.W2);
  return s;
}

}  // namespace shapeopt
