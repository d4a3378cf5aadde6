#include "shapeopt/problems.hpp"

#include <fmt/format.h>

#include <cmath>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

using V2 = Eigen::Vector2d;

BlockGeometrySpec quad(const std::string& name, V2 p00, V2 p10, V2 p11, V2 p01, int mx, int my,
                       int order) {
  BlockGeometrySpec s;
  s.name = name;
  s.m_xi = mx;
  s.m_eta = my;
  s.order = order;
  s.edges[static_cast<int>(Side::South)] = EdgeCurve::line(p00, p10);
  s.edges[static_cast<int>(Side::North)] = EdgeCurve::line(p01, p11);
  s.edges[static_cast<int>(Side::West)] = EdgeCurve::line(p00, p01);
  s.edges[static_cast<int>(Side::East)] = EdgeCurve::line(p10, p11);
  return s;
}

void check_min(int m, int order, const std::string& what) {
  if (m < minimum_points(order)) {
    throw ConfigError(fmt::format("{} has {} points; order {} needs at least {}", what, m, order,
                                  minimum_points(order)));
  }
}

constexpr EdgeTag kI = EdgeTag::Interface;

}  // namespace

SystemSpec circle_system(const CircleParams& prm) {
  check_min(prm.m, prm.order, "circle tangential direction");
  check_min(prm.n, prm.order, "circle radial direction");
  if (!(prm.R > 0.0) || !(prm.s > 0.0 && prm.s < 1.0)) {
    throw ConfigError("circle needs R > 0 and 0 < s < 1");
  }
  const double a = prm.R * prm.s / std::sqrt(2.0);
  const double t = M_PI / 4;
  SystemSpec spec;
  spec.c = 1.0;
  spec.blocks.push_back(quad("center", {-a, -a}, {a, -a}, {a, a}, {-a, a}, prm.m, prm.m, prm.order));

  BlockGeometrySpec east;
  east.m_xi = prm.n;
  east.m_eta = prm.m;
  east.order = prm.order;
  auto arc = EdgeCurve::arc({0, 0}, prm.R, -t, t);
  east.edges[static_cast<int>(Side::West)] = EdgeCurve::line({a, -a}, {a, a});
  east.edges[static_cast<int>(Side::East)] = arc;
  east.edges[static_cast<int>(Side::South)] = EdgeCurve::line({a, -a}, arc.a);
  east.edges[static_cast<int>(Side::North)] = EdgeCurve::line({a, a}, arc.b);
  const char* names[4] = {"east", "north", "west", "south"};
  for (int k = 0; k < 4; ++k) {
    auto b = east;
    b.name = names[k];
    b.quarter_turns = k;
    spec.blocks.push_back(b);
  }
  const EdgeTag D = EdgeTag::Dirichlet;
  spec.tags = {{kI, kI, kI, kI}, {kI, D, kI, kI}, {kI, D, kI, kI}, {kI, D, kI, kI}, {kI, D, kI, kI}};
  // center edges facing each outer block (outer block k sits k quarter turns
  // from the east)
  const Side facing[4] = {Side::East, Side::North, Side::West, Side::South};
  for (int k = 0; k < 4; ++k) {
    spec.interfaces.push_back({0, facing[k], 1 + k, Side::West});
    spec.interfaces.push_back({1 + k, Side::North, 1 + (k + 1) % 4, Side::South});
  }
  return spec;
}

SystemSpec bathymetry_system(const BathymetryParams& prm) {
  check_min(prm.m_x, prm.order, "bathymetry x direction");
  check_min(prm.m_y, prm.order, "bathymetry y direction");
  SystemSpec spec;
  spec.c = prm.c;
  auto up = quad("upper", {0, 0.5}, {1, 0.5}, {1, 1}, {0, 1}, prm.m_x, prm.m_y, prm.order);
  auto lo = quad("seabed", {0, 0}, {1, 0}, {1, 0.5}, {0, 0.5}, prm.m_x, prm.m_y, prm.order);
  lo.design = {true, Side::South, 0, prm.m_x};
  spec.blocks = {up, lo};
  const EdgeTag O = EdgeTag::Outflow;
  spec.tags = {{O, O, kI, EdgeTag::Dirichlet}, {O, O, EdgeTag::Neumann, kI}};
  spec.interfaces = {{0, Side::South, 1, Side::North}};
  return spec;
}

double bathymetry_truth(double x) {
  return 0.12 * std::exp(-std::pow((x - 0.3) / 0.2, 2)) + 0.1 * std::exp(-std::pow((x - 0.72) / 0.18, 2));
}

Vec bathymetry_truth_vector(int m_x) {
  Vec p(m_x);
  for (int i = 0; i < m_x; ++i) p[i] = bathymetry_truth(static_cast<double>(i) / (m_x - 1));
  return p;
}

SystemSpec horn_system(const HornParams& prm) {
  check_min(prm.m_guide, prm.order, "horn waveguide length");
  check_min(prm.m_flare, prm.order, "horn flare length");
  check_min(prm.m_box, prm.order, "horn box width");
  check_min(prm.m_low, prm.order, "horn cross direction");
  check_min(prm.m_upper, prm.order, "horn upper box height");
  const int o = prm.order;
  SystemSpec spec;
  spec.c = prm.c;
  auto g1 = quad("guide1", {0, 0}, {0.25, 0}, {0.25, 0.05}, {0, 0.05}, prm.m_guide, prm.m_low, o);
  auto g2 = quad("guide2", {0.25, 0}, {0.5, 0}, {0.5, 0.05}, {0.25, 0.05}, prm.m_guide, prm.m_low, o);
  auto fl = quad("flare", {0.5, 0}, {1, 0}, {1, 0.3}, {0.5, 0.05}, prm.m_flare, prm.m_low, o);
  fl.design = {true, Side::North, 1, prm.m_flare - 2};
  auto fr = quad("front", {1, 0}, {1.5, 0}, {1.5, 0.3}, {1, 0.3}, prm.m_box, prm.m_low, o);
  auto up = quad("upper", {1, 0.3}, {1.5, 0.3}, {1.5, 0.8}, {1, 0.8}, prm.m_box, prm.m_upper, o);
  spec.blocks = {g1, g2, fl, fr, up};
  const EdgeTag W = EdgeTag::Neumann, S = EdgeTag::Symmetry, O = EdgeTag::Outflow;
  spec.tags = {{EdgeTag::Inflow, kI, S, W}, {kI, kI, S, W}, {kI, kI, S, W}, {kI, O, S, kI}, {W, O, kI, O}};
  spec.interfaces = {{0, Side::East, 1, Side::West},
                     {1, Side::East, 2, Side::West},
                     {2, Side::East, 3, Side::West},
                     {3, Side::North, 4, Side::South}};
  return spec;
}

Vec design_edge_x(const SystemSpec& spec, int block) {
  const auto& b = spec.blocks.at(block);
  if (!b.design.enabled) throw ConfigError(fmt::format("block '{}' has no design edge", b.name));
  const auto& e = b.edges[static_cast<int>(b.design.side)];
  Vec x(b.m_xi);
  for (int i = 0; i < b.m_xi; ++i) x[i] = e.at(static_cast<double>(i) / (b.m_xi - 1)).x();
  return x;
}

SpMat receiver_row(const GlobalSystem& sys, double x, double y) {
  const Vec d = build_point_source(sys, x, y);
  std::vector<Eigen::Triplet<double>> t;
  for (int k = 0; k < sys.N; ++k) {
    if (d[k] != 0.0) t.emplace_back(0, k, d[k] * sys.Hbar[k]);
  }
  SpMat Q(1, sys.N);
  Q.setFromTriplets(t.begin(), t.end());
  return Q;
}

SpMat edge_selector(const GlobalSystem& sys, int block, Side side) {
  const auto& e = sys.blocks.at(block).edges[static_cast<int>(side)];
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t q = 0; q < e.nodes.size(); ++q) t.emplace_back(q, sys.offsets[block] + e.nodes[q], 1.0);
  SpMat S(static_cast<int>(e.nodes.size()), sys.N);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

Vec edge_weights(const GlobalSystem& sys, int block, Side side) {
  return sys.blocks.at(block).edges[static_cast<int>(side)].Hk;
}

Vec sample(const GlobalSystem& sys, const std::function<double(double, double)>& u) {
  Vec v(sys.N);
  for (std::size_t b = 0; b < sys.blocks.size(); ++b) {
    const auto& g = sys.blocks[b].geo;
    for (int n = 0; n < g.size(); ++n) v[sys.offsets[b] + n] = u(g.x[n], g.y[n]);
  }
  return v;
}

}  // namespace shapeopt
