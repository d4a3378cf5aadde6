#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "shapeopt/discretization.hpp"
#include "shapeopt/errors.hpp"

using namespace shapeopt;

namespace {

Vec random_vec(int n, double scale, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = u(gen);
  return v;
}

BlockGeometrySpec rect(const std::string& name, double x0, double y0, double x1, double y1, int mx,
                       int my, int order) {
  BlockGeometrySpec s;
  s.name = name;
  s.m_xi = mx;
  s.m_eta = my;
  s.order = order;
  s.edges[static_cast<int>(Side::South)] = EdgeCurve::line({x0, y0}, {x1, y0});
  s.edges[static_cast<int>(Side::North)] = EdgeCurve::line({x0, y1}, {x1, y1});
  s.edges[static_cast<int>(Side::West)] = EdgeCurve::line({x0, y0}, {x0, y1});
  s.edges[static_cast<int>(Side::East)] = EdgeCurve::line({x1, y0}, {x1, y1});
  return s;
}

// Lower block with a deformable south edge below a fixed rectangle.
SystemSpec layered(int mx, int my, int order, EdgeTag side_tag, EdgeTag bottom, EdgeTag top) {
  SystemSpec s;
  auto lo = rect("lower", 0, 0, 1, 0.5, mx, my, order);
  lo.edges[static_cast<int>(Side::South)] = EdgeCurve::line({0, 0}, {1, 0.1});
  lo.edges[static_cast<int>(Side::East)] = EdgeCurve::line({1, 0.1}, {1, 0.5});
  lo.design = {true, Side::South, 1, mx - 2};
  auto up = rect("upper", 0, 0.5, 1, 1, mx, my, order);
  s.blocks = {lo, up};
  s.tags = {{side_tag, side_tag, bottom, EdgeTag::Interface}, {side_tag, side_tag, EdgeTag::Interface, top}};
  s.interfaces = {{1, Side::South, 0, Side::North}};
  s.c = 1.3;
  return s;
}

Eigen::MatrixXd dense_op(const GlobalSystem& sys, Vec (GlobalSystem::*f)(const Vec&) const) {
  Eigen::MatrixXd M(sys.N, sys.N);
  for (int k = 0; k < sys.N; ++k) M.col(k) = (sys.*f)(Vec::Unit(sys.N, k));
  return M;
}

BlockOperators2D wavy_block(int mx, int my, int order) {
  auto ops = reference_operators(mx, my, order);
  Vec x(mx * my), y(mx * my);
  for (int i = 0; i < mx; ++i) {
    for (int j = 0; j < my; ++j) {
      const double xi = double(i) / (mx - 1), eta = double(j) / (my - 1);
      x[node(my, i, j)] = xi + 0.05 * std::sin(M_PI * eta) + 0.3 * eta;
      y[node(my, i, j)] = 0.8 * eta + 0.07 * std::sin(2 * M_PI * xi) * (1 + eta);
    }
  }
  return assemble_block(compute_metrics(x, y, ops), ops);
}

}  // namespace

TEST_CASE("block operator satisfies the summation-by-parts split") {
  for (int order : {4, 6}) {
    auto b = wavy_block(13, 14, order);
    const Vec u = random_vec(b.size(), 1.0, 1), v = random_vec(b.size(), 1.0, 2);
    const SpMat Dx = b.Dx(), Dy = b.Dy(), R = b.remainder_form();
    double rhs = -(Dx * u).dot(b.H.cwiseProduct(Dx * v)) - (Dy * u).dot(b.H.cwiseProduct(Dy * v)) -
                 u.dot(R * v);
    for (const auto& e : b.edges) {
      Vec eu(e.nodes.size());
      for (int q = 0; q < eu.size(); ++q) eu[q] = u[e.nodes[q]];
      rhs += eu.dot(e.F * v);
    }
    const double lhs = u.dot(b.K * v);
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (1 + std::abs(lhs)));

    // remainder is symmetric positive semidefinite
    Eigen::MatrixXd Rd(R);
    CHECK((Rd - Rd.transpose()).cwiseAbs().maxCoeff() < 1e-11);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Rd + Rd.transpose()));
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("curvilinear operator reduces to the Cartesian one on rectangles") {
  for (int order : {4, 6}) {
    const int mx = 15, my = 13;
    const double Lx = 1.7, Ly = 0.9;
    auto ops = reference_operators(mx, my, order);
    Vec x(mx * my), y(mx * my);
    for (int i = 0; i < mx; ++i) {
      for (int j = 0; j < my; ++j) {
        x[node(my, i, j)] = Lx * i / (mx - 1);
        y[node(my, i, j)] = Ly * j / (my - 1);
      }
    }
    auto b = assemble_block(compute_metrics(x, y, ops), ops);
    Eigen::MatrixXd C(cartesian_laplacian(mx, my, Lx, Ly, order));
    Eigen::MatrixXd L(b.laplacian());
    CHECK((C - L).cwiseAbs().maxCoeff() <= 1e-12 * C.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("projection is an H-orthogonal projector onto the constraint kernel") {
  auto spec = layered(12, 10, 4, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Dirichlet);
  auto sys = assemble_global(spec, random_vec(design_size(spec), 0.02, 5));
  const Vec u = random_vec(sys.N, 1.0, 11), v = random_vec(sys.N, 1.0, 12);
  const Vec Pu = sys.project(u);
  CHECK((sys.project(Pu) - Pu).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((sys.P.L() * Pu).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(std::abs(sys.inner(Pu, v) - sys.inner(u, sys.project(v))) < 1e-13);
  // interface + Dirichlet rows: 12 interface nodes, 12 Dirichlet nodes
  CHECK(sys.P.rank() == 24);
}

TEST_CASE("spatial operator is self-adjoint and dissipative terms are non-positive") {
  for (int order : {4, 6}) {
    const int m = order == 4 ? 10 : 13;
    for (EdgeTag side : {EdgeTag::Neumann, EdgeTag::Outflow, EdgeTag::Dirichlet}) {
      auto spec = layered(m + 1, m, order, side, EdgeTag::Neumann, EdgeTag::Outflow);
      auto sys = assemble_global(spec, random_vec(design_size(spec), 0.03, 9));
      Eigen::MatrixXd D = dense_op(sys, &GlobalSystem::apply_D);
      Eigen::MatrixXd E = dense_op(sys, &GlobalSystem::apply_E);
      Eigen::MatrixXd H = sys.Hbar.asDiagonal();
      Eigen::MatrixXd HD = H * D, HE = H * E;
      const double scale = HD.cwiseAbs().maxCoeff();
      CHECK((HD - HD.transpose()).cwiseAbs().maxCoeff() <= 1e-11 * scale);
      CHECK((HE - HE.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ed(0.5 * (HD + HD.transpose()));
      CHECK(ed.eigenvalues().maxCoeff() <= 1e-10 * scale);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ee(0.5 * (HE + HE.transpose()));
      CHECK(ee.eigenvalues().maxCoeff() <= 1e-13);
    }
  }
}

TEST_CASE("constants are in the kernel without Dirichlet data") {
  auto spec = layered(12, 10, 4, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Outflow);
  auto sys = assemble_global(spec, random_vec(design_size(spec), 0.03, 4));
  Vec one = Vec::Ones(sys.N);
  CHECK(sys.apply_D(one).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((sys.project(one) - one).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("interfaces match in reversed order") {
  auto spec = layered(12, 10, 4, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Neumann);
  // flip the upper block by half a turn about (0.5, 0.75)
  auto& up = spec.blocks[1];
  up.edges[static_cast<int>(Side::South)] = EdgeCurve::line({1, 1}, {0, 1});
  up.edges[static_cast<int>(Side::North)] = EdgeCurve::line({1, 0.5}, {0, 0.5});
  up.edges[static_cast<int>(Side::West)] = EdgeCurve::line({1, 1}, {1, 0.5});
  up.edges[static_cast<int>(Side::East)] = EdgeCurve::line({0, 1}, {0, 0.5});
  spec.tags[1] = {EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Interface};
  spec.interfaces = {{1, Side::North, 0, Side::North}};
  auto sys = assemble_global(spec, Vec::Zero(design_size(spec)));
  REQUIRE(sys.interfaces.size() == 1);
  CHECK(sys.interfaces[0].perm.front() == 11);
  Vec one = Vec::Ones(sys.N);
  CHECK(sys.apply_D(one).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("configuration errors") {
  auto spec = layered(12, 10, 4, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Neumann);
  SUBCASE("non-conforming interface") {
    spec.blocks[1].m_xi = 13;
    CHECK_THROWS_AS(assemble_global(spec, Vec::Zero(10)), TopologyError);
  }
  SUBCASE("shifted interface") {
    auto& up = spec.blocks[1];
    for (auto& e : up.edges) {
      e.a.x() += 0.01;
      e.b.x() += 0.01;
    }
    CHECK_THROWS_AS(assemble_global(spec, Vec::Zero(10)), TopologyError);
  }
  SUBCASE("interface tag without a pair") {
    spec.interfaces.clear();
    CHECK_THROWS_AS(assemble_global(spec, Vec::Zero(10)), TopologyError);
  }
  SUBCASE("design length") { CHECK_THROWS_AS(assemble_global(spec, Vec::Zero(3)), DimensionError); }
  SUBCASE("folded design") {
    Vec p = Vec::Zero(10);
    p[5] = 0.8;
    CHECK_THROWS_AS(assemble_global(spec, p), FoldedMeshError);
  }
  SUBCASE("unknown tag") { CHECK_THROWS_AS(parse_tag("periodic"), ConfigError); }
}

TEST_CASE("dependent constraint rows are rejected, duplicates are dropped") {
  const int N = 6;
  Vec H = Vec::Ones(N);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, 1}, {0, 1, -1}, {1, 0, 1}, {1, 1, -1}};
  SpMat L(2, N);
  L.setFromTriplets(t.begin(), t.end());
  Projection P(L, H);
  CHECK(P.rank() == 1);

  t = {{0, 0, 1}, {0, 1, -1}, {1, 1, 1}, {1, 2, -1}, {2, 0, 1}, {2, 2, -1}};
  SpMat L3(3, N);
  L3.setFromTriplets(t.begin(), t.end());
  CHECK_THROWS_AS(Projection(L3, H), ConstraintRankError);

  // union-find merges a chain into one class without redundant rows
  SpMat C = build_constraints(N, {{{0, 1}}, {{1, 2}}, {{2, 0}}}, {});
  CHECK(C.rows() == 2);
  SpMat Cd = build_constraints(N, {{{0, 1}}}, {1, 3});
  CHECK(Cd.rows() == 3);
}

TEST_CASE("discrete delta satisfies moment conditions") {
  for (int order : {4, 6}) {
    auto op = build_first_derivative(21, 0.05, order);
    for (double xs : {0.0, 0.013, 0.5, 0.77, 1.0}) {
      Vec d = discrete_delta_1d(op, 0.0, xs);
      for (int k = 0; k < order; ++k) {
        double mom = 0.0;
        for (int j = 0; j < op.m; ++j) mom += op.H[j] * d[j] * std::pow(j * op.h, k);
        CHECK(mom == doctest::Approx(std::pow(xs, k)).epsilon(1e-12));
      }
    }
    Vec d = discrete_delta_1d(op, 0.0, 0.5);
    CHECK(d[10] * op.H[10] == 1.0);
    CHECK(std::abs(d.sum() - d[10]) == 0.0);
  }

  auto spec = layered(12, 10, 4, EdgeTag::Neumann, EdgeTag::Neumann, EdgeTag::Neumann);
  auto sys = assemble_global(spec, Vec::Zero(10));
  const double xs = 0.31, ys = 0.77;
  Vec d = build_point_source(sys, xs, ys);
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) {
      double mom = 0.0;
      for (int b = 0; b < 2; ++b) {
        const auto& blk = sys.blocks[b];
        for (int n = 0; n < blk.size(); ++n) {
          mom += blk.H[n] * d[sys.offsets[b] + n] * std::pow(blk.geo.x[n], k) * std::pow(blk.geo.y[n], l);
        }
      }
      CHECK(mom == doctest::Approx(std::pow(xs, k) * std::pow(ys, l)).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(build_point_source(sys, 0.3, 0.2), UnsupportedSourceError);
  CHECK_THROWS_AS(build_point_source(sys, 1.3, 0.7), UnsupportedSourceError);
}
