#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "shapeopt/errors.hpp"
#include "shapeopt/optimizer.hpp"

using namespace shapeopt;

namespace {

struct Bowl {
  Eigen::MatrixXd A;
  Vec a;
  std::pair<double, Vec> operator()(const Vec& p) const {
    const Vec e = p - a;
    return {0.5 * e.dot(A * e), A * e};
  }
};

Bowl bowl() {
  Eigen::MatrixXd B(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) B(i, j) = std::sin(1.0 + i + 2.0 * j);
  }
  Bowl b;
  b.A = B * B.transpose() + Eigen::MatrixXd::Identity(5, 5);
  b.a = (Vec(5) << 1.0, -2.0, 0.5, 3.0, -1.0).finished();
  return b;
}

std::pair<double, Vec> rosenbrock(const Vec& p) {
  const double x = p[0], y = p[1];
  Vec g(2);
  g << -2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x);
  return {(1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x), g};
}

}  // namespace

TEST_CASE("BFGS solves a quadratic bowl") {
  auto b = bowl();
  OptimizerOptions o;
  o.tol = 1e-12;
  auto r = minimize(b, Vec::Zero(5), o);
  CHECK(r.converged);
  CHECK(r.iterations <= 30);
  CHECK((r.p - b.a).norm() <= 1e-8);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].J < r.history[k - 1].J);
  CHECK((r.Hinv - r.Hinv.transpose()).norm() <= 1e-10 * r.Hinv.norm());
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r.Hinv).eigenvalues().minCoeff() > 0.0);
  CHECK(r.snapshots.size() == r.history.size());
}

TEST_CASE("L-BFGS solves a quadratic bowl") {
  auto b = bowl();
  OptimizerOptions o;
  o.tol = 1e-12;
  o.lbfgs = true;
  o.lbfgs_memory = 5;
  auto r = minimize(b, Vec::Zero(5), o);
  CHECK(r.converged);
  CHECK((r.p - b.a).norm() <= 1e-8);
  CHECK(r.Hinv.size() == 0);
}

TEST_CASE("BFGS on the Rosenbrock valley") {
  OptimizerOptions o;
  o.tol = 1e-10;
  o.max_iter = 200;
  auto r = minimize(rosenbrock, (Vec(2) << -1.2, 1.0).finished(), o);
  CHECK(r.converged);
  CHECK((r.p - Vec::Ones(2)).norm() <= 1e-6);
}

TEST_CASE("inadmissible trials are rejected, not fatal") {
  // minimum at 2 lies beyond a wall at p = 1.5
  auto f = [](const Vec& p) -> std::pair<double, Vec> {
    if (p[0] >= 1.5) throw FoldedMeshError("folded", 0);
    return {0.5 * (p[0] - 2) * (p[0] - 2), Vec::Constant(1, p[0] - 2)};
  };
  OptimizerOptions o;
  o.initial_step = 10.0;
  o.max_iter = 30;
  auto r = minimize(f, Vec::Zero(1), o);
  CHECK(r.p[0] < 1.5);
  CHECK(r.J < 2.0);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].J < r.history[k - 1].J);
  CHECK_FALSE(r.converged);
}

TEST_CASE("negative curvature resets the inverse Hessian") {
  // concave along x; one trial per search accepts Armijo points with s^T y < 0
  auto f = [](const Vec& p) -> std::pair<double, Vec> {
    const double x = p[0], y = p[1];
    Vec g(2);
    g << -std::sin(x) + 0.02 * x, 2 * y;
    return {std::cos(x) + 0.01 * x * x + y * y, g};
  };
  OptimizerOptions o;
  o.initial_step = 0.05;
  o.max_trials = 1;
  o.max_iter = 5;
  auto r = minimize(f, (Vec(2) << 0.3, 0.0).finished(), o);
  CHECK(r.resets >= 1);
  CHECK(r.iterations >= 2);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].J < r.history[k - 1].J);
}

TEST_CASE("optimizer edge cases") {
  auto b = bowl();
  auto r = minimize(b, b.a, OptimizerOptions{});
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  OptimizerOptions o;
  o.max_iter = 2;
  o.tol = 1e-14;
  r = minimize(b, Vec::Zero(5), o);
  CHECK_FALSE(r.converged);
  CHECK(r.reason == "iteration limit");
  o.c1 = 0.95;
  CHECK_THROWS_AS(minimize(b, Vec::Zero(5), o), ConfigError);
  auto bad = [](const Vec&) -> std::pair<double, Vec> { throw FoldedMeshError("folded", 0); };
  CHECK_THROWS_AS(minimize(bad, Vec::Zero(2), OptimizerOptions{}), NumericalError);
}

TEST_CASE("optimizer runs are deterministic") {
  OptimizerOptions o;
  o.tol = 1e-10;
  auto a = minimize(rosenbrock, (Vec(2) << -1.2, 1.0).finished(), o);
  auto b = minimize(rosenbrock, (Vec(2) << -1.2, 1.0).finished(), o);
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    CHECK(a.history[k].J == b.history[k].J);
    CHECK(a.history[k].step == b.history[k].step);
  }
  CHECK(a.p == b.p);
}
