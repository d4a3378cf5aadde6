#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "shapeopt/errors.hpp"
#include "shapeopt/sbp1d.hpp"

using namespace shapeopt;

namespace {

Eigen::MatrixXd dense(const SpMat& A) { return Eigen::MatrixXd(A); }

Vec grid(int m, double h) {
  Vec x(m);
  for (int i = 0; i < m; ++i) x[i] = i * h;
  return x;
}

Vec random_positive(int m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  Vec c(m);
  for (int i = 0; i < m; ++i) c[i] = u(gen);
  return c;
}

double sbp_residual(const SbpOperatorSet1D& op) {
  Eigen::MatrixXd H = op.H.asDiagonal();
  Eigen::MatrixXd Q = H * dense(op.D1);
  Eigen::MatrixXd B = Q + Q.transpose();
  B(0, 0) += 1.0;
  B(op.m - 1, op.m - 1) -= 1.0;
  return B.cwiseAbs().maxCoeff();
}

double def2_residual(const SbpOperatorSet1D& op, const SbpSecondDerivative1D& d2) {
  const int m = op.m;
  Eigen::MatrixXd lhs = op.H.asDiagonal() * dense(d2.D2c);
  Eigen::MatrixXd rhs = -dense(d2.Mc);
  rhs.row(0) -= d2.c[0] * op.d_l.transpose();
  rhs.row(m - 1) += d2.c[m - 1] * op.d_r.transpose();
  return (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("first derivative: SBP identity and consistency") {
  for (int order : {4, 6}) {
    for (int m : {minimum_points(order), 20, 31, 57}) {
      const double h = 1.0 / (m - 1);
      auto op = build_first_derivative(m, h, order);
      CAPTURE(order);
      CAPTURE(m);
      CHECK((op.H.array() > 0).all());
      CHECK(sbp_residual(op) <= 1e-13);
      Vec x = grid(m, h);
      CHECK((op.D1 * Vec::Ones(m)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((op.D1 * x - Vec::Ones(m)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("first derivative: monomial accuracy") {
  for (int order : {4, 6}) {
    const int m = 30;
    const double h = 1.0 / (m - 1);
    auto op = build_first_derivative(m, h, order);
    Vec x = grid(m, h);
    const int bw = order == 4 ? 4 : 6;
    for (int k = 1; k <= order; ++k) {
      Vec u = x.array().pow(k);
      Vec du = k * x.array().pow(k - 1);
      Vec err = op.D1 * u - du;
      CAPTURE(order);
      CAPTURE(k);
      CHECK(err.segment(bw, m - 2 * bw).cwiseAbs().maxCoeff() <= 1e-9);
      if (k <= order / 2) {
        CHECK(err.head(bw).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(err.tail(bw).cwiseAbs().maxCoeff() <= 1e-9);
      }
    }
  }
}

TEST_CASE("boundary derivative rows") {
  for (int order : {4, 6}) {
    const int m = 25;
    const double h = 1.0 / (m - 1);
    auto op = build_first_derivative(m, h, order);
    Vec x = grid(m, h);
    for (int k = 0; k <= order / 2 + 1; ++k) {
      Vec u = x.array().pow(k);
      const double dl = k == 1 ? 1.0 : 0.0;
      const double dr = k == 0 ? 0.0 : k * 1.0;
      CHECK(op.d_l.dot(u) == doctest::Approx(dl).epsilon(1e-10));
      CHECK(op.d_r.dot(u) == doctest::Approx(dr).epsilon(1e-10));
      LineView v{u.data(), 1};
      CHECK(boundary_derivative_left(op, v) == doctest::Approx(op.d_l.dot(u)).epsilon(1e-14));
      CHECK(boundary_derivative_right(op, v) == doctest::Approx(op.d_r.dot(u)).epsilon(1e-14));
    }
  }
}

TEST_CASE("first derivative: configuration errors") {
  CHECK_THROWS_AS(build_first_derivative(7, 0.1, 4), ConfigError);
  CHECK_THROWS_AS(build_first_derivative(11, 0.1, 6), ConfigError);
  CHECK_THROWS_AS(build_first_derivative(20, 0.1, 5), ConfigError);
  CHECK_THROWS_AS(build_first_derivative(20, 0.0, 4), ConfigError);
  try {
    build_first_derivative(9, 0.1, 6);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("12") != std::string::npos);
  }
}

TEST_CASE("second derivative: compatibility, symmetry and PSD remainder") {
  for (int order : {4, 6}) {
    for (int m : {minimum_points(order), 20, 33}) {
      const double h = 1.0 / (m - 1);
      auto op = build_first_derivative(m, h, order);
      for (unsigned seed : {1u, 2u, 3u}) {
        Vec c = random_positive(m, seed);
        auto d2 = build_second_derivative(op, c);
        CAPTURE(order);
        CAPTURE(m);
        CHECK(def2_residual(op, d2) <= 1e-13);
        Eigen::MatrixXd M = dense(d2.Mc);
        Eigen::MatrixXd R = dense(d2.Rc);
        CHECK((M - M.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * M.cwiseAbs().maxCoeff());
        CHECK((R - R.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * M.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (R + R.transpose()));
        CHECK(es.eigenvalues().minCoeff() >= -1e-12 * M.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("second derivative: constant coefficient form and linear data") {
  for (int order : {4, 6}) {
    const int m = 20;
    const double h = 1.0 / (m - 1);
    auto op = build_first_derivative(m, h, order);
    auto d2 = build_second_derivative(op, Vec::Ones(m));
    Vec x = grid(m, h);
    CHECK((d2.D2c * x).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((d2.D2c * Vec::Ones(m)).cwiseAbs().maxCoeff() <= 1e-10);
    Vec x2 = x.array().square();
    CHECK((d2.D2c * x2 - 2.0 * Vec::Ones(m)).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((dense(build_D2(op, Vec::Ones(m))) - dense(d2.D2c)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("second derivative: remainder is linear in the coefficient") {
  for (int order : {4, 6}) {
    const int m = 24;
    auto op = build_first_derivative(m, 1.0 / (m - 1), order);
    Vec c1 = random_positive(m, 7), c2 = random_positive(m, 8);
    const double a = 0.3, b = -1.7;
    Eigen::MatrixXd R = dense(build_second_derivative(op, a * c1 + b * c2).Rc);
    Eigen::MatrixXd R1 = dense(build_second_derivative(op, c1).Rc);
    Eigen::MatrixXd R2 = dense(build_second_derivative(op, c2).Rc);
    CHECK((R - a * R1 - b * R2).cwiseAbs().maxCoeff() <= 1e-11 * R.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("second derivative: variable coefficient convergence") {
  // d/dx((x+1) d/dx x^2) = 4x + 2
  for (int order : {4, 6}) {
    for (int m : {41, 81, 161}) {
      const double h = 1.0 / (m - 1);
      auto op = build_first_derivative(m, h, order);
      Vec x = grid(m, h);
      Vec c = x.array() + 1.0;
      Vec u = x.array().square();
      Vec err = build_D2(op, c) * u - (4.0 * x.array() + 2.0).matrix();
      const double e = err.cwiseAbs().maxCoeff();
      CHECK(e <= 1e-8);
    }
    // smooth non-polynomial data, central half of the grid; the finest level
    // is already near roundoff for order 6 so the rate uses the first pair
    std::vector<double> errs;
    for (int m : {41, 81, 161}) {
      const double h = 1.0 / (m - 1);
      auto op = build_first_derivative(m, h, order);
      Vec x = grid(m, h);
      Vec c = (x.array() + 1.0).exp();
      Vec u = (2.0 * x.array()).sin();
      Vec ex = c.array() * (2.0 * (2.0 * x.array()).cos() - 4.0 * (2.0 * x.array()).sin());
      Vec err = build_D2(op, c) * u - ex;
      const int bw = (m - 1) / 4;
      errs.push_back(err.segment(bw, m - 2 * bw).cwiseAbs().maxCoeff());
    }
    const double rate = std::log2(errs[0] / errs[1]);
    CAPTURE(order);
    CHECK(rate >= order - 0.5);
  }
}

TEST_CASE("second derivative: dimension error") {
  auto op = build_first_derivative(20, 0.05, 4);
  CHECK_THROWS_AS(build_second_derivative(op, Vec::Ones(19)), DimensionError);
}

TEST_CASE("coefficient density matches the operator") {
  for (int order : {4, 6}) {
    const int m = 22;
    auto op = build_first_derivative(m, 1.0 / (m - 1), order);
    Vec u = random_positive(m, 11), v = random_positive(m, 12);
    Vec dens = Vec::Zero(m);
    accumulate_d2_density(op, LineView{u.data(), 1}, LineView{v.data(), 1}, 2.0, dens.data(), 1);
    for (int k = 0; k < m; ++k) {
      Vec ek = Vec::Zero(m);
      ek[k] = 1.0;
      const double ref = 2.0 * u.dot(op.H.asDiagonal() * (build_D2(op, ek) * v));
      CHECK(dens[k] == doctest::Approx(ref).epsilon(1e-11).scale(std::abs(ref) + 1.0));
    }
  }
}

TEST_CASE("time quadrature") {
  Vec w = build_time_quadrature(100, 0.01);
  CHECK((w.array() > 0).all());
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  Vec t(101);
  for (int k = 0; k <= 100; ++k) t[k] = 0.01 * k;
  for (int deg = 1; deg <= 5; ++deg) {
    CHECK(w.dot(t.array().pow(deg).matrix()) == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
  }
  Vec w2 = build_time_quadrature(200, 1.0 / 200);
  Vec s(201);
  for (int k = 0; k <= 200; ++k) s[k] = std::sin(2 * M_PI * k / 200.0);
  CHECK(std::abs(w2.dot(s)) <= 1e-10);
  CHECK_THROWS_AS(build_time_quadrature(10, 0.1), ConfigError);
}
