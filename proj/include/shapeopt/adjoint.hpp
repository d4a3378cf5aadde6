#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shapeopt/forward.hpp"

namespace shapeopt {

// Derivatives of the assembled pieces with respect to one design parameter.
// D = c^2 P A P with A = Hbar^{-1} K, E = c P Hbar^{-1} B P.
struct ShapeDerivative {
  int index = 0;
  SpMat dK;
  Vec dHbar;
  Vec dB;  // diagonal of dB
};

// Maps a global design index to (block, index within the block's design edge).
std::pair<int, int> locate_design(const SystemSpec& spec, int i);

ShapeDerivative shape_derivative(const GlobalSystem& sys, int i);
std::vector<ShapeDerivative> shape_derivatives(const GlobalSystem& sys);

// dP u = P Hbar^{-1} dHbar (I - P) u
Vec apply_dP(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& u);
// Matrix-free dD/dp_i w and dE/dp_i w.
Vec apply_dD(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& w);
Vec apply_dE(const GlobalSystem& sys, const ShapeDerivative& d, const Vec& w);

// (lambda, dD w)_Hbar and (lambda_t, dE w)_Hbar.
std::pair<double, double> operator_derivative_actions(const GlobalSystem& sys, const ShapeDerivative& d,
                                                      const Vec& w, const Vec& lambda,
                                                      const Vec& lambda_t);

// Observed functionals Q w compared against a target: r(t) = Q w(t) - target(t),
// loss 1/2 int r^T diag(weight) r dt.
struct Misfit {
  SpMat Q;
  Vec weight;
  std::function<Vec(double)> target;  // empty: zero target

  Vec target_at(double t) const;
};

// Piecewise linear interpolation of sampled series (rows of values match times).
std::function<Vec(double)> linear_series(std::vector<double> times, Eigen::MatrixXd values);

// r(t_k) on the forward grid, (n_steps + 1) x rows(Q).
Eigen::MatrixXd misfit_series(const Trajectory& fwd, const Misfit& m);

double data_loss(const Trajectory& fwd, const Misfit& m);

// Adjoint system lambda_tt = D lambda + E lambda_tau - Hbar^{-1} Q^T W r(T - tau)
// on the forward time grid. visit(j, lambda, lambda_tau) sees every step
// j = 0..n (tau = j dt).
using AdjointVisitor = std::function<void(int, const Vec&, const Vec&)>;
Trajectory solve_adjoint(const GlobalSystem& sys, const Trajectory& fwd, const Misfit& m,
                         const AdjointVisitor& visit = {}, bool store_states = false);

// Second-derivative smoothing on each design edge: 1/2 gamma |D2 p|_H^2 with
// physical column spacing.
struct Regularizer {
  Eigen::MatrixXd G;  // D2^T H D2 (block diagonal over design blocks)

  double value(const Vec& p, double gamma) const { return 0.5 * gamma * p.dot(G * p); }
  Vec gradient(const Vec& p, double gamma) const { return gamma * (G * p); }
};
Regularizer build_regularizer(const SystemSpec& spec);

struct GradientReport {
  Vec g, volume, damping, regularization;

  void write_csv(const std::string& path) const;
};

// dJ/dp from a forward trajectory (states stored) and the adjoint solve.
GradientReport compute_gradient(const GlobalSystem& sys, const Forcing& f, const Trajectory& fwd,
                                const Misfit& m, const Regularizer& reg, const Vec& p, double gamma);

// Everything one loss evaluation needs.
struct LossProblem {
  SystemSpec spec;
  std::function<Forcing(const GlobalSystem&)> forcing;
  std::function<Misfit(const GlobalSystem&)> misfit;
  double T = 1.0;
  double dt = 0.0;  // fixed step; must not depend on p
  double gamma = 0.0;
  int checkpoint_stride = 1;
};

struct Evaluation {
  double J = 0.0, J_data = 0.0, J_reg = 0.0;
  GradientReport grad;
  Trajectory fwd;
};

Evaluation evaluate(const LossProblem& prob, const Vec& p, bool gradient);

// Central differences (J(p + eps e_i) - J(p - eps e_i)) / (2 eps).
Vec fd_gradient(const std::function<double(const Vec&)>& J, const Vec& p, double eps);

}  // namespace shapeopt
