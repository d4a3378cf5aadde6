#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shapeopt/sbp1d.hpp"

namespace shapeopt {

// Loss and gradient at p. Throwing FoldedMeshError or NumericalError marks p
// as inadmissible (treated as J = +inf by the line search).
using Objective = std::function<std::pair<double, Vec>(const Vec&)>;

struct OptimizerOptions {
  double tol = 1e-6;         // stop when |g|_inf <= tol * max(1, |J|)
  int max_iter = 200;
  double c1 = 1e-4, c2 = 0.9;
  int max_trials = 20;       // line-search evaluations per iteration
  double initial_step = 1.0; // first trial after a (re)start moves p by this much in max norm
  bool lbfgs = false;
  int lbfgs_memory = 10;
};

struct IterationRecord {
  int iter = 0;
  double J = 0.0;
  double gnorm = 0.0;  // |g|_inf
  double step = 0.0;   // accepted line-search step (0 at iteration 0)
  double wall = 0.0;   // seconds since start
  int evaluations = 0;
};

struct OptimizationResult {
  Vec p, g;
  double J = 0.0;
  Eigen::MatrixXd Hinv;  // dense inverse-Hessian approximation (empty in L-BFGS mode)
  int iterations = 0;
  int evaluations = 0;
  int resets = 0;
  bool converged = false;
  std::string reason;
  std::vector<IterationRecord> history;
  std::vector<Vec> snapshots;  // p after every iteration, starting with p0
};

// Called after every accepted iteration (and once for the start point).
using IterationCallback = std::function<void(const IterationRecord&, const Vec& p)>;

OptimizationResult minimize(const Objective& f, const Vec& p0, const OptimizerOptions& opt,
                            const IterationCallback& cb = {});

void write_history_csv(const std::string& path, const OptimizationResult& r, bool with_wall_time = true);
void write_snapshots_csv(const std::string& path, const OptimizationResult& r, const Vec& x = Vec());

}  // namespace shapeopt
