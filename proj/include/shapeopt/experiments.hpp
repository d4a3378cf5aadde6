#pragma once

#include <array>
#include <string>
#include <vector>

#include "shapeopt/adjoint.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/problems.hpp"

namespace shapeopt {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be
// written by index so the outcome does not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

// ---------------------------------------------------------------------------
// Convergence study on the five-block disc with u = sin(3 pi x) sin(4 pi y) cos(5 pi t).

struct ConvergenceConfig {
  int order = 4;
  double R = 1.0, s = 0.75;
  std::vector<std::pair<int, int>> grids;  // (m, n) per level
  double T = 1.0;
  double dt_fraction = 1.0;  // of the stable step
  unsigned seed = 12345;
};

struct ConvergenceRow {
  int m = 0, n = 0, N = 0;
  double dt = 0.0;
  int steps = 0;
  double error = 0.0;     // H-norm error at T
  double rate = 0.0;      // NaN on the first row
  double log10_error() const;
};

ConvergenceRow circle_error(const CircleParams& prm, double T, double dt_fraction, unsigned seed);
std::vector<ConvergenceRow> run_convergence(const ConvergenceConfig& cfg);
void fill_rates(std::vector<ConvergenceRow>& rows);
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

// ---------------------------------------------------------------------------
// Seabed reconstruction.

struct BathymetryConfig {
  BathymetryParams grid{41, 21, 4, 1.0};
  BathymetryParams data_grid{401, 201, 6, 1.0};
  std::array<double, 2> source{0.25, 0.8}, receiver{0.75, 0.8};
  double sigma = 0.1;
  double shift = 0.4;  // pulse peak time; 4 sigma starts the source from rest
  double T = 4.0;
  double dt_fraction = 0.5;       // inversion step as a fraction of the stable step at p0
  double data_dt_fraction = 1.0;  // for the data run
  double gamma = 1e-5;
  OptimizerOptions optimizer;
  std::string truth = "two_bump";         // seabed behind the data: "two_bump" or "flat"
  std::vector<int> snapshots{0, 10, 50};  // iterations to dump (the last one is always dumped)
  int checkpoint_stride = 1;
  unsigned seed = 12345;

  Vec truth_vector(int m_x) const;
};

struct SyntheticData {
  std::vector<double> t;
  Eigen::MatrixXd values;  // samples x receivers
};

// Receiver series of the truth seabed on the data grid.
SyntheticData bathymetry_data(const BathymetryConfig& cfg);
LossProblem bathymetry_problem(const BathymetryConfig& cfg, const SyntheticData& data);

struct BathymetryResult {
  OptimizationResult opt;
  Vec x, truth, p0;  // errors below are absolute when the truth is flat
  double J0 = 0.0;
  double error0 = 0.0, error = 0.0;  // relative l2 error of p against the truth
  SyntheticData data;
  Vec final_receiver;  // simulated receiver series at the final design
  double dt = 0.0;
};

BathymetryResult run_bathymetry(const BathymetryConfig& cfg, const IterationCallback& cb = {});

// ---------------------------------------------------------------------------
// Horn mouth optimization.

struct HornConfig {
  HornParams geometry;
  std::vector<double> amplitudes{1.0}, frequencies{300.0};
  // Phase of the incident wave at the inflow, started from rest:
  // "sine" gives A sin(w t), "cosine" gives A (cos(w t) - 1).
  std::string incident = "sine";
  double T = 0.0;            // 0: sixteen traversals of the 1.5 m domain
  double dt_fraction = 0.5;
  double gamma = 1e-5;
  OptimizerOptions optimizer;
  double sweep_min = 110.0, sweep_max = 840.0;
  int sweep_count = 74;  // 10 Hz steps
  int threads = 1;
  unsigned seed = 12345;

  double final_time() const { return T > 0.0 ? T : 16.0 * 1.5 / geometry.c; }
  std::vector<double> sweep_frequencies() const;
  double phase() const;
};

LossProblem horn_problem(const HornConfig& cfg, const std::vector<double>& amplitudes,
                         const std::vector<double>& frequencies, double dt);

struct HornResult {
  OptimizationResult opt;
  double dt = 0.0;
  double J0 = 0.0;
  double reflection0 = 0.0, reflection = 0.0;  // loss without the regularization, at p0 and at the optimum
  double reflection_orders() const;
  std::vector<double> sweep_f, sweep_initial, sweep_final;
  Vec x;  // design column x positions
};

// Design frequencies must lie in (100, 850) Hz.
void check_horn_frequencies(const std::vector<double>& f);

// Loss per single frequency at design p.
std::vector<double> horn_spectrum(const HornConfig& cfg, const Vec& p, double dt, const std::vector<double>& f);
HornResult run_horn(const HornConfig& cfg, const IterationCallback& cb = {});

// ---------------------------------------------------------------------------
// Adjoint gradient against central differences of the loss.

struct GradientCheckConfig {
  BathymetryParams grid{11, 8, 4, 1.0};
  double T = 4.0;
  double eps = 1e-5;
  std::vector<double> dt_fractions{0.25, 0.125, 0.0625};
  int data_dt_divisor = 16;  // data come from the truth on a finer time grid
  double gamma = 1e-5;
  double design_scale = 0.5;  // p = scale * truth
  int threads = 1;
  unsigned seed = 12345;
};

struct GradientCheckRow {
  double dt = 0.0;
  int steps = 0;
  double rel_error = 0.0;
  Vec adjoint, fd;
  GradientReport report;
};

std::vector<GradientCheckRow> run_gradient_check(const GradientCheckConfig& cfg);

// ---------------------------------------------------------------------------
// Config files (YAML). Unknown keys are rejected.

ConvergenceConfig load_convergence_config(const std::string& path);
BathymetryConfig load_bathymetry_config(const std::string& path);
HornConfig load_horn_config(const std::string& path);
GradientCheckConfig load_gradient_check_config(const std::string& path);

// FNV-1a of the file bytes, hex.
std::string file_hash(const std::string& path);

}  // namespace shapeopt
