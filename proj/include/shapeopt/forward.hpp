#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shapeopt/discretization.hpp"

namespace shapeopt {

double ricker(double t, double sigma);

// Scalar time signal driving a forcing vector.
struct SourceSignal {
  enum class Kind { Ricker, HornMultifrequency, Samples } kind = Kind::Ricker;
  double sigma = 0.1;
  double shift = 0.0;
  std::vector<double> amplitudes, frequencies;  // horn: A_j, f_j [Hz]
  std::vector<double> phases;                   // horn: phi_j, empty means 0
  std::vector<double> sample_t, sample_v;       // piecewise linear samples

  void validate() const;
  double operator()(double t) const;
};

// Inflow data 2 d/dt of the incident wave sum_j A_j cos(w_j t + phi_j).
SourceSignal horn_signal(std::vector<double> amplitudes, std::vector<double> frequencies,
                         std::vector<double> phases = {});

// f(t) = sum_k s_k(t) v_k
struct Forcing {
  std::vector<std::function<double(double)>> signals;
  std::vector<Vec> vectors;

  void add(std::function<double(double)> s, Vec v);
  bool empty() const { return vectors.empty(); }
  void accumulate(double t, Vec& out) const;
};

struct ForwardOptions {
  double T = 1.0;
  double dt = 0.0;            // 0: use stable_dt
  SpMat observe;              // Q, rows are observed functionals (may be empty)
  bool store_states = false;  // needed by the gradient pass
  int checkpoint_stride = 1;  // keep every stride-th state, recompute the rest
  bool energy = false;
  std::optional<std::pair<Vec, Vec>> initial;  // (w, w_t) at t = 0
};

struct Trajectory {
  double dt = 0.0;
  int n_steps = 0;
  int stride = 1;
  std::vector<Vec> w, wt;      // states at steps 0, stride, 2 stride, ... (and n_steps)
  std::vector<int> state_step;  // step index of each stored state
  Eigen::MatrixXd obs, obs_t;   // (n_steps + 1) x rows(Q): Qw and Qw_t
  std::vector<double> energy;
  Vec final_w, final_wt;

  double time(int k) const { return k * dt; }
};

struct StableDtOptions {
  double safety = 0.5;
  double rk4_extent = 2.8;
  double tol = 1e-3;
  int max_iter = 10000;
  unsigned seed = 12345;
};

// Spectral radius of [[0, I], [D, E]] by power iteration with a two-vector
// Ritz estimate (the dominant eigenvalues come in conjugate pairs).
double companion_spectral_radius(const GlobalSystem& sys, const StableDtOptions& opt = {});
double stable_dt(const GlobalSystem& sys, const StableDtOptions& opt = {});

// Number of steps and dt <= dt_max that land exactly on T.
std::pair<int, double> time_grid(double T, double dt_max);

// One classical RK4 step of w_tt = D w + E w_t + f(t).
void rk4_step(const GlobalSystem& sys, const Forcing& f, double t, double dt, Vec& w, Vec& wt);

// D w + E v
Vec second_derivative(const GlobalSystem& sys, const Vec& w, const Vec& v);

Trajectory solve_forward(const GlobalSystem& sys, const Forcing& f, const ForwardOptions& opt);

// Sum over blocks of |v_t|_H^2 + c^2 (|D_x v|_H^2 + |D_y v|_H^2 + |v|_R^2) on the
// projected state.
class EnergyEvaluator {
 public:
  explicit EnergyEvaluator(const GlobalSystem& sys);
  double operator()(const Vec& w, const Vec& wt) const;

 private:
  const GlobalSystem* sys_;
  std::vector<SpMat> Dx_, Dy_, R_;
};

// Hands out forward states in any order, recomputing strided segments.
class StateReader {
 public:
  StateReader(const GlobalSystem& sys, const Forcing& f, const Trajectory& traj);
  const Vec& w(int k);

 private:
  const GlobalSystem* sys_;
  const Forcing* f_;
  const Trajectory* traj_;
  int seg_ = -1;
  std::vector<Vec> buf_;
};

void write_series_csv(const std::string& path, double dt, const Vec& values,
                      const std::string& header = "t,value");

// Flat binary layout: "SOTRAJ01", int32 N, int32 stride, int64 records, f64 dt,
// then per record int64 step, N f64 of w, N f64 of w_t.
void write_checkpoints(const std::string& path, const Trajectory& traj);
Trajectory read_checkpoints(const std::string& path);

}  // namespace shapeopt
