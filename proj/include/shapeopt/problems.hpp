#pragma once

#include <functional>

#include "shapeopt/discretization.hpp"

namespace shapeopt {

// Five-block disc: a square of half-width a = R s / sqrt(2) with m x m points,
// surrounded by four blocks of n (radial) x m (tangential) points bounded by
// the circle of radius R. Arcs are Dirichlet.
struct CircleParams {
  double R = 1.0;
  double s = 0.75;
  int m = 41;
  int n = 19;
  int order = 4;
};
SystemSpec circle_system(const CircleParams& prm);

// Two stacked unit-width blocks: [0, 1] x [0.5, 1] above and the seabed block
// below with the design on its south edge (one value per grid column).
struct BathymetryParams {
  int m_x = 41;
  int m_y = 21;
  int order = 4;
  double c = 1.0;
};
SystemSpec bathymetry_system(const BathymetryParams& prm);

// Implementation-defined smooth two-bump seabed, y = truth(x).
double bathymetry_truth(double x);
Vec bathymetry_truth_vector(int m_x);

// Horn: a two-block waveguide [0, 0.5] x [0, 0.05], the flare between
// (0.5, 0.05) and (1, 0.3) whose interior north-edge columns are the design,
// a front box [1, 1.5] x [0, 0.3] and an upper box [1, 1.5] x [0.3, 0.8].
struct HornParams {
  int order = 4;
  int m_guide = 11;  // per waveguide block, along x
  int m_flare = 21;
  int m_box = 21;
  int m_low = 8;     // points across the waveguide, the flare and the front box
  int m_upper = 13;
  double c = 340.0;
};
SystemSpec horn_system(const HornParams& prm);

// x coordinates (physical) of the columns along a block's design edge, and the
// number of columns in that edge.
Vec design_edge_x(const SystemSpec& spec, int block);

// Receiver functional w -> (d_r, w)_Hbar as a 1 x N row.
SpMat receiver_row(const GlobalSystem& sys, double x, double y);

// Selector of the nodes of one block edge (rows ordered along the edge) and the
// edge quadrature weights.
SpMat edge_selector(const GlobalSystem& sys, int block, Side side);
Vec edge_weights(const GlobalSystem& sys, int block, Side side);

// u(x, y) sampled at every global node.
Vec sample(const GlobalSystem& sys, const std::function<double(double, double)>& u);

}  // namespace shapeopt
