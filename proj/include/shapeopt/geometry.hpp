#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "shapeopt/sbp1d.hpp"

namespace shapeopt {

enum class Side { West = 0, East = 1, South = 2, North = 3 };

const char* side_name(Side s);
Side parse_side(const std::string& s);

// Parametric edge curve on s in [0, 1].
struct EdgeCurve {
  enum class Kind { Line, Arc } kind = Kind::Line;
  Eigen::Vector2d a{0, 0}, b{0, 0};  // line end points
  Eigen::Vector2d center{0, 0};      // arc
  double radius = 0.0, theta0 = 0.0, theta1 = 0.0;

  static EdgeCurve line(Eigen::Vector2d a, Eigen::Vector2d b);
  static EdgeCurve arc(Eigen::Vector2d center, double radius, double theta0, double theta1);
  Eigen::Vector2d at(double s) const;
};

// Vertical displacement of one boundary row. Parameters sit on columns
// [first_col, first_col + count); column first_col + i moves by p_i * phi(eta)
// with phi = 1 - eta on the south side and phi = eta on the north side.
struct DesignEdge {
  bool enabled = false;
  Side side = Side::South;
  int first_col = 0;
  int count = 0;
};

// Geometry of one block: Coons patch of four edge curves, an optional exact
// quarter-turn rotation about the origin, and an optional design displacement.
struct BlockGeometrySpec {
  std::string name;
  int m_xi = 0, m_eta = 0;
  int order = 4;
  std::array<EdgeCurve, 4> edges;  // indexed by Side
  int quarter_turns = 0;
  DesignEdge design;
};

// Grid index helpers (column-major: xi is the slow index).
inline int node(int m_eta, int i_xi, int i_eta) { return i_xi * m_eta + i_eta; }

struct CurvilinearBlock {
  int m_xi = 0, m_eta = 0;
  Vec x, y;
  Vec Xxi, Xeta, Yxi, Yeta;
  Vec J, alpha1, alpha2, beta;
  Vec W1, W2;

  int size() const { return m_xi * m_eta; }
};

// Sensitivity of one block to one design parameter. Only columns
// [col_lo, col_hi] carry nonzero derivatives; every vector holds those columns
// contiguously (length (col_hi - col_lo + 1) * m_eta). dx is identically zero.
struct MetricSensitivity {
  int index = 0;
  int col_lo = 0, col_hi = -1;
  Vec dx, dy;
  Vec dXxi, dXeta, dYxi, dYeta, dJ, dalpha1, dalpha2, dbeta, dW1, dW2;
};

// x = x_l + (x_r - x_l) xi, y = p + (L_I - p) eta on the unit reference grid.
void transfinite_map(const Vec& p, int m_xi, int m_eta, double x_l, double x_r, double L_I, Vec& x,
                     Vec& y);

// Coordinates of a block for the design vector p (p may be empty when the block
// carries no design edge).
void block_coordinates(const BlockGeometrySpec& spec, const Vec& p, Vec& x, Vec& y);

// Reference-direction 1D operators of a block (h = 1 / (m - 1)).
struct BlockOperators1D {
  SbpOperatorSet1D xi, eta;
};
BlockOperators1D reference_operators(int m_xi, int m_eta, int order);

CurvilinearBlock compute_metrics(const Vec& x, const Vec& y, const BlockOperators1D& ops);

// phi(eta) of the design displacement.
double design_shape(const DesignEdge& d, double eta);

MetricSensitivity metric_sensitivity(const CurvilinearBlock& block, const BlockGeometrySpec& spec,
                                     int i, const BlockOperators1D& ops);

}  // namespace shapeopt
