#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <vector>

namespace shapeopt {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// One term of the coefficient expansion M^(c) = sum_k c_k * M^(k).
// M is dense and sits at rows/cols [offset, offset + M.rows()).
struct D2Element {
  int offset = 0;
  Eigen::MatrixXd M;
};

// Diagonal-norm SBP operators on one grid line.
struct SbpOperatorSet1D {
  int m = 0;
  double h = 0.0;
  int order = 0;
  Vec H;    // norm diagonal (includes h)
  SpMat D1;
  Vec d_l;  // boundary derivative rows of the compatible D2 family
  Vec d_r;
  std::vector<D2Element> elements;  // one per grid point

  Vec e_l() const;
  Vec e_r() const;
};

struct SbpSecondDerivative1D {
  Vec c;
  SpMat D2c;
  SpMat Mc;
  SpMat Rc;
};

int minimum_points(int order);

SbpOperatorSet1D build_first_derivative(int m, double h, int order);

// D2^(c) with M^(c), R^(c) = M^(c) - D1^T H diag(c) D1.
SbpSecondDerivative1D build_second_derivative(const SbpOperatorSet1D& base, const Vec& c);

// Fast paths used by the 2D assembly.
SpMat build_M(const SbpOperatorSet1D& base, const Vec& c);
SpMat build_D2(const SbpOperatorSet1D& base, const Vec& c);

// Strided view of one grid line inside a 2D column-major vector.
struct LineView {
  const double* data;
  int stride;
  double operator[](int i) const { return data[static_cast<long>(i) * stride]; }
};

// out[k] += scale * d/dc_k ( u^T H D2^(c) v ), i.e. the coefficient density of the
// weighted second-derivative bilinear form. out is strided like the input lines.
void accumulate_d2_density(const SbpOperatorSet1D& base, LineView u, LineView v, double scale,
                           double* out, int out_stride);

// d_l . v and d_r . v on a line.
double boundary_derivative_left(const SbpOperatorSet1D& base, LineView v);
double boundary_derivative_right(const SbpOperatorSet1D& base, LineView v);

// 6th-order diagonal SBP quadrature weights for the n+1 points t_k = k*dt.
Vec build_time_quadrature(int n, double dt);

}  // namespace shapeopt
