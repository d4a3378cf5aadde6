#include "shapeopt/sbp1d.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <map>

#include "sbp_coefficients.hpp"
#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

using Triplet = Eigen::Triplet<double>;

// Sparse row as (column, value) pairs.
using Row = std::vector<std::pair<int, double>>;

constexpr std::array<double, 4> kH4 = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};

constexpr std::array<double, 6> kH6 = {13649.0 / 43200, 12013.0 / 8640, 2711.0 / 4320,
                                       5359.0 / 4320,  7877.0 / 8640,  43801.0 / 43200};

// Order-6 D1 closure rows: (offset from row index, value).
const std::vector<std::vector<std::pair<int, double>>>& d1_order6_closure() {
  static const std::vector<std::vector<std::pair<int, double>>> rows = {
      {{0, -1.582533518939116418785258993332844897062},
       {1, 2.033426786468126253898161347360808173712},
       {2, -0.1417052898146741610733887894481170575600},
       {3, -0.4501096599735708523162117824920488989702},
       {4, 0.1042956382142412661862395105494407610836},
       {5, 0.03662604404499391209045870736276191879693}},
      {{-1, -0.4620701275035953590186631853846278325646},
       {1, 0.2873679417026202568532985205129449923126},
       {2, 0.2585974499280928196267362923074433487080},
       {3, -0.06894808744606961472005221923058251153103},
       {4, -0.01494717668104810274131940820517799692506}},
      {{-2, 0.07134398748360337973038301686379010397038},
       {-1, -0.6366933020423417826592908754928085932593},
       {1, 0.6067199374180168986519150843189505198519},
       {2, -0.02338660408468356531858175098561718651857},
       {3, -0.01798401877459493040442547470431484404443}},
      {{-3, 0.1146397975178068401430112823144985150596},
       {-2, -0.2898424301162697370942324201800071793273},
       {-1, -0.3069262456316931913128086944558079603132},
       {1, 0.5203848121857539166740071338174418292578},
       {2, -0.05169127637022742348368508279860701098408},
       {3, 0.01343534241462959507370778130248180630715}},
      {{-4, -0.03614399304268576976452921364705641609825},
       {-3, 0.1051508663818248421520867474440761344449},
       {-2, 0.01609777419666805778308369351834662756172},
       {-1, -0.7080721616106272031118456849378369336023},
       {1, 0.7692160858661111736140494493705980473867},
       {2, -0.1645296432652024882569506157166433921544},
       {3, 0.01828107147391138758410562396851593246160}},
      {{-5, -0.01141318406360863692889821914555232596651},
       {-4, 0.02049729840293952857599941220163960606616},
       {-3, 0.01113095018331244864875173213474522093204},
       {-2, 0.06324365883611076515355091406993789453750},
       {-1, -0.6916640154753724474963890679085181638850},
       {1, 0.7397091390607520376247117645715851236273},
       {2, -0.1479418278121504075249423529143170247255},
       {3, 0.01643798086801671194721581699047966941394}},
  };
  return rows;
}

// Interior element of the order-6 D2 (h = 1), offsets -3..3 around its node.
constexpr double kD2Order6Interior[7][7] = {
    {1.0 / 180, -1.0 / 40, 1.0 / 20, -11.0 / 360, 0, 0, 0},
    {-1.0 / 40, 1.0 / 8, -3.0 / 10, 7.0 / 40, 1.0 / 40, 0, 0},
    {1.0 / 20, -3.0 / 10, 19.0 / 20, -17.0 / 40, -3.0 / 10, 1.0 / 40, 0},
    {-11.0 / 360, 7.0 / 40, -17.0 / 40, 101.0 / 180, -17.0 / 40, 7.0 / 40, -11.0 / 360},
    {0, 1.0 / 40, -3.0 / 10, -17.0 / 40, 19.0 / 20, -3.0 / 10, 1.0 / 20},
    {0, 0, 1.0 / 40, 7.0 / 40, -3.0 / 10, 1.0 / 8, -1.0 / 40},
    {0, 0, 0, -11.0 / 360, 1.0 / 20, -1.0 / 40, 1.0 / 180},
};

Vec norm_diagonal(int m, double h, int order) {
  Vec H = Vec::Ones(m);
  if (order == 4) {
    for (int i = 0; i < 4; ++i) H[i] = H[m - 1 - i] = kH4[i];
  } else {
    for (int i = 0; i < 6; ++i) H[i] = H[m - 1 - i] = kH6[i];
  }
  return H * h;
}

std::vector<Row> d1_rows(int m, double h, int order) {
  std::vector<Row> rows(m);
  if (order == 4) {
    // Q from the Mattsson-Nordstrom closure; D1 = H^{-1} Q.
    const std::vector<std::tuple<int, int, double>> qb = {
        {0, 0, -0.5},        {0, 1, 59.0 / 96},  {0, 2, -1.0 / 12}, {0, 3, -1.0 / 32},
        {1, 0, -59.0 / 96},  {1, 2, 59.0 / 96},  {2, 0, 1.0 / 12},  {2, 1, -59.0 / 96},
        {2, 3, 59.0 / 96},   {2, 4, -1.0 / 12},  {3, 0, 1.0 / 32},  {3, 2, -59.0 / 96},
        {3, 4, 2.0 / 3},     {3, 5, -1.0 / 12}};
    std::vector<std::map<int, double>> q(m);
    for (int i = 4; i < m - 4; ++i) {
      q[i][i - 2] = 1.0 / 12;
      q[i][i - 1] = -2.0 / 3;
      q[i][i + 1] = 2.0 / 3;
      q[i][i + 2] = -1.0 / 12;
    }
    for (auto [i, j, v] : qb) {
      q[i][j] = v;
      q[m - 1 - i][m - 1 - j] = -v;
    }
    for (int i = 0; i < m; ++i) {
      const double hi = (i < 4) ? kH4[i] : (i >= m - 4 ? kH4[m - 1 - i] : 1.0);
      for (auto [j, v] : q[i]) rows[i].push_back({j, v / (hi * h)});
    }
    return rows;
  }
  const std::array<double, 7> interior = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0,
                                          3.0 / 4,   -3.0 / 20, 1.0 / 60};
  for (int i = 6; i < m - 6; ++i) {
    for (int k = -3; k <= 3; ++k) {
      if (k != 0) rows[i].push_back({i + k, interior[k + 3] / h});
    }
  }
  const auto& closure = d1_order6_closure();
  for (int r = 0; r < 6; ++r) {
    for (auto [off, v] : closure[r]) {
      rows[r].push_back({r + off, v / h});
      rows[m - 1 - r].push_back({m - 1 - r - off, -v / h});
    }
  }
  for (auto& row : rows) std::sort(row.begin(), row.end());
  return rows;
}

SpMat rows_to_matrix(const std::vector<Row>& rows, int ncols) {
  std::vector<Triplet> t;
  for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
    for (auto [j, v] : rows[i]) t.emplace_back(i, j, v);
  }
  SpMat A(static_cast<int>(rows.size()), ncols);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

// Undivided D3, D4 and weights of the order-4 remainder.
struct Order4Remainder {
  std::vector<Row> d3, d4;
  Vec c3, c4;
};

Order4Remainder order4_remainder(int m) {
  Order4Remainder r;
  r.d3.resize(m);
  r.d4.resize(m);
  auto cubic = [](int first) {
    return Row{{first, -1.0}, {first + 1, 3.0}, {first + 2, -3.0}, {first + 3, 1.0}};
  };
  auto quartic = [](int first) {
    return Row{{first, 1.0}, {first + 1, -4.0}, {first + 2, 6.0}, {first + 3, -4.0}, {first + 4, 1.0}};
  };
  const std::array<double, 6> row2 = {-185893.0 / 301051,
                                      79000249461.0 / 54642863857,
                                      -33235054191.0 / 54642863857,
                                      -36887526683.0 / 54642863857,
                                      26183621850.0 / 54642863857,
                                      -4386.0 / 181507};
  r.d3[0] = cubic(0);
  r.d3[1] = cubic(0);
  for (int j = 0; j < 6; ++j) r.d3[2].push_back({j, row2[j]});
  for (int i = 3; i <= m - 5; ++i) r.d3[i] = cubic(i - 1);
  for (int j = 5; j >= 0; --j) r.d3[m - 3].push_back({m - 1 - j, -row2[j]});
  r.d3[m - 2] = cubic(m - 4);
  r.d3[m - 1] = cubic(m - 4);

  r.d4[0] = quartic(0);
  r.d4[1] = quartic(0);
  for (int i = 2; i <= m - 3; ++i) r.d4[i] = quartic(i - 2);
  r.d4[m - 2] = quartic(m - 5);
  r.d4[m - 1] = quartic(m - 5);

  r.c3 = Vec::Ones(m);
  r.c3[0] = r.c3[1] = 0.0;
  r.c3[2] = 163928591571.0 / 53268010936;
  r.c3[3] = 189284.0 / 185893;
  r.c3[m - 5] = r.c3[3];
  r.c3[m - 4] = 0.0;
  r.c3[m - 3] = r.c3[2];
  r.c3[m - 2] = r.c3[m - 1] = 0.0;

  r.c4 = Vec::Ones(m);
  r.c4[0] = r.c4[1] = 0.0;
  r.c4[2] = 1644330.0 / 301051;
  r.c4[3] = 156114.0 / 181507;
  r.c4[m - 4] = r.c4[3];
  r.c4[m - 3] = r.c4[2];
  r.c4[m - 2] = r.c4[m - 1] = 0.0;
  return r;
}

// Accumulates w * a a^T into a dense element anchored at `offset`.
void add_outer(Eigen::MatrixXd& M, int offset, const Row& a, double w) {
  for (auto [i, vi] : a) {
    for (auto [j, vj] : a) M(i - offset, j - offset) += w * vi * vj;
  }
}

std::pair<int, int> support(std::initializer_list<const Row*> rows) {
  int lo = 1 << 30, hi = -1;
  for (const Row* r : rows) {
    for (auto [j, v] : *r) {
      (void)v;
      lo = std::min(lo, j);
      hi = std::max(hi, j);
    }
  }
  return {lo, hi};
}

std::vector<D2Element> order4_elements(const std::vector<Row>& d1, const Vec& H, double h) {
  const int m = static_cast<int>(d1.size());
  const Order4Remainder r = order4_remainder(m);
  std::vector<D2Element> elems(m);
  for (int k = 0; k < m; ++k) {
    // b3_i = (b_i + b_{i+1}) / 2, so b_k feeds rows k-1 and k. The last row is
    // (b_{m-1} + b_{m-2}) / 2 but carries zero weight.
    std::vector<std::pair<int, double>> d3_rows;
    if (k - 1 >= 0) d3_rows.push_back({k - 1, 0.5 * r.c3[k - 1]});
    if (k <= m - 2) d3_rows.push_back({k, 0.5 * r.c3[k]});
    int lo = 1 << 30, hi = -1;
    auto widen = [&](const Row& row) {
      auto [a, b] = support({&row});
      if (b >= 0) {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    };
    widen(d1[k]);
    widen(r.d4[k]);
    for (auto [i, w] : d3_rows) {
      if (w != 0.0) widen(r.d3[i]);
    }
    D2Element e;
    e.offset = lo;
    e.M = Eigen::MatrixXd::Zero(hi - lo + 1, hi - lo + 1);
    add_outer(e.M, lo, d1[k], H[k]);
    for (auto [i, w] : d3_rows) {
      if (w != 0.0) add_outer(e.M, lo, r.d3[i], w / (18.0 * h));
    }
    if (r.c4[k] != 0.0) add_outer(e.M, lo, r.d4[k], r.c4[k] / (144.0 * h));
    elems[k] = std::move(e);
  }
  return elems;
}

std::vector<D2Element> order6_elements(int m, double h) {
  std::vector<D2Element> elems(m);
  for (int k = 0; k < m; ++k) {
    D2Element e;
    if (k < 6 || k >= m - 6) {
      const bool left = k < 6;
      const int j = left ? k : m - 1 - k;
      e.offset = left ? 0 : m - 9;
      e.M.resize(9, 9);
      for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) {
          const double v = coeffs::kD2Order6Boundary[j][a][b];
          if (left) {
            e.M(a, b) = v;
          } else {
            e.M(8 - a, 8 - b) = v;
          }
        }
      }
    } else {
      e.offset = k - 3;
      e.M.resize(7, 7);
      for (int a = 0; a < 7; ++a) {
        for (int b = 0; b < 7; ++b) e.M(a, b) = kD2Order6Interior[a][b];
      }
    }
    // Exact zero row sums keep D2 annihilating constants after rounding.
    for (int a = 0; a < e.M.rows(); ++a) {
      double off = 0.0;
      for (int b = 0; b < e.M.cols(); ++b) {
        if (b != a) off += e.M(a, b);
      }
      e.M(a, a) = -off;
    }
    e.M /= h;
    elems[k] = std::move(e);
  }
  return elems;
}

}  // namespace

Vec SbpOperatorSet1D::e_l() const {
  Vec e = Vec::Zero(m);
  e[0] = 1.0;
  return e;
}

Vec SbpOperatorSet1D::e_r() const {
  Vec e = Vec::Zero(m);
  e[m - 1] = 1.0;
  return e;
}

int minimum_points(int order) {
  if (order == 4) return 8;
  if (order == 6) return 12;
  throw ConfigError(fmt::format("unsupported SBP order {} (expected 4 or 6)", order));
}

SbpOperatorSet1D build_first_derivative(int m, double h, int order) {
  const int mmin = minimum_points(order);
  if (m < mmin) {
    throw ConfigError(
        fmt::format("order {} operators need at least {} grid points, got {}", order, mmin, m));
  }
  if (!(h > 0.0)) throw ConfigError(fmt::format("grid spacing must be positive, got {}", h));

  SbpOperatorSet1D ops;
  ops.m = m;
  ops.h = h;
  ops.order = order;
  ops.H = norm_diagonal(m, h, order);
  const auto rows = d1_rows(m, h, order);
  ops.D1 = rows_to_matrix(rows, m);

  ops.d_l = Vec::Zero(m);
  ops.d_r = Vec::Zero(m);
  if (order == 4) {
    const std::array<double, 4> s = {-11.0 / 6, 3.0, -1.5, 1.0 / 3};
    for (int j = 0; j < 4; ++j) {
      ops.d_l[j] = s[j] / h;
      ops.d_r[m - 1 - j] = -s[j] / h;
    }
    ops.elements = order4_elements(rows, ops.H, h);
  } else {
    const std::array<double, 5> s = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25};
    for (int j = 0; j < 5; ++j) {
      ops.d_l[j] = s[j] / h;
      ops.d_r[m - 1 - j] = -s[j] / h;
    }
    ops.elements = order6_elements(m, h);
  }
  return ops;
}

SpMat build_M(const SbpOperatorSet1D& base, const Vec& c) {
  if (c.size() != base.m) {
    throw DimensionError(
        fmt::format("coefficient vector has length {}, operator has {} points", c.size(), base.m));
  }
  std::vector<Triplet> t;
  for (int k = 0; k < base.m; ++k) {
    const auto& e = base.elements[k];
    if (c[k] == 0.0) continue;
    for (int a = 0; a < e.M.rows(); ++a) {
      for (int b = 0; b < e.M.cols(); ++b) {
        if (e.M(a, b) != 0.0) t.emplace_back(e.offset + a, e.offset + b, c[k] * e.M(a, b));
      }
    }
  }
  SpMat M(base.m, base.m);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SpMat build_D2(const SbpOperatorSet1D& base, const Vec& c) {
  SpMat M = build_M(base, c);
  std::vector<Triplet> t;
  const int m = base.m;
  for (int i = 0; i < m; ++i) {
    for (SpMat::InnerIterator it(M, i); it; ++it) t.emplace_back(i, it.col(), -it.value() / base.H[i]);
  }
  for (int j = 0; j < m; ++j) {
    if (base.d_l[j] != 0.0) t.emplace_back(0, j, -c[0] * base.d_l[j] / base.H[0]);
    if (base.d_r[j] != 0.0) t.emplace_back(m - 1, j, c[m - 1] * base.d_r[j] / base.H[m - 1]);
  }
  SpMat D2(m, m);
  D2.setFromTriplets(t.begin(), t.end());
  return D2;
}

SbpSecondDerivative1D build_second_derivative(const SbpOperatorSet1D& base, const Vec& c) {
  SbpSecondDerivative1D out;
  out.c = c;
  out.Mc = build_M(base, c);
  out.D2c = build_D2(base, c);
  SpMat HcD1 = (base.H.cwiseProduct(c)).asDiagonal() * base.D1;
  SpMat D1t = base.D1.transpose();
  SpMat G = D1t * HcD1;
  SpMat R = out.Mc - G;
  R.prune(0.0);
  out.Rc = R;
  return out;
}

double boundary_derivative_left(const SbpOperatorSet1D& base, LineView v) {
  double s = 0.0;
  const int w = base.order == 4 ? 4 : 5;
  for (int j = 0; j < w; ++j) s += base.d_l[j] * v[j];
  return s;
}

double boundary_derivative_right(const SbpOperatorSet1D& base, LineView v) {
  double s = 0.0;
  const int w = base.order == 4 ? 4 : 5;
  for (int j = base.m - w; j < base.m; ++j) s += base.d_r[j] * v[j];
  return s;
}

void accumulate_d2_density(const SbpOperatorSet1D& base, LineView u, LineView v, double scale,
                           double* out, int out_stride) {
  const int m = base.m;
  for (int k = 0; k < m; ++k) {
    const auto& e = base.elements[k];
    const int n = static_cast<int>(e.M.rows());
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
      const double ua = u[e.offset + a];
      if (ua == 0.0) continue;
      double row = 0.0;
      for (int b = 0; b < n; ++b) row += e.M(a, b) * v[e.offset + b];
      s += ua * row;
    }
    out[static_cast<long>(k) * out_stride] -= scale * s;
  }
  out[0] -= scale * u[0] * boundary_derivative_left(base, v);
  out[static_cast<long>(m - 1) * out_stride] += scale * u[m - 1] * boundary_derivative_right(base, v);
}

Vec build_time_quadrature(int n, double dt) {
  if (n + 1 < 12) {
    throw ConfigError(
        fmt::format("time quadrature needs at least 11 steps for its boundary closures, got {}", n));
  }
  if (!(dt > 0.0)) throw ConfigError(fmt::format("time step must be positive, got {}", dt));
  return norm_diagonal(n + 1, dt, 6);
}

}  // namespace shapeopt
