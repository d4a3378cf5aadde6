#pragma once

#include <Eigen/SparseCholesky>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "shapeopt/geometry.hpp"

namespace shapeopt {

enum class EdgeTag { Dirichlet, Neumann, Outflow, Inflow, Interface, Symmetry };

const char* tag_name(EdgeTag t);
EdgeTag parse_tag(const std::string& s);

// Boundary data of one block edge. Nodes run in increasing tangential index.
struct EdgeOperators {
  std::vector<int> nodes;  // block-local indices
  Vec Hedge;               // 1D norm along the edge (reference spacing)
  Vec W;                   // scale factor at the edge nodes
  Vec Hk;                  // boundary quadrature Hedge * W
  SpMat F;                 // flux rows H_k d_k (edge size x block size)
};

// Per-block operators. K = H D_L with H = H_xi H_eta J, which is linear in the
// metric fields (alpha1, beta, alpha2).
struct BlockOperators2D {
  int m_xi = 0, m_eta = 0;
  BlockOperators1D ops;
  CurvilinearBlock geo;
  Vec Hvol;  // H_xi H_eta
  Vec H;     // Hvol * J
  SpMat K;
  std::array<EdgeOperators, 4> edges;
  bool has_cross_terms = true;

  int size() const { return m_xi * m_eta; }
  SpMat laplacian() const;  // D_L = H^{-1} K
  SpMat Dx() const;
  SpMat Dy() const;
  SpMat remainder_form() const;  // R_xi^(alpha1) H_eta + R_eta^(alpha2) H_xi
};

BlockOperators2D assemble_block(const CurvilinearBlock& geo, const BlockOperators1D& ops);

// Volume form and edge flux rows for arbitrary coefficient fields. Both are
// linear in (a1, a2, beta), which is what the shape derivatives rely on.
struct BlockForms {
  SpMat K;
  std::array<SpMat, 4> F;  // indexed by Side
};
BlockForms block_forms(const BlockOperators1D& ops, const Vec& Hvol, const Vec& a1, const Vec& a2,
                       const Vec& beta, bool cross);

// D_xx + D_yy on [0, Lx] x [0, Ly] from tensor products with physical spacing.
SpMat cartesian_laplacian(int m_x, int m_y, double Lx, double Ly, int order);

struct InterfaceSpec {
  int block_a = 0;  // receives the flux coupling
  Side side_a = Side::South;
  int block_b = 0;
  Side side_b = Side::North;
};

struct SystemSpec {
  std::vector<BlockGeometrySpec> blocks;
  std::vector<std::array<EdgeTag, 4>> tags;
  std::vector<InterfaceSpec> interfaces;
  double c = 1.0;
};

struct InterfaceMap {
  InterfaceSpec spec;
  std::vector<int> perm;  // edge index on b matched to edge index q on a
};

// Projection P = I - H^{-1} L^T (L H^{-1} L^T)^{-1} L applied matrix-free.
class Projection {
 public:
  Projection() = default;
  Projection(SpMat L, const Vec& Hbar);
  Vec apply(const Vec& u) const;
  const SpMat& L() const { return L_; }
  int rank() const { return static_cast<int>(L_.rows()); }

 private:
  SpMat L_;
  Eigen::SparseMatrix<double> Lt_;
  Vec Hinv_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> solver_;
};

// Rows of the constraint matrix from union-find classes of matched nodes.
SpMat build_constraints(int N, const std::vector<std::vector<std::pair<int, int>>>& matches,
                        const std::vector<int>& dirichlet_nodes);

struct GlobalSystem {
  SystemSpec spec;
  std::vector<BlockOperators2D> blocks;
  std::vector<int> offsets;
  std::vector<InterfaceMap> interfaces;
  int N = 0;
  double c = 1.0;
  Vec Hbar, Hbar_inv;
  SpMat K;    // global H A with A the pre-projection operator
  Vec Bdiag;  // H SAT_BC2 (diagonal, non-positive)
  Projection P;
  Vec inflow;  // c H^{-1} sum_k e_k^T H_k 1 over inflow edges

  Vec apply_A(const Vec& u) const;  // H^{-1} K u
  Vec apply_D(const Vec& u) const;  // c^2 P A P u
  Vec apply_E(const Vec& u) const;  // c P H^{-1} B P u
  Vec project(const Vec& u) const { return P.apply(u); }
  double inner(const Vec& u, const Vec& v) const;  // (u, v)_Hbar

  int block_of(int global_index) const;
  Vec block_view(const Vec& u, int b) const {
    return u.segment(offsets[b], blocks[b].size());
  }
};

// Builds geometry for design vector p (concatenated over design blocks in block
// order) and assembles everything.
GlobalSystem assemble_global(const SystemSpec& spec, const Vec& p);

int design_size(const SystemSpec& spec);

// Discrete delta with sum_j H_j delta_j x_j^k = x_s^k, k < order, on the
// `order` nearest points.
Vec discrete_delta_1d(const SbpOperatorSet1D& op, double x0, double x_s);

// Global point-source vector inside a non-design rectangular block.
Vec build_point_source(const GlobalSystem& sys, double xs, double ys);

}  // namespace shapeopt
