#pragma once

#include "shapeopt/sbp1d.hpp"

namespace shapeopt {

// 1D operators applied along one reference direction of a column-major block
// vector (xi is the slow index, eta the fast one).

inline Vec apply_xi(const SpMat& D, const Vec& v, int m_eta) {
  Vec out = Vec::Zero(v.size());
  for (int r = 0; r < D.rows(); ++r) {
    auto o = out.segment(static_cast<Eigen::Index>(r) * m_eta, m_eta);
    for (SpMat::InnerIterator it(D, r); it; ++it) {
      o += it.value() * v.segment(static_cast<Eigen::Index>(it.col()) * m_eta, m_eta);
    }
  }
  return out;
}

inline Vec apply_xi_transpose(const SpMat& D, const Vec& v, int m_eta) {
  Vec out = Vec::Zero(v.size());
  for (int r = 0; r < D.rows(); ++r) {
    auto src = v.segment(static_cast<Eigen::Index>(r) * m_eta, m_eta);
    for (SpMat::InnerIterator it(D, r); it; ++it) {
      out.segment(static_cast<Eigen::Index>(it.col()) * m_eta, m_eta) += it.value() * src;
    }
  }
  return out;
}

inline Vec apply_eta(const SpMat& D, const Vec& v, int m_eta) {
  Vec out(v.size());
  const int m_xi = static_cast<int>(v.size() / m_eta);
  for (int i = 0; i < m_xi; ++i) {
    out.segment(static_cast<Eigen::Index>(i) * m_eta, m_eta) =
        D * v.segment(static_cast<Eigen::Index>(i) * m_eta, m_eta);
  }
  return out;
}

inline Vec apply_eta_transpose(const SpMat& D, const Vec& v, int m_eta) {
  Vec out(v.size());
  const int m_xi = static_cast<int>(v.size() / m_eta);
  for (int i = 0; i < m_xi; ++i) {
    out.segment(static_cast<Eigen::Index>(i) * m_eta, m_eta) =
        D.transpose() * v.segment(static_cast<Eigen::Index>(i) * m_eta, m_eta);
  }
  return out;
}

}  // namespace shapeopt
