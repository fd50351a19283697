#pragma once

#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace lindblad {

/// The noise-reachability filtration V_0 subset V_1 subset ... with
/// V_0 = span{Re l_k, Im l_k} and V_{k+1} = V_k + F V_k, together with its
/// orthogonal increments W_k and the unreached complement W_DF.
///
/// dims lists dim V_k starting at k = 0. When the filtration stabilizes below
/// the full dimension the repeated value appears once at the end; when it
/// reaches the full space it stops there. bases holds orthonormal bases for
/// V_0 .. V_r only.
struct HormanderFiltration {
  std::vector<Mat> bases;
  std::vector<int> dims;
  int r = 0;
  bool holds = false;
  std::vector<Mat> w_blocks;
  Mat w_df;
  double tol = 1e-10;
};

/// Builds the filtration with singular-value rank decisions at relative
/// threshold tol. Stabilization is detected by dimension equality; the
/// iteration count never exceeds 2n-1 because each step before stabilization
/// adds at least one dimension.
inline HormanderFiltration filtration(const SystemModel& m, double tol = 1e-10) {
  if (!(tol > 0.0) || tol > 1e-4)
    throw ValidationError("filtration: tol must lie in (0, 1e-4]");
  const int d = 2 * m.n();
  HormanderFiltration f;
  f.tol = tol;

  Mat noise(d, 2 * static_cast<int>(m.lindblad().size()));
  for (std::size_t k = 0; k < m.lindblad().size(); ++k) {
    noise.col(2 * k) = m.lindblad()[k].real();
    noise.col(2 * k + 1) = m.lindblad()[k].imag();
  }
  f.bases.push_back(column_space_basis(noise, tol));
  f.dims.push_back(static_cast<int>(f.bases.back().cols()));

  for (int k = 0;; ++k) {
    const Mat& cur = f.bases.back();
    if (cur.cols() == d) {
      f.r = k;
      f.holds = true;
      break;
    }
    Mat cand(d, 2 * cur.cols());
    cand << cur, m.F() * cur;
    Mat next = column_space_basis(cand, tol);
    if (next.cols() == cur.cols()) {
      f.r = k;
      f.holds = false;
      f.dims.push_back(static_cast<int>(next.cols()));
      break;
    }
    f.bases.push_back(std::move(next));
    f.dims.push_back(static_cast<int>(f.bases.back().cols()));
    if (k + 1 > d)
      throw IntegrityError("filtration: failed to stabilize within the dimension bound");
  }

  f.w_blocks.push_back(f.bases[0]);
  for (int k = 1; k <= f.r; ++k) {
    const Mat& prev = f.bases[k - 1];
    const Mat resid = f.bases[k] - prev * (prev.transpose() * f.bases[k]);
    Mat wk = column_space_basis(resid, tol);
    const int expect = static_cast<int>(f.bases[k].cols() - prev.cols());
    if (wk.cols() != expect)
      throw IntegrityError("filtration: increment block W_" + std::to_string(k) +
                           " has rank " + std::to_string(wk.cols()) + ", expected " +
                           std::to_string(expect));
    f.w_blocks.push_back(std::move(wk));
  }

  const Mat& top = f.bases[f.r];
  if (top.cols() == 0) {
    f.w_df = Mat::Identity(d, d);
  } else if (top.cols() == d) {
    f.w_df = Mat(d, 0);
  } else {
    Eigen::JacobiSVD<Mat> svd(top, Eigen::ComputeFullU);
    f.w_df = svd.matrixU().rightCols(d - top.cols());
  }
  return f;
}

/// Whether the symplectic form restricted to W_DF is nondegenerate, i.e.
/// whether the decoherence-free directions carry a closed subsystem.
inline bool symplectic_df(const HormanderFiltration& f) {
  if (f.w_df.cols() == 0) return true;
  const int d = static_cast<int>(f.w_df.rows());
  const Mat restricted = f.w_df.transpose() * symplectic_form(d / 2) * f.w_df;
  Eigen::JacobiSVD<Mat> svd(restricted);
  return svd.singularValues()(svd.singularValues().size() - 1) > f.tol;
}

/// j >= 0: the direction first appears in V_j; its diffusion grows as t^{2j+1}.
/// df: the direction is orthogonal to every V_k and never decoheres.
struct DirectionClass {
  bool df = false;
  int j = -1;
};

inline DirectionClass classify_direction(const HormanderFiltration& f, const Vec& xi) {
  if (f.bases.empty() || xi.size() != f.bases[0].rows())
    throw ValidationError("classify_direction: dimension mismatch");
  const double norm = xi.norm();
  if (norm == 0.0) throw ValidationError("classify_direction: zero direction");
  for (int j = 0; j <= f.r; ++j) {
    if ((f.bases[j].transpose() * xi).norm() >= f.tol * norm) return {false, j};
  }
  return {true, -1};
}

struct ChainModeOrder {
  int mode = 0;  // 1-based
  DirectionClass p, q;
};

/// Per-mode classification for chain-structured models (Q = Q_n kron I_2 in
/// interleaved coordinates). Refuses models without that block structure.
inline std::vector<ChainModeOrder> chain_order_map(const SystemModel& m,
                                                   const HormanderFiltration& f) {
  const int n = m.n();
  const double tol = 1e-10 * std::max(1.0, m.Q().cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto b = m.Q().block(2 * i, 2 * j, 2, 2);
      if (std::abs(b(0, 1)) > tol || std::abs(b(1, 0)) > tol ||
          std::abs(b(0, 0) - b(1, 1)) > tol)
        throw ValidationError("chain_order_map: unsupported structure, Q block (" +
                              std::to_string(i + 1) + "," + std::to_string(j + 1) +
                              ") is not a scalar multiple of the identity");
    }
  std::vector<ChainModeOrder> table;
  const int d = 2 * n;
  for (int i = 0; i < n; ++i) {
    ChainModeOrder row;
    row.mode = i + 1;
    row.p = classify_direction(f, Vec::Unit(d, 2 * i));
    row.q = classify_direction(f, Vec::Unit(d, 2 * i + 1));
    table.push_back(row);
  }
  return table;
}

inline std::vector<ChainModeOrder> chain_order_map(const SystemModel& m) {
  return chain_order_map(m, filtration(m));
}

}  // namespace lindblad
