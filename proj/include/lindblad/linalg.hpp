#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "errors.hpp"

namespace lindblad {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Symplectic form in interleaved coordinates (p_1, q_1, ..., p_n, q_n):
/// block diagonal with 2x2 blocks [[0, -1], [1, 0]].
inline Mat symplectic_form(int n) {
  Mat om = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    om(2 * k, 2 * k + 1) = -1.0;
    om(2 * k + 1, 2 * k) = 1.0;
  }
  return om;
}

/// exp(t A) by scaling and squaring. Refuses arguments large enough that the
/// result is garbage or infinite; 500 in Frobenius norm is already e^217
/// past any regime where downstream quantities are representable.
inline Mat matrix_exp(const Mat& a, double t) {
  const double scale = std::abs(t) * a.norm();
  if (!std::isfinite(scale) || scale > 500.0) {
    throw IntegrityError("matrix_exp: ||t*A||_F = " + std::to_string(scale) +
                         " exceeds the supported range (500)");
  }
  return (t * a).exp();
}

/// Composite Simpson rule over [a, b]. steps is rounded up to the nearest
/// even count. f must return something addable and scalable (double, Vec,
/// Mat); the return type is whatever f returns.
template <class F>
auto simpson(F&& f, double a, double b, int steps) -> decltype(f(a)) {
  if (steps < 2) steps = 2;
  if (steps % 2 != 0) ++steps;
  const double h = (b - a) / steps;
  decltype(f(a)) acc = f(a) + f(b);
  for (int i = 1; i < steps; ++i) {
    acc = acc + (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  }
  return acc * (h / 3.0);
}

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // columns, orthonormal
};

inline SymEig sym_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) {
    throw IntegrityError("sym_eig: eigensolver failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const Mat& m) { return sym_eig(m).values(0); }

/// Orthonormal basis of the column span of m, rank decided by singular
/// values >= tol * largest. Returns a 2n x rank matrix (possibly 0 columns).
inline Mat column_space_basis(const Mat& m, double tol) {
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return Mat(m.rows(), 0);
  int rank = 0;
  while (rank < sv.size() && sv(rank) >= tol * sv(0)) ++rank;
  return svd.matrixU().leftCols(rank);
}

inline Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace lindblad
