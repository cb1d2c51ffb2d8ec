#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

namespace rssiloc::linalg {

/// Moore-Penrose pseudo-inverse of a symmetric matrix. Eigenvalues with
/// |lambda| <= rel_cutoff * lambda_max are treated as zero. Returns nullopt
/// when the matrix is numerically zero.
inline std::optional<Eigen::MatrixXd> symmetric_pinv(const Eigen::MatrixXd& m, double rel_cutoff) {
  if (m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.cwiseAbs().maxCoeff();
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) return std::nullopt;
  const double cutoff = rel_cutoff * lambda_max;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (std::abs(lambda(i)) > cutoff) inv(i) = 1.0 / lambda(i);
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  Eigen::MatrixXd out = v * inv.asDiagonal() * v.transpose();
  return Eigen::MatrixXd(0.5 * (out + out.transpose()));
}

/// I - (1/M) 1 1^T
inline Eigen::MatrixXd centering_projector(Eigen::Index m) {
  return Eigen::MatrixXd::Identity(m, m) - Eigen::MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m));
}

/// True when a symmetric 2x2 matrix is numerically singular relative to its scale.
inline bool is_rank_deficient(const Eigen::Matrix2d& n) {
  const double scale = n.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return true;
  return std::abs(n.determinant()) <= 1e-12 * scale * scale;
}

/// Both eigenvalues of a symmetric 2x2 matrix strictly positive (relative to scale).
inline bool is_positive_definite(const Eigen::Matrix2d& n) {
  const double scale = n.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  return n(0, 0) > 0.0 && n.determinant() > 1e-12 * scale * scale;
}

/// Minimal-norm least-squares solution of X beta = y.
inline Eigen::VectorXd min_norm_lstsq(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
  return cod.solve(y);
}

}  // namespace rssiloc::linalg
