#pragma once

#include "cvd/geometry.hpp"

namespace cvd {

struct SubspaceFit {
  Vec center;      // empirical mean in R^n
  Mat basis;       // D x n, orthonormal rows
  int reduced_dim = 0;
  double residual = 0.0;  // mean squared distance to the affine subspace
  bool degenerate = false;  // covariance rank < D, basis padded
};

/// D := min(n, ceil(c_M^{-1} omega_d^{-1} eps0^{-d})).
inline int choose_reduced_dim(int n, int d, double c_M, double eps0) {
  if (!(eps0 > 0.0 && eps0 <= 2.0))
    throw std::invalid_argument("choose_reduced_dim: eps0 must be in (0, 2]");
  if (!(c_M > 0.0 && c_M < std::exp(-1.0)))
    throw std::invalid_argument("choose_reduced_dim: c_M must be in (0, 1/e)");
  if (n < 1) throw std::invalid_argument("choose_reduced_dim: n must be >= 1");
  double raw = (1.0 / c_M) / unit_ball_volume(d) / std::pow(eps0, d);
  // absorb float round-off so exact integer targets are not bumped up
  double ceil_raw = std::ceil(raw * (1.0 - 1e-12));
  if (ceil_raw >= static_cast<double>(n)) return n;
  return static_cast<int>(ceil_raw);
}

/// Centered PCA. Basis rows are the top-D principal directions, eigenvalues
/// descending, each eigenvector's first nonzero coordinate forced positive so
/// the fit is deterministic. Residual is the sum of trailing covariance
/// eigenvalues (= mean squared distance of the block to the subspace).
inline SubspaceFit fit_subspace(const PointCloud& blockP, int D) {
  const long m = blockP.size();
  const int n = blockP.dim();
  if (D < 0 || D > n) throw std::invalid_argument("fit_subspace: D out of range");
  if (m < D + 1) throw StageError("fit_subspace: block too small for requested dimension");

  SubspaceFit fit;
  fit.reduced_dim = D;
  fit.center = blockP.pts.colwise().mean().transpose();

  Mat centered = blockP.pts.rowwise() - fit.center.transpose();
  Mat cov = (centered.transpose() * centered) / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  // SelfAdjointEigenSolver returns ascending eigenvalues; flip to descending.
  Vec evals = eig.eigenvalues().reverse();
  Mat evecs = eig.eigenvectors().rowwise().reverse();

  fit.basis.resize(D, n);
  for (int i = 0; i < D; ++i) {
    Vec v = evecs.col(i);
    for (int j = 0; j < n; ++j) {
      if (std::abs(v[j]) > 1e-12) {
        if (v[j] < 0.0) v = -v;
        break;
      }
    }
    fit.basis.row(i) = v.transpose();
    if (evals[i] < 1e-14) fit.degenerate = true;
  }
  double trailing = 0.0;
  for (int i = D; i < n; ++i) trailing += std::max(0.0, evals[i]);
  fit.residual = trailing;
  return fit;
}

/// Coordinates of the orthogonal projection of each point onto the affine
/// subspace, expressed in the fit's basis (dimension D).
inline PointCloud project(const SubspaceFit& fit, const PointCloud& P) {
  if (P.dim() != fit.center.size())
    throw std::invalid_argument("project: dimension mismatch");
  Mat centered = P.pts.rowwise() - fit.center.transpose();
  return PointCloud(centered * fit.basis.transpose());
}

inline Vec project_point(const SubspaceFit& fit, const Vec& y) {
  return fit.basis * (y - fit.center);
}

/// Lift basis coordinates back to the ambient space.
inline Vec lift(const SubspaceFit& fit, const Vec& coords) {
  return fit.center + fit.basis.transpose() * coords;
}

/// Squared distance of y to the affine subspace.
inline double subspace_dist_sq(const SubspaceFit& fit, const Vec& y) {
  Vec c = y - fit.center;
  return c.squaredNorm() - (fit.basis * c).squaredNorm();
}

/// R = C sigma sqrt(n) + C sigma sqrt(log(C N0 / alpha)).
inline double truncation_radius(double sigma, int n, long N0, double alpha, double C = 2.0) {
  if (sigma < 0.0 || n < 1 || N0 < 1 || !(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("truncation_radius: invalid inputs");
  return C * sigma * std::sqrt(static_cast<double>(n)) +
         C * sigma * std::sqrt(std::log(C * static_cast<double>(N0) / alpha));
}

/// eps_emp = 2 (R+1)^2 ((sqrt(D)+2)/sqrt(N0)) (1 + sqrt(2 ln(4/alpha))).
inline double eps_emp(double R, int D, long N0, double alpha) {
  if (R < 0.0 || D < 1 || N0 < 1 || !(alpha > 0.0 && alpha < 4.0))
    throw std::invalid_argument("eps_emp: invalid inputs");
  return 2.0 * (R + 1.0) * (R + 1.0) *
         ((std::sqrt(static_cast<double>(D)) + 2.0) / std::sqrt(static_cast<double>(N0))) *
         (1.0 + std::sqrt(2.0 * std::log(4.0 / alpha)));
}

/// Subspace bias bound: C * d * (4 eps0^2 + 2 eps_emp)^{1/(d+2)}.
inline double pca_bias_bound(int d, double eps0, double eps_emp_val, double C = 1.0) {
  if (d < 1 || eps0 < 0.0 || eps_emp_val < 0.0)
    throw std::invalid_argument("pca_bias_bound: invalid inputs");
  return C * static_cast<double>(d) *
         std::pow(4.0 * eps0 * eps0 + 2.0 * eps_emp_val, 1.0 / (d + 2.0));
}

}  // namespace cvd
