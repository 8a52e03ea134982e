#pragma once

#include <limits>
#include <vector>

#include "cvd/geometry.hpp"

namespace cvd {

struct HullProjection {
  Vec point;
  double distance = 0.0;
};

/// Wolfe's min-norm-point algorithm applied to the translated vertex set
/// {v_i - y}: the nearest point of conv(V) to y is y + x* where x* is the
/// minimum-norm point of the translated hull. Exact up to `tol`.
inline HullProjection project_onto_hull(const Vec& y, const PointCloud& V,
                                        double tol = 1e-10, int max_iter = 10000) {
  if (V.empty()) throw StageError("project_onto_hull: empty vertex set");
  if (y.size() != V.dim())
    throw std::invalid_argument("project_onto_hull: dimension mismatch");

  const long n = V.size();
  const int dim = V.dim();

  // translated points p_i = v_i - y
  Mat P = V.pts;
  P.rowwise() -= y.transpose();

  // start from the point of smallest norm
  long best = 0;
  double best_sq = P.row(0).squaredNorm();
  for (long i = 1; i < n; ++i) {
    double s = P.row(i).squaredNorm();
    if (s < best_sq) {
      best_sq = s;
      best = i;
    }
  }

  std::vector<long> active{best};
  std::vector<double> coeff{1.0};
  Vec x = P.row(best).transpose();

  auto affine_minimizer = [&](const std::vector<long>& S, Vec& out) -> Vec {
    // minimize ||sum a_i p_i|| subject to sum a_i = 1 (KKT system)
    const int m = static_cast<int>(S.size());
    Mat A(m + 1, m + 1);
    Vec rhs = Vec::Zero(m + 1);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = P.row(S[i]).dot(P.row(S[j]));
    for (int i = 0; i < m; ++i) {
      A(i, m) = 1.0;
      A(m, i) = 1.0;
    }
    A(m, m) = 0.0;
    rhs[m] = 1.0;
    Vec sol = A.fullPivLu().solve(rhs);
    Vec a = sol.head(m);
    out = Vec::Zero(dim);
    for (int i = 0; i < m; ++i) out += a[i] * P.row(S[i]).transpose();
    return a;
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    // most aligned vertex with -x
    long j = 0;
    double min_dot = std::numeric_limits<double>::infinity();
    for (long i = 0; i < n; ++i) {
      double d = P.row(i).dot(x);
      if (d < min_dot) {
        min_dot = d;
        j = i;
      }
    }
    double gap = x.squaredNorm() - min_dot;
    if (gap <= tol * std::max(1.0, x.norm())) {
      HullProjection out;
      out.point = y + x;
      out.distance = x.norm();
      return out;
    }

    bool present = false;
    for (long a : active)
      if (a == j) present = true;
    if (!present) {
      active.push_back(j);
      coeff.push_back(0.0);
    }

    // minor cycle: pull the affine minimizer back into the simplex
    for (;;) {
      Vec z;
      Vec a = affine_minimizer(active, z);
      bool feasible = true;
      for (int i = 0; i < a.size(); ++i)
        if (a[i] < -1e-12) feasible = false;
      if (feasible) {
        x = z;
        coeff.assign(a.data(), a.data() + a.size());
        break;
      }
      // step toward z until a coefficient hits zero, then drop it
      double theta = 1.0;
      for (size_t i = 0; i < active.size(); ++i) {
        double ai = a[static_cast<int>(i)];
        if (ai < coeff[i]) {
          double t = coeff[i] / (coeff[i] - ai);
          theta = std::min(theta, t);
        }
      }
      std::vector<long> next_active;
      std::vector<double> next_coeff;
      Vec xnew = Vec::Zero(dim);
      for (size_t i = 0; i < active.size(); ++i) {
        double c = (1.0 - theta) * coeff[i] + theta * a[static_cast<int>(i)];
        if (c > 1e-12) {
          next_active.push_back(active[i]);
          next_coeff.push_back(c);
          xnew += c * P.row(active[i]).transpose();
        }
      }
      if (next_active.empty()) {
        // numerical wipeout: restart from the support vertex
        next_active.push_back(j);
        next_coeff.push_back(1.0);
        xnew = P.row(j).transpose();
      }
      double norm = 0.0;
      for (double c : next_coeff) norm += c;
      for (double& c : next_coeff) c /= norm;
      active = std::move(next_active);
      coeff = std::move(next_coeff);
      x = xnew / norm;
    }
  }
  throw StageError("oracle failure: hull projection did not converge, residual " +
                   std::to_string(x.norm()));
}

/// max over vertices of <v, omega>; hull max equals vertex max.
/// Ties resolved to the lowest index (consumed by the net argmax).
inline double support_function(const PointCloud& V, const Vec& omega, long* argmax = nullptr) {
  if (V.empty()) throw StageError("support_function: empty vertex set");
  if (omega.size() != V.dim())
    throw std::invalid_argument("support_function: dimension mismatch");
  long best = 0;
  double best_val = V.pts.row(0).dot(omega);
  for (long i = 1; i < V.size(); ++i) {
    double v = V.pts.row(i).dot(omega);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (argmax) *argmax = best;
  return best_val;
}

inline bool hull_membership(const Vec& y, const PointCloud& V, double tol) {
  return project_onto_hull(y, V).distance <= tol;
}

}  // namespace cvd
