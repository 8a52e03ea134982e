#pragma once

#include <functional>
#include <vector>

#include "cvd/geometry.hpp"
#include "cvd/rng.hpp"

namespace cvd {

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
struct GaussLegendre {
  std::vector<double> nodes, weights;

  explicit GaussLegendre(int n) {
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
      // Chebyshev initial guess
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
          double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

inline const GaussLegendre& gl64() {
  static const GaussLegendre q(64);
  return q;
}
inline const GaussLegendre& gl8() {
  static const GaussLegendre q(8);
  return q;
}

/// C^1 density on R^k; the shipped densities are supported in the ball of
/// radius 1/2 (the evaluator itself vanishes outside it).
struct Density {
  int k = 3;
  std::function<double(const Vec&)> evaluator;
  double sobolev_seminorm_est = 0.0;  // homogeneous W^{1,2} seminorm
  double l2_norm_est = 0.0;

  double operator()(const Vec& q) const { return evaluator(q); }
};

struct Rotation {
  Mat matrix;

  explicit Rotation(Mat m) : matrix(std::move(m)) {
    Mat err = matrix.transpose() * matrix - Mat::Identity(matrix.rows(), matrix.cols());
    if (err.norm() > 1e-10) throw std::invalid_argument("Rotation: not orthogonal");
    if (std::abs(matrix.determinant() - 1.0) > 1e-10)
      throw std::invalid_argument("Rotation: determinant must be +1");
  }
};

inline double d_hs(const Rotation& a, const Rotation& b) {
  return (a.matrix - b.matrix).norm();
}

/// Haar rotation: QR of a Gaussian matrix with the R-diagonal sign absorbed
/// into Q, then a determinant fix that preserves the distribution on SO(k).
inline Rotation haar_rotation(int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("haar_rotation: k must be >= 2");
  Rng rng(seed);
  Mat G(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < k; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  if (Q.determinant() < 0.0) Q.col(0) = -Q.col(0);
  return Rotation(std::move(Q));
}

inline Rotation rotation_2d(double angle) {
  Mat m(2, 2);
  m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return Rotation(std::move(m));
}

/// Rodrigues' formula for k=3.
inline Rotation rotation_axis_angle(const Vec& axis, double angle) {
  if (axis.size() != 3) throw std::invalid_argument("rotation_axis_angle: axis must be in R^3");
  Vec u = axis / axis.norm();
  Mat K(3, 3);
  K << 0, -u[2], u[1], u[2], 0, -u[0], -u[1], u[0], 0;
  Mat m = Mat::Identity(3, 3) + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
  return Rotation(std::move(m));
}

inline Density rotate_density(const Density& f, const Rotation& R) {
  Density g = f;
  Mat Rt = R.matrix.transpose();
  auto base = f.evaluator;
  g.evaluator = [base, Rt](const Vec& q) { return base(Rt * q); };
  return g;
}

/// Chord integral h(x) = int f(x, z) dz over z in [-sqrt(1-|x|^2), +sqrt(...)],
/// 64-node Gauss-Legendre per chord. `x` lives in R^{k-1}.
inline double xray_at(const Density& f, const Vec& x) {
  double r2 = x.squaredNorm();
  if (r2 >= 1.0) return 0.0;
  double half = std::sqrt(1.0 - r2);
  const auto& q = gl64();
  int k = f.k;
  Vec p(k);
  p.head(k - 1) = x;
  double sum = 0.0;
  for (size_t m = 0; m < q.nodes.size(); ++m) {
    p[k - 1] = half * q.nodes[m];
    sum += q.weights[m] * f(p);
  }
  return half * sum;
}

struct PixelImage {
  int k_minus_1 = 2;
  int n_pix = 16;
  Vec values;  // length n_pix^{k-1}, row-major over axes
};

/// v_i = n_pix^{(k-1)/2} * integral of h over pixel i of [-1/2, 1/2]^{k-1};
/// tensor 8-node Gauss-Legendre per pixel. Exact for constants, and an
/// L^2 contraction by Cauchy-Schwarz.
inline PixelImage pixel_sample(const std::function<double(const Vec&)>& h, int k_minus_1,
                               int n_pix) {
  if (n_pix < 1) throw std::invalid_argument("pixel_sample: n_pix must be >= 1");
  if (k_minus_1 < 1 || k_minus_1 > 2)
    throw std::invalid_argument("pixel_sample: only image dimensions 1 and 2 supported");
  const auto& q = gl8();
  const double w = 1.0 / n_pix;  // pixel width
  const double scale = std::pow(static_cast<double>(n_pix), 0.5 * k_minus_1);

  PixelImage img;
  img.k_minus_1 = k_minus_1;
  img.n_pix = n_pix;
  long total = 1;
  for (int a = 0; a < k_minus_1; ++a) total *= n_pix;
  img.values.resize(total);

  Vec x(k_minus_1);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    std::vector<int> cell(k_minus_1);
    for (int a = k_minus_1 - 1; a >= 0; --a) {
      cell[a] = static_cast<int>(rem % n_pix);
      rem /= n_pix;
    }
    double acc = 0.0;
    if (k_minus_1 == 1) {
      double lo = -0.5 + w * cell[0];
      for (size_t i = 0; i < q.nodes.size(); ++i) {
        x[0] = lo + 0.5 * w * (q.nodes[i] + 1.0);
        acc += 0.5 * w * q.weights[i] * h(x);
      }
    } else {
      double lo0 = -0.5 + w * cell[0];
      double lo1 = -0.5 + w * cell[1];
      for (size_t i = 0; i < q.nodes.size(); ++i)
        for (size_t j = 0; j < q.nodes.size(); ++j) {
          x[0] = lo0 + 0.5 * w * (q.nodes[i] + 1.0);
          x[1] = lo1 + 0.5 * w * (q.nodes[j] + 1.0);
          acc += 0.25 * w * w * q.weights[i] * q.weights[j] * h(x);
        }
    }
    img.values[idx] = scale * acc;
  }
  return img;
}

/// Composition: rotate, chord-integrate, pixel-average.
inline PixelImage forward_map(const Density& f, const Rotation& R, int n_pix) {
  Density g = rotate_density(f, R);
  auto h = [&g](const Vec& x) { return xray_at(g, x); };
  return pixel_sample(h, f.k - 1, n_pix);
}

/// Default test density: three compactly supported smooth bumps with distinct
/// centers and radii, asymmetric so the rotation orbit is non-degenerate.
/// Normalized (by seeded Monte-Carlo estimates) so both the L^2 norm and the
/// homogeneous Sobolev seminorm are <= 1.
inline Density default_density(int k = 3, std::uint64_t norm_seed = 71) {
  struct Bump {
    Vec center;
    double radius;
    double amp;
  };
  std::vector<Bump> bumps;
  {
    Vec c1 = Vec::Zero(k), c2 = Vec::Zero(k), c3 = Vec::Zero(k);
    c1[0] = 0.22;
    c2[0] = -0.15;
    c2[1] = 0.18;
    c3[1] = -0.2;
    if (k > 2) c3[2] = 0.12;
    bumps.push_back({c1, 0.16, 1.0});
    bumps.push_back({c2, 0.12, 0.8});
    bumps.push_back({c3, 0.2, 0.6});
  }
  auto eval = [bumps](const Vec& q) {
    double v = 0.0;
    for (const auto& b : bumps) {
      double s2 = (q - b.center).squaredNorm() / (b.radius * b.radius);
      if (s2 < 1.0) v += b.amp * std::exp(-1.0 / (1.0 - s2));
    }
    return v;
  };

  // Monte-Carlo norms over B(0, 1/2)
  Rng rng(norm_seed);
  const long trials = 200000;
  const double vol = unit_ball_volume(k) * std::pow(0.5, k);
  double sum_f2 = 0.0, sum_g2 = 0.0;
  const double step = 1e-5;
  Vec q(k), qp(k);
  for (long t = 0; t < trials; ++t) {
    do {
      for (int i = 0; i < k; ++i) q[i] = rng.uniform(-0.5, 0.5);
    } while (q.norm() > 0.5);
    double f0 = eval(q);
    sum_f2 += f0 * f0;
    double g2 = 0.0;
    for (int i = 0; i < k; ++i) {
      qp = q;
      qp[i] += step;
      double d = (eval(qp) - f0) / step;
      g2 += d * d;
    }
    sum_g2 += g2;
  }
  double l2 = std::sqrt(vol * sum_f2 / trials);
  double sob = std::sqrt(vol * sum_g2 / trials);
  double scale = 1.0 / std::max({1.0, l2, sob});

  Density f;
  f.k = k;
  f.evaluator = [eval, scale](const Vec& q) { return scale * eval(q); };
  f.l2_norm_est = l2 * scale;
  f.sobolev_seminorm_est = sob * scale;
  return f;
}

/// Discretized X-ray operator norm: with chord-quadrature coordinates the
/// operator acts row-wise, so its norm is max over disk grid points of
/// sqrt(sum of chord weights) = sqrt(chord length) <= sqrt(2). Estimated by
/// power iteration on the explicit row structure.
inline double xray_operator_norm_estimate(int grid_n, std::uint64_t seed) {
  const auto& q = gl64();
  Rng rng(seed);
  // collect rows: each disk cell center with |x| < 1 contributes weights
  // sqrt(half * w_m) in its private coordinate block
  std::vector<double> row_norms;
  double w = 2.0 / grid_n;
  Vec x(2);
  for (int i = 0; i < grid_n; ++i)
    for (int j = 0; j < grid_n; ++j) {
      x[0] = -1.0 + w * (i + 0.5);
      x[1] = -1.0 + w * (j + 0.5);
      double r2 = x.squaredNorm();
      if (r2 >= 1.0) continue;
      double half = std::sqrt(1.0 - r2);
      double s = 0.0;
      for (double wt : q.weights) s += half * wt;
      row_norms.push_back(std::sqrt(s));
    }
  // power iteration on A^T A where A = diag of rows; equivalent to a
  // weighted max, but run the iteration anyway as the estimator under test
  Vec v(static_cast<long>(row_norms.size()));
  for (long i = 0; i < v.size(); ++i) v[i] = rng.normal();
  v /= v.norm();
  double est = 0.0;
  for (int it = 0; it < 200; ++it) {
    for (long i = 0; i < v.size(); ++i) v[i] *= row_norms[i] * row_norms[i];
    double n = v.norm();
    if (n == 0.0) break;
    v /= n;
    est = n;
  }
  return std::sqrt(est);
}

/// Greedy covering of SO(k) in the Hilbert-Schmidt metric from Haar samples.
/// Stops once `stall` consecutive samples land inside existing balls.
inline long so_k_covering_estimate(int k, double eps, std::uint64_t seed = 2024,
                                   long max_samples = 200000, long stall = 3000) {
  if (k < 2 || k > 3) throw std::invalid_argument("so_k_covering_estimate: k must be 2 or 3");
  if (!(eps > 0.0 && eps <= 4.0))
    throw std::invalid_argument("so_k_covering_estimate: eps out of range");
  std::vector<Mat> centers;
  long since_add = 0;
  for (long t = 0; t < max_samples; ++t) {
    Rotation r = haar_rotation(k, derive_seed(seed, std::to_string(t)));
    bool covered = false;
    for (const Mat& c : centers)
      if ((r.matrix - c).norm() <= eps) {
        covered = true;
        break;
      }
    if (covered) {
      if (++since_add >= stall) return static_cast<long>(centers.size());
    } else {
      centers.push_back(r.matrix);
      since_add = 0;
    }
  }
  throw ResourceCapError("so_k_covering_estimate: sample budget exhausted");
}

}  // namespace cvd
