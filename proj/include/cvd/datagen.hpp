#pragma once

#include <array>
#include <string>
#include <vector>

#include "cvd/geometry.hpp"
#include "cvd/rng.hpp"

namespace cvd {

struct Dataset {
  PointCloud clean;
  PointCloud noisy;
  double sigma = 0.0;
  long n0 = 0, n1 = 0, n = 0;  // block boundaries: [0,n0) | [n0,n1) | [n1,n)
  std::uint64_t seed = 0;
  std::string manifold;
};

inline Vec ellipse_point(double t) {
  Vec p(2);
  p[0] = std::cos(t);
  p[1] = 0.5 * std::sin(t);
  return p;
}

namespace detail {

/// Cumulative arc length of the ellipse x^2 + 4y^2 = 1 tabulated on a
/// uniform parameter grid; inverted by binary search + linear interpolation
/// so samples are uniform in arc length, not in parameter.
struct EllipseArcTable {
  static constexpr int kKnots = 4096;
  std::array<double, kKnots + 1> cum{};
  double total = 0.0;

  EllipseArcTable() {
    cum[0] = 0.0;
    double prev_t = 0.0;
    for (int i = 1; i <= kKnots; ++i) {
      double t = 2.0 * M_PI * static_cast<double>(i) / kKnots;
      // midpoint speed: sqrt(sin^2 + cos^2/4)
      double tm = 0.5 * (prev_t + t);
      double speed = std::sqrt(std::sin(tm) * std::sin(tm) +
                               0.25 * std::cos(tm) * std::cos(tm));
      cum[i] = cum[i - 1] + speed * (t - prev_t);
      prev_t = t;
    }
    total = cum[kKnots];
  }

  double param_at_length(double s) const {
    int lo = 0, hi = kKnots;
    while (lo + 1 < hi) {
      int mid = (lo + hi) / 2;
      if (cum[mid] <= s)
        lo = mid;
      else
        hi = mid;
    }
    double seg = cum[hi] - cum[lo];
    double frac = seg > 0.0 ? (s - cum[lo]) / seg : 0.0;
    return 2.0 * M_PI * (static_cast<double>(lo) + frac) / kKnots;
  }
};

inline const EllipseArcTable& ellipse_arcs() {
  static const EllipseArcTable table;
  return table;
}

}  // namespace detail

/// Arc-length-uniform samples of {x^2 + 4y^2 = 1}.
inline PointCloud sample_ellipse(long count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_ellipse: count must be >= 1");
  const auto& table = detail::ellipse_arcs();
  Rng rng(seed);
  Mat pts(count, 2);
  for (long i = 0; i < count; ++i) {
    double t = table.param_at_length(rng.uniform() * table.total);
    pts.row(i) = ellipse_point(t).transpose();
  }
  return PointCloud(std::move(pts));
}

/// Deterministic arc-length-uniform grid on the ellipse (no randomness);
/// used as the dense vertex set for the exact hull oracle.
inline PointCloud ellipse_grid(long count) {
  if (count < 1) throw std::invalid_argument("ellipse_grid: count must be >= 1");
  const auto& table = detail::ellipse_arcs();
  Mat pts(count, 2);
  for (long i = 0; i < count; ++i) {
    double s = table.total * static_cast<double>(i) / static_cast<double>(count);
    pts.row(i) = ellipse_point(table.param_at_length(s)).transpose();
  }
  return PointCloud(std::move(pts));
}

inline Vec hypocycloid_point(double a, int n_cusps, double t) {
  double b = a / static_cast<double>(n_cusps);
  double k = (a - b) / b;
  Vec p(2);
  p[0] = (a - b) * std::cos(t) + b * std::cos(k * t);
  p[1] = (a - b) * std::sin(t) - b * std::sin(k * t);
  return p;
}

inline PointCloud sample_hypocycloid(double a, int n_cusps, long count, std::uint64_t seed) {
  if (!(a > 0.0)) throw std::invalid_argument("sample_hypocycloid: a must be > 0");
  if (n_cusps < 3) throw std::invalid_argument("sample_hypocycloid: n_cusps must be >= 3");
  if (count < 1) throw std::invalid_argument("sample_hypocycloid: count must be >= 1");
  Rng rng(seed);
  Mat pts(count, 2);
  for (long i = 0; i < count; ++i)
    pts.row(i) = hypocycloid_point(a, n_cusps, rng.uniform(0.0, 2.0 * M_PI)).transpose();
  return PointCloud(std::move(pts));
}

/// The cusps of the a, n-cusp hypocycloid: a regular n-gon of circumradius a.
inline PointCloud hypocycloid_cusps(double a, int n_cusps) {
  Mat pts(n_cusps, 2);
  for (int j = 0; j < n_cusps; ++j)
    pts.row(j) = hypocycloid_point(a, n_cusps, 2.0 * M_PI * j / n_cusps).transpose();
  return PointCloud(std::move(pts));
}

inline PointCloud add_gaussian_noise(const PointCloud& P, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return P;
  Rng rng(seed);
  Mat out = P.pts;
  for (long i = 0; i < out.rows(); ++i)
    for (long j = 0; j < out.cols(); ++j) out(i, j) += sigma * rng.normal();
  return PointCloud(std::move(out));
}

/// Embed a 2-D cloud in the first two coordinates of R^n.
inline PointCloud embed(const PointCloud& P, int ambient) {
  if (ambient < P.dim()) throw std::invalid_argument("embed: ambient dim too small");
  Mat out = Mat::Zero(P.size(), ambient);
  out.leftCols(P.dim()) = P.pts;
  return PointCloud(std::move(out));
}

struct ManifoldSpec {
  std::string kind = "ellipse";  // ellipse | hypocycloid
  double a = 1.0;
  int n_cusps = 5;
  int ambient = 2;  // embed into R^ambient (first 2 coordinates)
};

inline Dataset make_dataset(const ManifoldSpec& spec, long n0, long n1, long n,
                            double sigma, std::uint64_t seed) {
  if (!(0 < n0 && n0 < n1 && n1 < n))
    throw ConfigError("make_dataset: need 0 < N0 < N1 < N");
  std::uint64_t clean_seed = derive_seed(seed, "clean");
  std::uint64_t noise_seed = derive_seed(seed, "noise");

  PointCloud clean;
  if (spec.kind == "ellipse")
    clean = sample_ellipse(n, clean_seed);
  else if (spec.kind == "hypocycloid")
    clean = sample_hypocycloid(spec.a, spec.n_cusps, n, clean_seed);
  else
    throw ConfigError("make_dataset: unknown manifold '" + spec.kind + "'");
  if (spec.ambient > clean.dim()) clean = embed(clean, spec.ambient);

  Dataset ds;
  ds.clean = clean;
  ds.noisy = add_gaussian_noise(clean, sigma, noise_seed);
  ds.sigma = sigma;
  ds.n0 = n0;
  ds.n1 = n1;
  ds.n = n;
  ds.seed = seed;
  ds.manifold = spec.kind;
  return ds;
}

inline PointCloud block(const PointCloud& P, long lo, long hi) {
  if (lo < 0 || hi > P.size() || lo > hi)
    throw std::invalid_argument("block: index range out of bounds");
  return PointCloud(P.pts.middleRows(lo, hi - lo));
}

}  // namespace cvd
