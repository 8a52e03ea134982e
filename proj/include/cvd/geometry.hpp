#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "cvd/common.hpp"

namespace cvd {

/// A finite list of points sharing one ambient dimension. Rows are points.
struct PointCloud {
  Mat pts;  // size() x dim()

  PointCloud() = default;
  explicit PointCloud(Mat m) : pts(std::move(m)) {}

  int dim() const { return static_cast<int>(pts.cols()); }
  long size() const { return pts.rows(); }
  bool empty() const { return pts.rows() == 0; }
  Vec point(long i) const { return pts.row(i).transpose(); }
};

/// {x : <x, normal> = offset} with a unit normal.
struct Hyperplane {
  Vec normal;
  double offset;

  Hyperplane(Vec n, double t) : normal(std::move(n)), offset(t) {
    if (normal.size() < 1) throw std::invalid_argument("Hyperplane: dimension must be >= 1");
    if (!approx_unit(normal.norm()))
      throw std::invalid_argument("Hyperplane: normal must be unit length");
  }

  int dim() const { return static_cast<int>(normal.size()); }
};

/// Deterministic mesh-net of the unit sphere S^{D-1}, directions in a fixed
/// reproducible order (lexicographic in the generating grid index).
struct SphereNet {
  int dimension = 0;
  double mesh = 0.0;
  Mat directions;  // one unit vector per row

  long size() const { return directions.rows(); }
  Vec direction(long i) const { return directions.row(i).transpose(); }
};

/// Signed offset of y against the halfspace form of H: <y, normal> - offset.
/// Negative on the manifold side when the manifold satisfies <x, b> <= t.
inline double signed_offset(const Vec& y, const Hyperplane& h) {
  if (y.size() != h.normal.size())
    throw std::invalid_argument("signed_offset: dimension mismatch");
  return y.dot(h.normal) - h.offset;
}

/// Fraction of points strictly beyond level gamma in direction b:
/// |{p : <p,b> > gamma}| / |P|. Ties are excluded (strict inequality).
inline double halfspace_tail_count(const PointCloud& cloud, const Vec& b, double gamma) {
  if (cloud.empty()) throw StageError("no oracle samples");
  if (b.size() != cloud.dim())
    throw std::invalid_argument("halfspace_tail_count: dimension mismatch");
  if (!approx_unit(b.norm(), 1e-9))
    throw std::invalid_argument("halfspace_tail_count: direction must be unit length");
  long count = 0;
  for (long i = 0; i < cloud.size(); ++i) {
    if (cloud.pts.row(i).dot(b) > gamma) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(cloud.size());
}

/// Cube-grid sphere net: the cube [-1,1]^D is split into cells of pitch
/// mesh/sqrt(D); cells whose closed box intersects the unit sphere shell
/// contribute their normalized center. Every unit vector is then within
/// `mesh` of some direction. Deterministic and deduplicated.
inline SphereNet build_sphere_net(int dimension, double mesh,
                                  long hard_cap = 10'000'000) {
  if (dimension < 1) throw std::invalid_argument("build_sphere_net: D must be >= 1");
  if (!(mesh > 0.0) || !std::isfinite(mesh) || mesh > 2.0)
    throw std::invalid_argument("build_sphere_net: mesh must be finite in (0, 2]");

  const double pitch = mesh / std::sqrt(static_cast<double>(dimension));
  const long per_axis = std::max<long>(2, static_cast<long>(std::ceil(2.0 / pitch)));

  double projected = std::pow(static_cast<double>(per_axis), dimension);
  if (projected > static_cast<double>(hard_cap))
    throw ResourceCapError("net too large: increase mesh or raise the cap");

  const double cell = 2.0 / static_cast<double>(per_axis);

  SphereNet net;
  net.dimension = dimension;
  net.mesh = mesh;

  std::vector<Vec> dirs;
  std::set<std::vector<double>> seen;
  std::vector<long> idx(dimension, 0);
  Vec lo(dimension), hi(dimension), center(dimension);

  bool done = false;
  while (!done) {
    double min_sq = 0.0, max_sq = 0.0;
    for (int a = 0; a < dimension; ++a) {
      lo[a] = -1.0 + cell * static_cast<double>(idx[a]);
      hi[a] = lo[a] + cell;
      center[a] = 0.5 * (lo[a] + hi[a]);
      double m = (lo[a] <= 0.0 && hi[a] >= 0.0) ? 0.0 : std::min(std::abs(lo[a]), std::abs(hi[a]));
      min_sq += m * m;
      max_sq += std::max(lo[a] * lo[a], hi[a] * hi[a]);
    }
    if (min_sq <= 1.0 && max_sq >= 1.0 && center.norm() > 1e-12) {
      Vec d = center / center.norm();
      std::vector<double> key(d.data(), d.data() + d.size());
      if (seen.insert(key).second) dirs.push_back(d);
    }
    // lexicographic advance, last axis fastest
    int a = dimension - 1;
    while (a >= 0) {
      if (++idx[a] < per_axis) break;
      idx[a] = 0;
      --a;
    }
    done = (a < 0);
  }

  net.directions.resize(static_cast<long>(dirs.size()), dimension);
  for (size_t i = 0; i < dirs.size(); ++i) net.directions.row(static_cast<long>(i)) = dirs[i];
  return net;
}

}  // namespace cvd
