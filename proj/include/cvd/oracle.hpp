#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "cvd/geometry.hpp"

namespace cvd {

/// Thresholds of the empirical tail-density scan.
struct OracleParams {
  double sigma = 0.0;
  double delta = 0.0;
  int d = 1;
  double c_M = 0.0;
  // derived
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double r_delta = 0.0;
  double Gamma_delta = 0.0;
};

inline OracleParams derive_params(double sigma, double delta, int d, double c_M) {
  if (!(sigma > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("derive_params: sigma and delta must be > 0");
  if (!(c_M > 0.0 && c_M < std::exp(-1.0)))
    throw std::invalid_argument("derive_params: c_M must be in (0, 1/e)");
  double omega = unit_ball_volume(d);
  double ratio = (1.0 / c_M) / (std::pow(delta, d) * omega);  // kappa1 / kappa0
  if (ratio < 1.0) throw ConfigError("delta too large for mass constant");

  OracleParams p;
  p.sigma = sigma;
  p.delta = delta;
  p.d = d;
  p.c_M = c_M;
  p.kappa0 = std::sqrt(2.0 * M_PI) * sigma;
  p.kappa1 = ratio * p.kappa0;
  p.r_delta = (sigma * sigma / delta) * std::log(ratio);
  p.Gamma_delta = (1.0 / p.kappa1) * std::exp(-p.r_delta * p.r_delta / (2.0 * sigma * sigma));
  return p;
}

struct DistResult {
  double distance = 0.0;       // clamped at 0
  double raw = 0.0;            // t - (j*delta - r_delta) before the clamp
  long j_final = 0;
  double gamma_est = 0.0;      // accepted density estimate at j_final
  bool intersects_hull = false;
};

namespace detail {

/// Sorted projections of the oracle block onto b; tail fractions become
/// binary searches.
struct ScanState {
  std::vector<double> dots;  // ascending
  double max_dot, min_dot;

  ScanState(const PointCloud& P, const Vec& b) {
    if (P.empty()) throw StageError("no oracle samples");
    if (b.size() != P.dim())
      throw std::invalid_argument("oracle scan: dimension mismatch");
    dots.resize(static_cast<size_t>(P.size()));
    for (long i = 0; i < P.size(); ++i) dots[static_cast<size_t>(i)] = P.pts.row(i).dot(b);
    std::sort(dots.begin(), dots.end());
    max_dot = dots.back();
    min_dot = dots.front();
  }

  // |{x : <x,b> > gamma}| / |P|, strict
  double tail(double gamma) const {
    auto it = std::upper_bound(dots.begin(), dots.end(), gamma);
    return static_cast<double>(dots.end() - it) / static_cast<double>(dots.size());
  }
};

/// The scan shared by dist_to_hull and estimate_support: walk j down from the
/// top bin until the empirical density (F_{j delta} - F_{(j+1) delta})/delta
/// clears the threshold Gamma_delta.
inline std::pair<long, double> scan_for_j(const ScanState& st, const OracleParams& p) {
  long j = static_cast<long>(std::floor(st.max_dot / p.delta));
  for (;;) {
    if (static_cast<double>(j) * p.delta < st.min_dot)
      throw StageError("oracle saturated: hyperplane too close or too few samples");
    double g = (st.tail(static_cast<double>(j) * p.delta) -
                st.tail(static_cast<double>(j + 1) * p.delta)) /
               p.delta;
    if (g >= p.Gamma_delta) return {j, g};
    --j;
  }
}

}  // namespace detail

/// Tail-scan distance from the hyperplane {<x,b> = t} to the latent hull,
/// estimated from the projected oracle block. The caller guarantees the
/// manifold lies on the <x,b> <= t side.
inline DistResult dist_to_hull(const Hyperplane& H, const PointCloud& P,
                               const OracleParams& params) {
  detail::ScanState st(P, H.normal);
  auto [j, g] = detail::scan_for_j(st, params);
  DistResult r;
  r.j_final = j;
  r.gamma_est = g;
  r.raw = H.offset - (static_cast<double>(j) * params.delta - params.r_delta);
  if (r.raw < 0.0) {
    r.distance = 0.0;
    r.intersects_hull = true;
  } else {
    r.distance = r.raw;
  }
  return r;
}

/// Estimated support value s(b) = max_{x in M} <x,b>: the same scan, read as
/// the level the manifold edge sits at. Independent of any offset t.
inline double estimate_support(const Vec& b, const PointCloud& P, const OracleParams& params) {
  detail::ScanState st(P, b);
  auto [j, g] = detail::scan_for_j(st, params);
  (void)g;
  return static_cast<double>(j) * params.delta - params.r_delta;
}

/// Worst-case sample budget ceil(A * exp(C_d (sigma/delta)^2 log(1/c_M)) * log(1/eta)).
inline long plan_samples(const OracleParams& params, double eta, double A = 1.0,
                         double C_d = 1.0, double cap = 1e12) {
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("plan_samples: eta must be in (0,1)");
  double ratio = params.sigma / params.delta;
  double v = A * std::exp(C_d * ratio * ratio * std::log(1.0 / params.c_M)) *
             std::log(1.0 / eta);
  if (!(v <= cap)) throw ResourceCapError("infeasible sample demand");
  return static_cast<long>(std::ceil(v));
}

/// Refined budget C * Gamma^{-1} log(1/eta) log(1/(Gamma kappa0)) when a
/// Gamma(H) estimate is available.
inline double plan_samples_refined(const OracleParams& params, double Gamma, double eta,
                                   double C = 1.0) {
  if (!(Gamma > 0.0)) throw std::invalid_argument("plan_samples_refined: Gamma must be > 0");
  if (!(eta > 0.0 && eta < 1.0))
    throw std::invalid_argument("plan_samples_refined: eta must be in (0,1)");
  if (!(Gamma * params.kappa0 < 1.0))
    throw std::invalid_argument("plan_samples_refined: Gamma kappa0 must be < 1");
  return C * (1.0 / Gamma) * std::log(1.0 / eta) * std::log(1.0 / (Gamma * params.kappa0));
}

struct GapResult {
  double gap = 0.0;
  double upper = 0.0;   // sqrt(2 sigma^2 log(1/(Gamma kappa0)))
  double lower = 0.0;   // -delta + sqrt(2 sigma^2 log(1/(Gamma kappa1)))
  bool condition = false;  // sigma log(k1/k0) <= delta sqrt(2 log(1/(Gamma kappa1)))
};

/// Width between the two distance envelopes at tail density Gamma.
inline GapResult gap_bound(double Gamma, const OracleParams& params) {
  if (!(Gamma > 0.0 && Gamma * params.kappa1 < 1.0))
    throw std::invalid_argument("gap_bound: need 0 < Gamma < 1/kappa1");
  double s2 = 2.0 * params.sigma * params.sigma;
  GapResult g;
  g.upper = std::sqrt(s2 * std::log(1.0 / (Gamma * params.kappa0)));
  g.lower = -params.delta + std::sqrt(s2 * std::log(1.0 / (Gamma * params.kappa1)));
  g.gap = g.upper - g.lower;
  g.condition = params.sigma * std::log(params.kappa1 / params.kappa0) <=
                params.delta * std::sqrt(2.0 * std::log(1.0 / (Gamma * params.kappa1)));
  return g;
}

}  // namespace cvd
