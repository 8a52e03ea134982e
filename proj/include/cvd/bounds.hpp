#pragma once

#include <functional>
#include <vector>

#include "cvd/common.hpp"

namespace cvd {

/// log N_C(eps, K) <= ceil(8/eps^2) * log N_M(eps/2), returned in log space.
inline double hull_covering_exponent_bound(double eps, double N_M) {
  if (!(eps > 0.0 && eps <= 2.0))
    throw std::invalid_argument("hull_covering_exponent_bound: eps must be in (0,2]");
  if (!(N_M >= 1.0))
    throw std::invalid_argument("hull_covering_exponent_bound: N_M must be >= 1");
  return std::ceil(8.0 / (eps * eps)) * std::log(N_M);
}

/// Reach-based manifold covering bound V/(omega_d eps^d), saturated at eps = tau/4.
inline double manifold_covering_bound(double eps, double tau, double V, int d) {
  if (!(tau > 0.0 && V > 0.0 && eps > 0.0))
    throw std::invalid_argument("manifold_covering_bound: invalid inputs");
  double e = std::min(eps, tau / 4.0);
  return V / (unit_ball_volume(d) * std::pow(e, d));
}

/// J = C (1/sqrt(D) + sqrt(log((2D)^d / (c_M sigma^d omega_d))) *
///        [4 sigma^{-1} log(2D/sigma) + C sigma^{-1}])
inline double dudley_J(int D, int d, double sigma, double c_M, double C = 1.0) {
  if (D < 1 || !(sigma > 0.0 && sigma <= 1.0) || !(c_M > 0.0))
    throw std::invalid_argument("dudley_J: invalid inputs");
  double log_arg = std::pow(2.0 * D, d) / (c_M * std::pow(sigma, d) * unit_ball_volume(d));
  if (!(log_arg > 1.0)) throw ConfigError("dudley_J: incompatible parameters, log argument <= 1");
  return C * (1.0 / std::sqrt(static_cast<double>(D)) +
              std::sqrt(std::log(log_arg)) *
                  (4.0 / sigma * std::log(2.0 * D / sigma) + C / sigma));
}

/// eta + 12 * int_{eta/4}^{diam} sqrt(log N(eps)) d eps, trapezoid on a
/// 1024-point log-spaced grid. `log_entropy` returns log N(eps).
inline double truncated_dudley(const std::function<double(double)>& log_entropy,
                               double eta, double diam, int grid = 1024) {
  if (!(eta > 0.0 && diam > 0.0))
    throw std::invalid_argument("truncated_dudley: eta and diam must be > 0");
  double lo = eta / 4.0;
  if (lo >= diam) return eta;
  double la = std::log(lo), lb = std::log(diam);
  double integral = 0.0;
  double prev_x = lo, prev_f = std::sqrt(std::max(0.0, log_entropy(lo)));
  for (int i = 1; i < grid; ++i) {
    double x = std::exp(la + (lb - la) * static_cast<double>(i) / (grid - 1));
    double f = std::sqrt(std::max(0.0, log_entropy(x)));
    integral += 0.5 * (f + prev_f) * (x - prev_x);
    prev_x = x;
    prev_f = f;
  }
  return eta + 12.0 * integral;
}

struct ChatterjeeTail {
  double threshold = 0.0;   // sigma sqrt(J) + sigma gamma J^{1/4}
  double prob_bound = 0.0;  // 3 exp(-gamma^4 / (32 (1 + gamma/J^{1/4})^2))
};

inline ChatterjeeTail chatterjee_tail(double gamma, double J, double sigma = 1.0) {
  if (!(gamma >= 0.0 && J > 0.0))
    throw std::invalid_argument("chatterjee_tail: need gamma >= 0, J > 0");
  ChatterjeeTail t;
  double j4 = std::pow(J, 0.25);
  t.threshold = sigma * std::sqrt(J) + sigma * gamma * j4;
  double denom = 32.0 * (1.0 + gamma / j4) * (1.0 + gamma / j4);
  t.prob_bound = 3.0 * std::exp(-std::pow(gamma, 4) / denom);
  return t;
}

struct ErrorBudget {
  double pca_bias = 0.0;
  double statistical_risk = 0.0;
  double algorithmic = 0.0;
  double total = 0.0;
};

inline ErrorBudget main_theorem_budget(double pca_bias, double risk, double algo_eps) {
  if (pca_bias < 0.0 || risk < 0.0 || algo_eps < 0.0)
    throw std::invalid_argument("main_theorem_budget: terms must be >= 0");
  ErrorBudget b;
  b.pca_bias = pca_bias;
  b.statistical_risk = risk;
  b.algorithmic = algo_eps;
  b.total = pca_bias + risk + algo_eps;
  return b;
}

/// Predicted E|Xhat - X| / E|Y - X| up to constants: (sqrt(J) + gamma J^{1/4}) / sqrt(n).
inline double noise_reduction_ratio(int n, double J, double gamma) {
  if (n < 1 || !(J > 0.0) || gamma < 0.0)
    throw std::invalid_argument("noise_reduction_ratio: invalid inputs");
  return (std::sqrt(J) + gamma * std::pow(J, 0.25)) / std::sqrt(static_cast<double>(n));
}

}  // namespace cvd
