#pragma once

#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "cvd/bounds.hpp"
#include "cvd/datagen.hpp"
#include "cvd/hull.hpp"
#include "cvd/oracle.hpp"
#include "cvd/pca.hpp"

namespace cvd {

/// s(omega) = max_{x in K} <x, omega>, exact or statistical.
using SupportFn = std::function<double(const Vec&)>;

inline SupportFn exact_support(PointCloud vertices) {
  return [v = std::move(vertices)](const Vec& omega) { return support_function(v, omega); };
}

inline SupportFn statistical_support(PointCloud oracle_block, OracleParams params) {
  return [p = std::move(oracle_block), params](const Vec& omega) {
    return estimate_support(omega, p, params);
  };
}

/// f(omega) = -<y, omega> - s(-omega); its max over the sphere is dist(y, K)
/// (negative when y is inside the hull).
inline double f_omega(const Vec& y, const Vec& omega, const SupportFn& support) {
  return -y.dot(omega) - support(-omega);
}

/// |omega* - omega_hat| <= sqrt(2 delta / d*).
inline double direction_error_bound(double delta, double d_star) {
  if (!(d_star > 0.0)) throw std::invalid_argument("direction_error_bound: d* must be > 0");
  if (delta < 0.0) throw std::invalid_argument("direction_error_bound: delta must be >= 0");
  return std::sqrt(2.0 * delta / d_star);
}

namespace detail {

inline void parallel_for(long n, int threads, const std::function<void(long, long)>& body) {
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  int t = std::min<long>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(t);
  for (int i = 0; i < t; ++i) {
    long lo = n * i / t, hi = n * (i + 1) / t;
    pool.emplace_back([&body, lo, hi] { body(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Per-net-direction support values s(-omega_i), shared across all targets
/// searched against the same hull. Directions whose statistical estimate
/// saturates are marked and skipped; more than `fail_tol` of them aborts.
struct SupportTable {
  std::vector<double> s_neg;
  std::vector<char> failed;
  long n_failed = 0;

  SupportTable() = default;
  SupportTable(const SphereNet& net, const SupportFn& support, int threads = 1,
               double fail_tol = 0.01) {
    const long m = net.size();
    s_neg.assign(m, 0.0);
    failed.assign(m, 0);
    detail::parallel_for(m, threads, [&](long lo, long hi) {
      for (long i = lo; i < hi; ++i) {
        try {
          s_neg[i] = support(-net.direction(i));
        } catch (const StageError&) {
          failed[i] = 1;
        }
      }
    });
    for (long i = 0; i < m; ++i) n_failed += failed[i];
    if (static_cast<double>(n_failed) > fail_tol * static_cast<double>(m))
      throw StageError("net search: " + std::to_string(n_failed) + " of " +
                       std::to_string(m) + " directions failed the support estimate");
  }
};

struct ProjectionResult {
  Vec x_hat;
  Vec v0;
  double lambda0 = 0.0;
  long net_index = -1;
  bool inside_hull = false;  // every f value non-positive; x_hat == y
};

/// Exhaustive maximization of f over the net. Ties break to the lowest net
/// index so parallel and sequential runs agree.
inline ProjectionResult proj_K(const Vec& y, const SphereNet& net, const SupportTable& table) {
  if (y.size() != net.dimension)
    throw std::invalid_argument("proj_K: dimension mismatch with net");
  if (net.size() == 0) throw StageError("proj_K: empty net");

  long best = -1;
  double best_f = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < net.size(); ++i) {
    if (table.failed[i]) continue;
    double f = -y.dot(net.direction(i)) - table.s_neg[i];
    if (f > best_f) {
      best_f = f;
      best = i;
    }
  }
  if (best < 0) throw StageError("proj_K: no usable net direction");

  ProjectionResult r;
  r.net_index = best;
  r.v0 = net.direction(best);
  r.lambda0 = std::max(0.0, best_f);
  r.inside_hull = (best_f <= 0.0);
  r.x_hat = y + r.lambda0 * r.v0;
  return r;
}

inline ProjectionResult proj_K(const Vec& y, const SphereNet& net, const SupportFn& support) {
  return proj_K(y, net, SupportTable(net, support));
}

struct DenoiseConfig {
  double eps0 = 0.1;    // manifold covering scale for the dimension choice
  double eps = 0.1;     // target projection accuracy
  double alpha = 0.05;
  double eta = 0.1;
  double delta = 0.0;   // 0: derive from eps
  int d = 1;
  double c_M = 0.1;
  double mesh = 0.0;    // 0: derive from delta
  double C_R = 2.0;       // truncation-radius constant
  double C_prop = 1.0;    // bias-bound constant
  double C_dudley = 1.0;  // J constant
  double gamma = 3.0;     // deviation level in the risk term
  bool exact_provider = false;
  int threads = 1;
  long net_cap = 10'000'000;
};

struct DenoiseReport {
  DenoiseConfig config;
  int reduced_dim = 0;
  double delta_used = 0.0;
  double mesh_used = 0.0;
  long net_size = 0;
  double pca_residual = 0.0;
  ErrorBudget budget;
  double mean_err_xhat = 0.0;   // vs clean, when available
  double mean_err_noisy = 0.0;
  double reduction_ratio = 0.0;
  long n_inside_hull = 0;
  Mat x_hat;      // one denoised point per row, ambient coordinates
  Vec lambda0;
  Mat v0;         // chosen directions in reduced coordinates
  Vec err_vs_clean;
};

/// Full pipeline: subspace fit on block 1, oracle batch = block 2, targets =
/// block 3, exhaustive net search per target, lift back to ambient space.
inline DenoiseReport denoise(const Dataset& ds, const DenoiseConfig& cfg) {
  const int n = ds.noisy.dim();
  DenoiseReport rep;
  rep.config = cfg;

  int D = choose_reduced_dim(n, cfg.d, cfg.c_M, cfg.eps0);
  rep.reduced_dim = D;

  SubspaceFit fit = fit_subspace(block(ds.noisy, 0, ds.n0), D);
  rep.pca_residual = fit.residual;

  double delta = cfg.delta;
  if (delta <= 0.0) {
    // strict inequality against eps^2 / (16 sigma sqrt(D))
    double sigma = std::max(ds.sigma, 1e-6);
    delta = 0.5 * cfg.eps * cfg.eps / (16.0 * sigma * std::sqrt(static_cast<double>(D)));
  }
  rep.delta_used = delta;
  double mesh = cfg.mesh > 0.0 ? cfg.mesh : std::min(2.0, delta);
  rep.mesh_used = mesh;

  SphereNet net = build_sphere_net(D, mesh, cfg.net_cap);
  rep.net_size = net.size();

  PointCloud oracle_block = project(fit, block(ds.noisy, ds.n0, ds.n1));
  PointCloud targets = project(fit, block(ds.noisy, ds.n1, ds.n));

  SupportFn support;
  if (cfg.exact_provider) {
    // validation mode: support of the latent hull from the clean samples
    support = exact_support(project(fit, ds.clean));
  } else {
    OracleParams params = derive_params(std::max(ds.sigma, 1e-6), delta, cfg.d, cfg.c_M);
    support = statistical_support(oracle_block, params);
  }
  SupportTable table(net, support, cfg.threads);

  const long m = targets.size();
  rep.x_hat.resize(m, n);
  rep.lambda0.resize(m);
  rep.v0.resize(m, D);
  rep.err_vs_clean = Vec::Zero(m);

  std::vector<char> inside(m, 0);
  detail::parallel_for(m, cfg.threads, [&](long lo, long hi) {
    for (long i = lo; i < hi; ++i) {
      ProjectionResult pr = proj_K(targets.point(i), net, table);
      rep.x_hat.row(i) = lift(fit, pr.x_hat).transpose();
      rep.lambda0[i] = pr.lambda0;
      rep.v0.row(i) = pr.v0.transpose();
      inside[i] = pr.inside_hull ? 1 : 0;
    }
  });
  for (char c : inside) rep.n_inside_hull += c;

  if (ds.clean.size() == ds.noisy.size()) {
    double sum_hat = 0.0, sum_noisy = 0.0;
    for (long i = 0; i < m; ++i) {
      Vec clean = ds.clean.point(ds.n1 + i);
      double e = (rep.x_hat.row(i).transpose() - clean).norm();
      rep.err_vs_clean[i] = e;
      sum_hat += e;
      sum_noisy += (ds.noisy.point(ds.n1 + i) - clean).norm();
    }
    rep.mean_err_xhat = sum_hat / static_cast<double>(m);
    rep.mean_err_noisy = sum_noisy / static_cast<double>(m);
    rep.reduction_ratio = rep.mean_err_noisy > 0.0 ? rep.mean_err_xhat / rep.mean_err_noisy : 0.0;
  }

  double R = truncation_radius(ds.sigma, n, ds.n0, cfg.alpha, cfg.C_R);
  double ee = eps_emp(R, D, ds.n0, cfg.alpha);
  double bias = pca_bias_bound(cfg.d, cfg.eps0, ee, cfg.C_prop);
  double risk = 0.0;
  if (ds.sigma > 0.0) {
    double J = dudley_J(D, cfg.d, std::min(ds.sigma, 1.0), cfg.c_M, cfg.C_dudley);
    risk = chatterjee_tail(cfg.gamma, J, ds.sigma).threshold;
  }
  rep.budget = main_theorem_budget(bias, risk, cfg.eps);
  return rep;
}

}  // namespace cvd
