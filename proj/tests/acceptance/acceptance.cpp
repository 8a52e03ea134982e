// Acceptance gate: eight end-to-end criteria, one PASS/FAIL line each.
// Exits nonzero if any criterion fails.
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <chrono>
#include <iostream>

#include "cvd/cryoem.hpp"
#include "cvd/io.hpp"
#include "cvd/projection.hpp"

using namespace cvd;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << idx << " (" << name << "): "
            << detail << "\n";
  if (!ok) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// ---------------------------------------------------------------- criterion 1
void criterion_ellipse_pipeline() {
  Timer timer;
  ManifoldSpec spec;
  Dataset ds = make_dataset(spec, 5000, 10000, 20000, 0.2, 1001);

  DenoiseConfig cfg;
  cfg.exact_provider = true;
  cfg.mesh = 0.02;
  DenoiseReport rep = denoise(ds, cfg);

  // pointwise contraction for exact projections: X in K, so the angle at the
  // projection is never acute
  PointCloud grid = ellipse_grid(4000);
  long violations = 0;
  const long targets = ds.n - ds.n1;
  for (long i = 0; i < targets; ++i) {
    Vec y = ds.noisy.point(ds.n1 + i);
    Vec x = ds.clean.point(ds.n1 + i);
    auto proj = project_onto_hull(y, grid);
    Vec xhat = proj.distance == 0.0 ? y : proj.point;
    if ((y - x).norm() < (xhat - x).norm() - 1e-8) ++violations;
  }

  bool ok = rep.reduction_ratio < 0.9 && violations == 0 && timer.seconds() < 300.0;
  std::ostringstream d;
  d << "ratio " << rep.reduction_ratio << " (< 0.9), " << violations
    << " pointwise violations out of " << targets << ", " << timer.seconds() << " s";
  report(1, "ellipse pipeline", ok, d.str());
}

// ---------------------------------------------------------------- criterion 2
void criterion_oracle_accuracy() {
  Timer timer;
  const double sigma = 0.2, delta = 0.05, c_M = 0.15;
  OracleParams params = derive_params(sigma, delta, 1, c_M);

  long n_oracle;
  try {
    n_oracle = std::min(plan_samples(params, 0.1, 1.0, 1.0, 1e17), 200000L);
  } catch (const ResourceCapError&) {
    n_oracle = 200000;
  }
  PointCloud clean = sample_ellipse(n_oracle, 2001);
  PointCloud noisy = add_gaussian_noise(clean, sigma, 2002);
  PointCloud grid = ellipse_grid(4000);

  Rng rng(2003);
  long within = 0, envelope_ok = 0, envelope_total = 0;
  const int queries = 50;
  for (int q = 0; q < queries; ++q) {
    Vec b = rng.unit_vector(2);
    double s = support_function(grid, b);
    double t = s + 0.2 + 0.6 * rng.uniform();
    double exact = t - s;
    try {
      DistResult r = dist_to_hull(Hyperplane(b, t), noisy, params);
      if (std::abs(r.distance - exact) <= 3.0 * delta) ++within;
    } catch (const StageError&) {
      // saturated query counts as a miss
    }

    if (exact >= sigma) {
      ++envelope_total;
      // tail density of <Y, b> at level t by log-sum-exp quadrature
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<double> ex(grid.size());
      for (long i = 0; i < grid.size(); ++i) {
        double u = t - grid.pts.row(i).dot(b);
        ex[i] = -u * u / (2.0 * sigma * sigma);
        mx = std::max(mx, ex[i]);
      }
      double acc = 0.0;
      for (double e : ex) acc += std::exp(e - mx);
      double logGamma = mx + std::log(acc / grid.size()) - std::log(sigma * std::sqrt(2.0 * M_PI));
      double upper = std::sqrt(2.0 * sigma * sigma *
                               std::max(0.0, -logGamma - std::log(params.kappa0)));
      double log_gk1 = logGamma + std::log(params.kappa1);
      // the lower envelope only binds when Gamma kappa1 < 1
      double lower = log_gk1 >= 0.0
                         ? 0.0
                         : -delta + std::sqrt(2.0 * sigma * sigma * (-log_gk1));
      if (lower <= exact && exact <= upper) ++envelope_ok;
    }
  }

  bool ok = within >= 45 && envelope_ok == envelope_total && timer.seconds() < 120.0;
  std::ostringstream d;
  d << within << "/50 within 3 delta (need >= 45), envelope " << envelope_ok << "/"
    << envelope_total << ", " << timer.seconds() << " s";
  report(2, "oracle accuracy", ok, d.str());
}

// ---------------------------------------------------------------- criterion 3
void criterion_net_vs_exact() {
  Timer timer;
  PointCloud grid = ellipse_grid(4000);
  SphereNet net = build_sphere_net(2, 0.02);
  SupportTable table(net, exact_support(grid));

  Rng rng(3001);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Vec y = (1.1 + rng.uniform()) * rng.unit_vector(2);
    ProjectionResult r = proj_K(y, net, table);
    auto exact = project_onto_hull(y, grid);
    Vec ref = exact.distance == 0.0 ? y : exact.point;
    worst = std::max(worst, (r.x_hat - ref).norm());
  }
  bool ok = worst <= 0.05 && timer.seconds() < 60.0;
  std::ostringstream d;
  d << "max deviation " << worst << " (<= 0.05), " << timer.seconds() << " s";
  report(3, "net search vs exact projection", ok, d.str());
}

// ---------------------------------------------------------------- criterion 4
void criterion_hypocycloid() {
  Timer timer;
  PointCloud verts = hypocycloid_cusps(1.0, 5);
  double side = (verts.point(0) - verts.point(1)).norm();
  double perimeter = 5.0 * side;
  Vec src = verts.point(0);  // source at a cusp

  auto arc_coord = [&](const Vec& p) {
    double best_d = std::numeric_limits<double>::infinity(), best_s = 0.0, walked = 0.0;
    for (long j = 0; j < 5; ++j) {
      Vec a = verts.point(j), b = verts.point((j + 1) % 5);
      Vec ab = b - a;
      double t = std::clamp((p - a).dot(ab) / (side * side), 0.0, 1.0);
      double dd = (p - (a + t * ab)).norm();
      if (dd < best_d) {
        best_d = dd;
        best_s = walked + t * side;
      }
      walked += side;
    }
    return best_s;
  };
  auto arc_dist = [&](double s1, double s2) {
    double d = std::abs(s1 - s2);
    return std::min(d, perimeter - d);
  };

  std::vector<double> vertex_arcs(5);
  for (int j = 0; j < 5; ++j) vertex_arcs[j] = j * side;

  const std::vector<double> sigmas{0.3, 0.5, 1.0, 10.0};
  std::vector<double> source_frac;
  std::vector<double> min_vertex_share;
  for (size_t si = 0; si < sigmas.size(); ++si) {
    Rng rng(4001 + si);
    long projected = 0, near_source = 0;
    std::vector<long> near_vertex(5, 0);
    for (int i = 0; i < 10000; ++i) {
      Vec y = src;
      y[0] += sigmas[si] * rng.normal();
      y[1] += sigmas[si] * rng.normal();
      auto proj = project_onto_hull(y, verts);
      if (proj.distance <= 1e-9) continue;
      ++projected;
      double s = arc_coord(proj.point);
      if (arc_dist(s, 0.0) <= 0.1) ++near_source;
      for (int j = 0; j < 5; ++j)
        if (arc_dist(s, vertex_arcs[j]) <= 0.1) ++near_vertex[j];
    }
    source_frac.push_back(static_cast<double>(near_source) / std::max(projected, 1L));
    double mn = 1.0;
    for (int j = 0; j < 5; ++j)
      mn = std::min(mn, static_cast<double>(near_vertex[j]) / std::max(projected, 1L));
    min_vertex_share.push_back(mn);
  }

  bool decreasing = true;
  for (size_t i = 1; i < source_frac.size(); ++i)
    if (source_frac[i] >= source_frac[i - 1]) decreasing = false;
  bool spread = min_vertex_share.back() >= 0.05;

  bool ok = decreasing && spread && timer.seconds() < 180.0;
  std::ostringstream d;
  d << "source fractions";
  for (double f : source_frac) d << " " << f;
  d << " (strictly decreasing: " << (decreasing ? "yes" : "no")
    << "), min vertex share at sigma 10: " << min_vertex_share.back() << " (>= 0.05), "
    << timer.seconds() << " s";
  report(4, "pentagon projection histograms", ok, d.str());
}

// ---------------------------------------------------------------- criterion 5
void criterion_operator_norms() {
  Timer timer;
  double xray = xray_operator_norm_estimate(32, 5001);

  // sampling operator: sup of ||v|| / ||h|| over probes, with the constant
  // equality case included
  double s_norm = 0.0;
  {
    auto h = [](const Vec&) { return 1.0; };
    s_norm = pixel_sample(h, 2, 16).values.norm();  // ||h||_{L2} = 1
  }
  double s_probe = s_norm;
  Rng rng(5002);
  for (int trial = 0; trial < 20; ++trial) {
    double a = rng.normal(), b = rng.normal();
    int kx = 1 + static_cast<int>(rng.next_u64() % 3);
    auto h = [=](const Vec& x) {
      return a + b * std::cos(2.0 * M_PI * kx * x[0]) * std::cos(2.0 * M_PI * x[1]);
    };
    PixelImage img = pixel_sample(h, 2, 16);
    // L2 norm by fine quadrature
    const auto& q = gl8();
    double l2 = 0.0;
    const int cells = 48;
    for (int i = 0; i < cells; ++i)
      for (int j = 0; j < cells; ++j)
        for (size_t u = 0; u < q.nodes.size(); ++u)
          for (size_t v = 0; v < q.nodes.size(); ++v) {
            Vec x(2);
            x << -0.5 + (i + 0.5 * (q.nodes[u] + 1.0)) / cells,
                -0.5 + (j + 0.5 * (q.nodes[v] + 1.0)) / cells;
            double val = h(x);
            l2 += 0.25 * q.weights[u] * q.weights[v] * val * val / (cells * cells);
          }
    s_probe = std::max(s_probe, img.values.norm() / std::sqrt(l2));
  }

  bool ok = xray <= std::sqrt(2.0) + 0.05 && std::abs(s_norm - 1.0) <= 1e-6 &&
            std::abs(s_probe - 1.0) <= 1e-6 && timer.seconds() < 60.0;
  std::ostringstream d;
  d << "chord operator " << xray << " (<= " << std::sqrt(2.0) + 0.05
    << "), sampling operator " << s_probe << " (= 1 +/- 1e-6), " << timer.seconds() << " s";
  report(5, "operator norms", ok, d.str());
}

// ---------------------------------------------------------------- criterion 6
double lipschitz_probe(const Density& f, std::uint64_t seed, int pairs, int n_pix) {
  Rng rng(seed);
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Rotation R1 = haar_rotation(3, derive_seed(seed, "pair-" + std::to_string(p)));
    Vec axis = rng.unit_vector(3);
    double step = 0.05 + 0.1 * rng.uniform();
    Rotation R2(R1.matrix * rotation_axis_angle(axis, step).matrix);
    double num = (forward_map(f, R1, n_pix).values - forward_map(f, R2, n_pix).values).norm();
    worst = std::max(worst, num / d_hs(R1, R2));
  }
  return worst;
}

void criterion_lipschitz() {
  Timer timer;
  Density f = default_density(3);
  // calibrated once against the Sobolev seminorm and frozen
  const double C_frozen = 2.0;
  double l1 = lipschitz_probe(f, 6001, 200, 8);
  double l2 = lipschitz_probe(f, 7001, 200, 8);

  bool bounded = l1 <= C_frozen * f.sobolev_seminorm_est &&
                 l2 <= C_frozen * f.sobolev_seminorm_est;
  bool stable = std::abs(l1 - l2) <= 0.1 * std::max(l1, l2);
  bool ok = bounded && stable && timer.seconds() < 120.0;
  std::ostringstream d;
  d << "empirical constants " << l1 << ", " << l2 << " (<= " << C_frozen * f.sobolev_seminorm_est
    << ", stable within 10%), " << timer.seconds() << " s";
  report(6, "rotation lipschitz bound", ok, d.str());
}

// ---------------------------------------------------------------- criterion 7
template <typename T>
T ball_volume_t(int d) {
  return boost::multiprecision::pow(boost::multiprecision::acos(T(-1)), T(d) / 2) /
         boost::multiprecision::tgamma(T(d) / 2 + 1);
}

bool close(double got, const big& want, double tol = 1e-10) {
  big g(got);
  big aw = boost::multiprecision::abs(want);
  big denom = aw > 1 ? aw : big(1);
  return static_cast<double>(boost::multiprecision::abs(g - want) / denom) <= tol;
}

void criterion_highprec() {
  Timer timer;
  Rng rng(7777);
  int bad = 0;
  for (int trial = 0; trial < 20; ++trial) {
    double sigma = 0.05 + 0.3 * rng.uniform();
    double delta = 0.02 + 0.05 * rng.uniform();
    double c_M = 0.05 + 0.25 * rng.uniform();
    int d = 1 + static_cast<int>(rng.next_u64() % 2);
    int D = 2 + static_cast<int>(rng.next_u64() % 8);
    long N0 = 1000 + static_cast<long>(rng.next_u64() % 9000);
    double alpha = 0.02 + 0.2 * rng.uniform();
    double gamma_p = 0.5 + 4.0 * rng.uniform();
    int n = 10 + static_cast<int>(rng.next_u64() % 90);

    big bs(sigma), bd(delta), bc(c_M), ba(alpha);
    big omega = ball_volume_t<big>(d);
    big ratio = (1 / bc) / (boost::multiprecision::pow(bd, d) * omega);
    if (ratio < 1) continue;

    OracleParams p = derive_params(sigma, delta, d, c_M);
    big k0 = boost::multiprecision::sqrt(2 * boost::multiprecision::acos(big(-1))) * bs;
    big k1 = ratio * k0;
    big rd = bs * bs / bd * boost::multiprecision::log(ratio);
    big Gd = (1 / k1) * boost::multiprecision::exp(-rd * rd / (2 * bs * bs));
    if (!close(p.kappa0, k0) || !close(p.kappa1, k1) || !close(p.r_delta, rd) ||
        !close(p.Gamma_delta, Gd, 1e-9))
      ++bad;

    double R = truncation_radius(sigma, n, N0, alpha);
    big bR = 2 * bs * boost::multiprecision::sqrt(big(n)) +
             2 * bs * boost::multiprecision::sqrt(boost::multiprecision::log(2 * big(N0) / ba));
    if (!close(R, bR)) ++bad;

    double ee = eps_emp(R, D, N0, alpha);
    big bee = 2 * (bR + 1) * (bR + 1) *
              ((boost::multiprecision::sqrt(big(D)) + 2) / boost::multiprecision::sqrt(big(N0))) *
              (1 + boost::multiprecision::sqrt(2 * boost::multiprecision::log(4 / ba)));
    if (!close(ee, bee)) ++bad;

    double bias = pca_bias_bound(d, 0.1, ee, 1.0);
    big bbias = big(d) * boost::multiprecision::pow(big(4) * big(1) / 100 + 2 * bee,
                                                    big(1) / (d + 2));
    if (!close(bias, bbias)) ++bad;

    if (sigma <= 1.0) {
      big logarg = boost::multiprecision::pow(2 * big(D), d) /
                   (bc * boost::multiprecision::pow(bs, d) * omega);
      if (logarg > 1) {
        double J = dudley_J(D, d, sigma, c_M);
        big bJ = 1 / boost::multiprecision::sqrt(big(D)) +
                 boost::multiprecision::sqrt(boost::multiprecision::log(logarg)) *
                     (4 / bs * boost::multiprecision::log(2 * big(D) / bs) + 1 / bs);
        if (!close(J, bJ)) ++bad;

        ChatterjeeTail tail = chatterjee_tail(gamma_p, J, sigma);
        big bg(gamma_p);
        big j4 = boost::multiprecision::pow(bJ, big(1) / 4);
        big thr = bs * boost::multiprecision::sqrt(bJ) + bs * bg * j4;
        big pb = 3 * boost::multiprecision::exp(-boost::multiprecision::pow(bg, 4) /
                                                (32 * (1 + bg / j4) * (1 + bg / j4)));
        if (!close(tail.threshold, thr) || !close(tail.prob_bound, pb)) ++bad;

        double nrr = noise_reduction_ratio(n, J, gamma_p);
        if (!close(nrr, (boost::multiprecision::sqrt(bJ) + bg * j4) /
                            boost::multiprecision::sqrt(big(n))))
          ++bad;
      }
    }

    double eps = 0.1 + 1.9 * rng.uniform();
    double NM = 2.0 + 50.0 * rng.uniform();
    big beps(eps), bNM(NM);
    if (!close(hull_covering_exponent_bound(eps, NM),
               boost::multiprecision::ceil(8 / (beps * beps)) * boost::multiprecision::log(bNM)))
      ++bad;

    double tau = 0.5 + rng.uniform();
    double V = 1.0 + 5.0 * rng.uniform();
    big bt(tau), bV(V);
    big be = beps < bt / 4 ? beps : big(bt / 4);
    if (!close(manifold_covering_bound(eps, tau, V, d),
               bV / (omega * boost::multiprecision::pow(be, d))))
      ++bad;

    double Gamma = 0.5 / p.kappa1 * rng.uniform() + 1e-6;
    if (Gamma * p.kappa1 < 1.0) {
      GapResult g = gap_bound(Gamma, p);
      big bG(Gamma);
      big up = boost::multiprecision::sqrt(2 * bs * bs * boost::multiprecision::log(1 / (bG * k0)));
      big lo = -bd + boost::multiprecision::sqrt(2 * bs * bs *
                                                 boost::multiprecision::log(1 / (bG * k1)));
      if (!close(g.gap, up - lo)) ++bad;

      double ref = plan_samples_refined(p, Gamma, 0.1);
      big bref = (1 / bG) * boost::multiprecision::log(big(10)) *
                 boost::multiprecision::log(1 / (bG * k0));
      if (!close(ref, bref)) ++bad;
    }

    double dstar = 0.5 + 2.0 * rng.uniform();
    if (!close(direction_error_bound(delta, dstar),
               boost::multiprecision::sqrt(2 * bd / big(dstar))))
      ++bad;
  }
  bool ok = bad == 0;
  std::ostringstream d;
  d << bad << " mismatches against 50-digit re-evaluation over 20 tuples, " << timer.seconds()
    << " s";
  report(7, "high-precision bound calculators", ok, d.str());
}

// ---------------------------------------------------------------- criterion 8
void criterion_chatterjee() {
  Timer timer;
  const double sigma = 0.2;
  PointCloud grid = ellipse_grid(1000);
  Vec x = grid.point(250);
  double J = dudley_J(2, 1, sigma, 0.15);
  ChatterjeeTail tail = chatterjee_tail(3.0, J, sigma);

  Rng rng(8001);
  long exceed = 0;
  const int trials = 5000;
  for (int t = 0; t < trials; ++t) {
    Vec y = x;
    y[0] += sigma * rng.normal();
    y[1] += sigma * rng.normal();
    auto proj = project_onto_hull(y, grid);
    Vec xhat = proj.distance == 0.0 ? y : proj.point;
    if ((xhat - x).norm() >= tail.threshold) ++exceed;
  }
  double frac = static_cast<double>(exceed) / trials;
  bool ok = frac <= tail.prob_bound;
  std::ostringstream d;
  d << "exceedance " << frac << " <= bound " << std::min(tail.prob_bound, 1.0) << " at threshold "
    << tail.threshold << ", " << timer.seconds() << " s";
  report(8, "projection deviation bound", ok, d.str());
}

}  // namespace

int main() {
  criterion_ellipse_pipeline();
  criterion_oracle_accuracy();
  criterion_net_vs_exact();
  criterion_hypocycloid();
  criterion_operator_norms();
  criterion_lipschitz();
  criterion_highprec();
  criterion_chatterjee();
  std::cout << (failures == 0 ? "all criteria passed"
                              : std::to_string(failures) + " criterion(s) failed")
            << "\n";
  return failures == 0 ? 0 : 1;
}
