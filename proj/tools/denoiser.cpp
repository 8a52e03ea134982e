// Command-line driver: dataset generation, denoising runs, pentagon
// projection histograms, oracle accuracy tables, the imaging pipeline, and
// the bound calculators. Machine-readable CSV/JSON out, deterministic per
// seed.
#include <CLI11.hpp>

#include <iostream>

#include "cvd/cryoem.hpp"
#include "cvd/io.hpp"
#include "cvd/projection.hpp"

namespace {

using namespace cvd;

ManifoldSpec manifold_from_config(const Config& cfg) {
  ManifoldSpec spec;
  spec.kind = cfg.get_str("data.manifold", "ellipse");
  if (spec.kind != "ellipse" && spec.kind != "hypocycloid")
    throw ConfigError("data.manifold must be 'ellipse' or 'hypocycloid', got '" + spec.kind + "'");
  spec.a = cfg.get_double("data.a", 1.0);
  spec.n_cusps = static_cast<int>(cfg.get_long("data.n_cusps", 5));
  spec.ambient = static_cast<int>(cfg.get_long("data.ambient", 2));
  return spec;
}

DenoiseConfig denoise_from_config(const Config& cfg, bool exact, int threads) {
  DenoiseConfig dc;
  dc.eps0 = cfg.get_double("run.eps0", dc.eps0);
  dc.eps = cfg.get_double("run.eps", dc.eps);
  dc.alpha = cfg.get_double("run.alpha", dc.alpha);
  dc.eta = cfg.get_double("run.eta", dc.eta);
  dc.delta = cfg.get_double("run.delta", dc.delta);
  dc.d = static_cast<int>(cfg.get_long("run.d", dc.d));
  dc.c_M = cfg.get_double("run.c_M", dc.c_M);
  dc.mesh = cfg.get_double("run.mesh", dc.mesh);
  dc.C_R = cfg.get_double("run.C_R", dc.C_R);
  dc.C_prop = cfg.get_double("run.C_prop", dc.C_prop);
  dc.C_dudley = cfg.get_double("run.C_dudley", dc.C_dudley);
  dc.gamma = cfg.get_double("run.gamma", dc.gamma);
  dc.exact_provider = exact || cfg.get_bool("run.exact_provider", false);
  dc.threads = threads;
  return dc;
}

int cmd_generate(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  DirLock lock(out);
  ManifoldSpec spec = manifold_from_config(cfg);
  long n = cfg.get_long("data.count", 20000);
  long n0 = cfg.get_long("data.n0", n / 4);
  long n1 = cfg.get_long("data.n1", n / 2);
  double sigma = cfg.get_double("data.sigma", 0.2);
  Dataset ds = make_dataset(spec, n0, n1, n, sigma, seed);
  write_dataset(ds, out, &spec);
  std::cout << "wrote dataset (" << n << " points) to " << out << "\n";
  return 0;
}

int cmd_denoise(const Config& cfg, const fs::path& data_dir, bool exact, int threads,
                const fs::path& out) {
  DirLock lock(out);
  Dataset ds = read_dataset(data_dir);
  DenoiseConfig dc = denoise_from_config(cfg, exact, threads);
  DenoiseReport rep = denoise(ds, dc);
  write_report(rep, out);
  std::cout << "reduction ratio " << rep.reduction_ratio << ", report in " << out << "\n";
  return 0;
}

/// Arc-length coordinate of the nearest boundary point of the regular n-gon
/// with the given vertices (in cyclic order).
double polygon_arc_coordinate(const Vec& p, const PointCloud& verts) {
  const long n = verts.size();
  double best_d = std::numeric_limits<double>::infinity();
  double best_s = 0.0, walked = 0.0;
  for (long j = 0; j < n; ++j) {
    Vec a = verts.point(j), b = verts.point((j + 1) % n);
    Vec ab = b - a;
    double len = ab.norm();
    double t = std::clamp((p - a).dot(ab) / (len * len), 0.0, 1.0);
    double d = (p - (a + t * ab)).norm();
    if (d < best_d) {
      best_d = d;
      best_s = walked + t * len;
    }
    walked += len;
  }
  return best_s;
}

int cmd_hypocycloid(const Config& cfg, std::uint64_t seed, const fs::path& out) {
  DirLock lock(out);
  std::string source = cfg.get_str("hypocycloid.source", "cusp");
  double t_src;
  if (source == "cusp")
    t_src = 0.0;
  else if (source == "near-cusp")
    t_src = 0.1 * (2.0 * M_PI / 5.0);
  else if (source == "mid-arc")
    t_src = 0.5 * (2.0 * M_PI / 5.0);
  else
    throw ConfigError("hypocycloid.source must be cusp, near-cusp, or mid-arc");

  long count = cfg.get_long("hypocycloid.count", 10000);
  int bins = static_cast<int>(cfg.get_long("hypocycloid.bins", 720));
  std::string sigmas_str = cfg.get_str("hypocycloid.sigmas", "0.3,0.5,1.0,10.0");
  std::vector<double> sigmas;
  std::stringstream ss(sigmas_str);
  std::string item;
  while (std::getline(ss, item, ',')) sigmas.push_back(std::stod(item));

  Vec src = hypocycloid_point(1.0, 5, t_src);
  PointCloud verts = hypocycloid_cusps(1.0, 5);
  double perimeter = 5.0 * (verts.point(0) - verts.point(1)).norm();

  json summary;
  summary["source"] = source;
  summary["perimeter"] = perimeter;
  for (double sigma : sigmas) {
    Rng rng(derive_seed(seed, "hypo-" + std::to_string(sigma)));
    std::vector<long> hist(bins, 0);
    long inside = 0, outside = 0;
    for (long i = 0; i < count; ++i) {
      Vec y = src;
      for (int j = 0; j < 2; ++j) y[j] += sigma * rng.normal();
      auto proj = project_onto_hull(y, verts);
      if (proj.distance <= 1e-9) {
        ++inside;
        continue;
      }
      ++outside;
      double s = polygon_arc_coordinate(proj.point, verts);
      int b = std::min(bins - 1, static_cast<int>(s / perimeter * bins));
      ++hist[b];
    }
    std::ostringstream name;
    name << "hist_sigma_" << sigma << ".csv";
    std::ofstream csv(out / name.str());
    csv << "bin,arc_lo,count\n";
    for (int b = 0; b < bins; ++b)
      csv << b << "," << perimeter * b / bins << "," << hist[b] << "\n";
    summary["runs"].push_back(
        {{"sigma", sigma}, {"inside", inside}, {"outside", outside}, {"hist", name.str()}});
  }
  std::ofstream js(out / "summary.json");
  js << summary.dump(2) << "\n";
  std::cout << "wrote histograms for " << sigmas.size() << " noise levels to " << out << "\n";
  return 0;
}

int cmd_oracle_eval(const Config& cfg, const fs::path& data_dir, std::uint64_t seed,
                    const fs::path& out) {
  DirLock lock(out);
  Dataset ds = read_dataset(data_dir);
  double delta = cfg.get_double("oracle.delta", 0.05);
  int d = static_cast<int>(cfg.get_long("oracle.d", 1));
  double c_M = cfg.get_double("oracle.c_M", 0.15);
  long n_queries = cfg.get_long("oracle.queries", 50);
  double eta = cfg.get_double("oracle.eta", 0.1);
  long cap = cfg.get_long("oracle.sample_cap", 200000);

  OracleParams params = derive_params(ds.sigma, delta, d, c_M);
  long planned;
  try {
    planned = plan_samples(params, eta, 1.0, 1.0, 1e17);
  } catch (const ResourceCapError&) {
    planned = cap;
  }
  long want = std::min(planned, cap);
  PointCloud oracle_block = block(ds.noisy, ds.n0, std::min(ds.n1, ds.n0 + want));
  PointCloud clean_grid = block(ds.clean, 0, ds.n0);

  Rng rng(derive_seed(seed, "oracle-eval"));
  std::ofstream csv(out / "queries.csv");
  csv << "index,bx,by,t,estimate,exact,error,clamped\n";
  std::vector<double> errors;
  long within = 0;
  for (long qi = 0; qi < n_queries; ++qi) {
    Vec b = rng.unit_vector(ds.noisy.dim());
    double s = support_function(clean_grid, b);
    double t = s + params.r_delta + 0.2 + 0.6 * rng.uniform();
    double exact = t - s;
    DistResult r = dist_to_hull(Hyperplane(b, t), oracle_block, params);
    double err = std::abs(r.distance - exact);
    errors.push_back(err);
    if (err <= 3.0 * delta) ++within;
    csv << qi << "," << b[0] << "," << b[1] << "," << t << "," << r.distance << "," << exact
        << "," << err << "," << (r.intersects_hull ? 1 : 0) << "\n";
  }
  std::sort(errors.begin(), errors.end());
  json summary{{"queries", n_queries},
               {"within_3delta", within},
               {"fraction", static_cast<double>(within) / n_queries},
               {"median_error", errors[errors.size() / 2]},
               {"p90_error", errors[static_cast<size_t>(0.9 * errors.size())]},
               {"delta", delta},
               {"constants", {{"A", 1.0}, {"C_d", 1.0}}}};
  std::ofstream js(out / "summary.json");
  js << summary.dump(2) << "\n";
  std::cout << within << "/" << n_queries << " queries within 3 delta\n";
  return 0;
}

int cmd_cryoem(const Config& cfg, std::uint64_t seed, bool exact, int threads,
               const fs::path& out) {
  DirLock lock(out);
  int k = static_cast<int>(cfg.get_long("cryoem.k", 3));
  int n_pix = static_cast<int>(cfg.get_long("cryoem.n_pix", 16));
  long n = cfg.get_long("cryoem.count", 400);
  long n0 = cfg.get_long("cryoem.n0", n / 2);
  long n1 = cfg.get_long("cryoem.n1", 3 * n / 4);
  double sigma_rel = cfg.get_double("cryoem.sigma_rel", 0.1);

  Density f = default_density(k);
  long dim = 1;
  for (int a = 0; a < k - 1; ++a) dim *= n_pix;

  Mat images(n, dim);
  for (long i = 0; i < n; ++i) {
    Rotation R = haar_rotation(k, derive_seed(seed, "rot-" + std::to_string(i)));
    images.row(i) = forward_map(f, R, n_pix).values.transpose();
  }
  double rms = std::sqrt(images.array().square().mean());
  double sigma = sigma_rel * rms;

  Dataset ds;
  ds.clean = PointCloud(images);
  ds.noisy = add_gaussian_noise(ds.clean, sigma, derive_seed(seed, "noise"));
  ds.sigma = sigma;
  ds.n0 = n0;
  ds.n1 = n1;
  ds.n = n;
  ds.seed = seed;
  ds.manifold = "cryoem-images";
  write_dataset(ds, out / "dataset");

  DenoiseConfig dc = denoise_from_config(cfg, exact, threads);
  if (dc.mesh <= 0.0) dc.mesh = 0.5;
  DenoiseReport rep = denoise(ds, dc);
  write_report(rep, out / "report");
  std::cout << "image manifold reduction ratio " << rep.reduction_ratio << "\n";
  return 0;
}

int cmd_bounds(const Config& cfg, const fs::path& out) {
  DirLock lock(out);
  int D = static_cast<int>(cfg.get_long("bounds.D", 2));
  int d = static_cast<int>(cfg.get_long("bounds.d", 1));
  double sigma = cfg.get_double("bounds.sigma", 0.2);
  double c_M = cfg.get_double("bounds.c_M", 0.15);
  double gamma = cfg.get_double("bounds.gamma", 3.0);
  double C = cfg.get_double("bounds.C", 1.0);
  int n = static_cast<int>(cfg.get_long("bounds.n", 50));

  double J = dudley_J(D, d, sigma, c_M, C);
  ChatterjeeTail tail = chatterjee_tail(gamma, J, sigma);
  json j{{"J", J},
         {"threshold", tail.threshold},
         {"prob_bound", tail.prob_bound},
         {"noise_reduction_ratio", noise_reduction_ratio(n, J, gamma)},
         {"constants", {{"C", C}, {"gamma", gamma}}},
         {"inputs", {{"D", D}, {"d", d}, {"sigma", sigma}, {"c_M", c_M}, {"n", n}}}};
  std::ofstream js(out / "bounds.json");
  js << j.dump(2) << "\n";
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex-hull manifold denoiser"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", data_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  bool exact = false;
  app.add_option("--config", config_path, "configuration file (key=value with [sections])");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_flag("--exact-oracle", exact, "use the exact hull support provider");

  auto* gen = app.add_subcommand("generate", "write a synthetic dataset");
  auto* den = app.add_subcommand("denoise", "run the denoising pipeline");
  den->add_option("--data", data_dir, "dataset directory")->required();
  auto* hyp = app.add_subcommand("hypocycloid", "pentagon projection histograms");
  auto* oev = app.add_subcommand("oracle-eval", "distance-oracle accuracy table");
  oev->add_option("--data", data_dir, "dataset directory")->required();
  auto* cry = app.add_subcommand("cryoem", "synthetic imaging pipeline");
  auto* bnd = app.add_subcommand("bounds", "closed-form bound calculators");
  // global flags may appear after the subcommand name
  for (auto* sub : {gen, den, hyp, oev, cry, bnd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
    cvd::Config cfg;
    if (!config_path.empty()) cfg = cvd::Config::parse_file(config_path);

    if (gen->parsed()) return cmd_generate(cfg, seed, out_dir);
    if (den->parsed()) return cmd_denoise(cfg, data_dir, exact, threads, out_dir);
    if (hyp->parsed()) return cmd_hypocycloid(cfg, seed, out_dir);
    if (oev->parsed()) return cmd_oracle_eval(cfg, data_dir, seed, out_dir);
    if (cry->parsed()) return cmd_cryoem(cfg, seed, exact, threads, out_dir);
    if (bnd->parsed()) return cmd_bounds(cfg, out_dir);
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const cvd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cvd::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return 4;
  } catch (const cvd::StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 3;
  }
}
