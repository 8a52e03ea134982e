#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cvd/datagen.hpp"
#include "cvd/pca.hpp"
#include "cvd/projection.hpp"

namespace cvd {

namespace fs = std::filesystem;
using nlohmann::json;

inline void write_csv(const PointCloud& P, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw StageError("cannot open for writing: " + path.string());
  out.precision(17);
  for (int j = 0; j < P.dim(); ++j) out << (j ? "," : "") << "x" << j;
  out << "\n";
  for (long i = 0; i < P.size(); ++i) {
    for (int j = 0; j < P.dim(); ++j) out << (j ? "," : "") << P.pts(i, j);
    out << "\n";
  }
}

inline PointCloud read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StageError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw StageError("empty csv: " + path.string());
  int dim = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  std::vector<double> vals;
  long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      vals.push_back(std::stod(cell));
      ++got;
    }
    if (got != dim) throw StageError("ragged csv row in " + path.string());
    ++rows;
  }
  Mat m(rows, dim);
  for (long i = 0; i < rows; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = vals[static_cast<size_t>(i) * dim + j];
  return PointCloud(std::move(m));
}

inline json cloud_manifest(const PointCloud& P, const std::string& rel_path) {
  return json{{"ambient_dim", P.dim()}, {"count", P.size()}, {"path", rel_path}};
}

inline void write_dataset(const Dataset& ds, const fs::path& dir,
                          const ManifoldSpec* spec = nullptr) {
  fs::create_directories(dir);
  write_csv(ds.clean, dir / "clean.csv");
  write_csv(ds.noisy, dir / "noisy.csv");
  json meta{{"manifold", ds.manifold},
            {"sigma", ds.sigma},
            {"seed", ds.seed},
            {"partition", {ds.n0, ds.n1, ds.n}},
            {"clean", cloud_manifest(ds.clean, "clean.csv")},
            {"noisy", cloud_manifest(ds.noisy, "noisy.csv")}};
  if (spec) meta["params"] = {{"a", spec->a}, {"n_cusps", spec->n_cusps}, {"ambient", spec->ambient}};
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
}

inline Dataset read_dataset(const fs::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw StageError("missing meta.json in " + dir.string());
  json meta = json::parse(in);
  Dataset ds;
  ds.clean = read_csv(dir / "clean.csv");
  ds.noisy = read_csv(dir / "noisy.csv");
  ds.manifold = meta.at("manifold").get<std::string>();
  ds.sigma = meta.at("sigma").get<double>();
  ds.seed = meta.at("seed").get<std::uint64_t>();
  auto part = meta.at("partition");
  ds.n0 = part.at(0).get<long>();
  ds.n1 = part.at(1).get<long>();
  ds.n = part.at(2).get<long>();
  if (ds.clean.size() != ds.noisy.size() || ds.clean.size() != ds.n)
    throw StageError("dataset counts disagree with partition in " + dir.string());
  return ds;
}

inline json subspace_to_json(const SubspaceFit& fit) {
  json j;
  j["D"] = fit.reduced_dim;
  j["residual"] = fit.residual;
  j["degenerate"] = fit.degenerate;
  j["center"] = std::vector<double>(fit.center.data(), fit.center.data() + fit.center.size());
  std::vector<double> basis;
  for (long i = 0; i < fit.basis.rows(); ++i)
    for (long k = 0; k < fit.basis.cols(); ++k) basis.push_back(fit.basis(i, k));
  j["basis"] = basis;  // row-major
  return j;
}

inline SubspaceFit subspace_from_json(const json& j) {
  SubspaceFit fit;
  fit.reduced_dim = j.at("D").get<int>();
  fit.residual = j.at("residual").get<double>();
  fit.degenerate = j.value("degenerate", false);
  auto c = j.at("center").get<std::vector<double>>();
  fit.center = Eigen::Map<const Vec>(c.data(), static_cast<long>(c.size()));
  auto b = j.at("basis").get<std::vector<double>>();
  long n = fit.center.size();
  fit.basis.resize(fit.reduced_dim, n);
  for (int i = 0; i < fit.reduced_dim; ++i)
    for (long k = 0; k < n; ++k) fit.basis(i, k) = b[static_cast<size_t>(i) * n + k];
  return fit;
}

inline void write_report(const DenoiseReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& c = rep.config;
  json j;
  j["config"] = {{"eps0", c.eps0},       {"eps", c.eps},
                 {"alpha", c.alpha},     {"eta", c.eta},
                 {"delta", rep.delta_used}, {"d", c.d},
                 {"c_M", c.c_M},         {"mesh", rep.mesh_used},
                 {"C_R", c.C_R},         {"C_prop", c.C_prop},
                 {"C_dudley", c.C_dudley}, {"gamma", c.gamma},
                 {"exact_provider", c.exact_provider}, {"threads", c.threads}};
  j["reduced_dim"] = rep.reduced_dim;
  j["net_size"] = rep.net_size;
  j["pca_residual"] = rep.pca_residual;
  j["budget"] = {{"pca_bias", rep.budget.pca_bias},
                 {"statistical_risk", rep.budget.statistical_risk},
                 {"algorithmic", rep.budget.algorithmic},
                 {"total", rep.budget.total}};
  j["mean_err_xhat"] = rep.mean_err_xhat;
  j["mean_err_noisy"] = rep.mean_err_noisy;
  j["reduction_ratio"] = rep.reduction_ratio;
  j["n_inside_hull"] = rep.n_inside_hull;
  j["points"] = "points.csv";
  std::ofstream out(dir / "report.json");
  out << j.dump(2) << "\n";

  std::ofstream pts(dir / "points.csv");
  pts.precision(17);
  pts << "index";
  for (long k = 0; k < rep.x_hat.cols(); ++k) pts << ",xhat" << k;
  pts << ",lambda0";
  for (long k = 0; k < rep.v0.cols(); ++k) pts << ",v0_" << k;
  pts << ",err_vs_clean\n";
  for (long i = 0; i < rep.x_hat.rows(); ++i) {
    pts << i;
    for (long k = 0; k < rep.x_hat.cols(); ++k) pts << "," << rep.x_hat(i, k);
    pts << "," << rep.lambda0[i];
    for (long k = 0; k < rep.v0.cols(); ++k) pts << "," << rep.v0(i, k);
    pts << "," << rep.err_vs_clean[i] << "\n";
  }
}

/// Flat key=value configuration with [section] headers; keys are stored as
/// "section.key". Lines starting with '#' are comments.
struct Config {
  std::map<std::string, std::string> kv;

  static Config parse_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    return parse_stream(in, path.string());
  }

  static Config parse_stream(std::istream& in, const std::string& origin = "<stream>") {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      auto last = line.find_last_not_of(" \t\r");
      std::string s = line.substr(first, last - first + 1);
      if (s[0] == '#') continue;
      if (s.front() == '[' && s.back() == ']') {
        section = s.substr(1, s.size() - 2);
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
      std::string key = s.substr(0, eq);
      std::string val = s.substr(eq + 1);
      auto trim = [](std::string& t) {
        auto a = t.find_first_not_of(" \t");
        auto b = t.find_last_not_of(" \t");
        t = (a == std::string::npos) ? "" : t.substr(a, b - a + 1);
      };
      trim(key);
      trim(val);
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.kv[section.empty() ? key : section + "." + key] = val;
    }
    return cfg;
  }

  bool has(const std::string& key) const { return kv.count(key) > 0; }

  std::string get_str(const std::string& key, const std::string& def = "") const {
    auto it = kv.find(key);
    return it == kv.end() ? def : it->second;
  }

  double get_double(const std::string& key, double def) const {
    auto it = kv.find(key);
    if (it == kv.end()) return def;
    try {
      size_t pos = 0;
      double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not a number: " + it->second);
    }
  }

  long get_long(const std::string& key, long def) const {
    auto it = kv.find(key);
    if (it == kv.end()) return def;
    try {
      size_t pos = 0;
      long v = std::stol(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': not an integer: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool def) const {
    auto it = kv.find(key);
    if (it == kv.end()) return def;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + it->second);
  }
};

/// Advisory single-instance lock on an output directory.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    if (fs::exists(path_))
      throw StageError("output directory is locked by another run: " + dir.string());
    std::ofstream(path_) << "locked\n";
  }
  ~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
};

}  // namespace cvd
