#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cvd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy mapped to CLI exit codes: ConfigError -> 2,
// StageError -> 3, ResourceCapError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Lebesgue volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  if (d < 0) throw std::invalid_argument("unit_ball_volume: d must be >= 0");
  return std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline bool approx_unit(double norm, double tol = 1e-12) {
  return std::abs(norm - 1.0) <= tol;
}

}  // namespace cvd
