#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdcca/spiked_model.hpp"

namespace hdcca {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A Monte-Carlo grid: every (n, d, alpha) combination is run `reps` times
/// with the shared scalar parameters. Defaults reproduce the reference grid.
struct GridConfig {
  std::vector<long> n_values{20, 80};
  std::vector<long> d_values{200, 500};
  std::vector<double> alpha_values{0.2, 8.0};
  double rho = 0.7;
  double theta_x = 0.75 * 3.14159265358979323846;
  double theta_y = 0.75 * 3.14159265358979323846;
  double sigma2_x = 1.0;
  double sigma2_y = 1.0;
  double tau2_x = 1.0;
  double tau2_y = 1.0;
  int reps = 100;
  int k = 5;
  std::uint64_t master_seed = 20240611;
  bool center = false;
  double rank_tol = 1e-10;
  std::filesystem::path out_dir = "results";

  /// Scalar parameters with d and alpha left at placeholder values.
  SpikedParams base_params() const;
};

/// Throws ConfigError naming the first violated constraint.
void validate_config(const GridConfig& cfg);

/// Parses `key = value` lines. Values are numbers, `true`/`false`, quoted or
/// bare strings, or bracketed comma-separated lists; angles accept a `pi`
/// suffix (`0.75pi`). `#` starts a comment. Unknown or repeated keys are
/// errors. Keys absent from the text keep their defaults.
GridConfig parse_grid_config(const std::string& text);
GridConfig load_grid_config(const std::filesystem::path& path);

}  // namespace hdcca
