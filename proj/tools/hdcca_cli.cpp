// Command-line front end: simulate a Monte-Carlo grid, print predicted limits,
// fit CCA to CSV data, or export a synthetic data set.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "hdcca/asymptotics.hpp"
#include "hdcca/csv.hpp"
#include "hdcca/estimator.hpp"
#include "hdcca/harness.hpp"
#include "hdcca/sampling.hpp"

namespace {

void add_model_options(CLI::App* cmd, hdcca::SpikedParams& p) {
  cmd->add_option("--alpha", p.alpha, "Spike exponent")->required();
  cmd->add_option("--rho", p.rho, "Population canonical correlation")->capture_default_str();
  cmd->add_option("--d", p.d, "Dimension of each block")->capture_default_str();
  cmd->add_option("--sigma2x", p.sigma2_x, "Spike scale of X")->capture_default_str();
  cmd->add_option("--sigma2y", p.sigma2_y, "Spike scale of Y")->capture_default_str();
  cmd->add_option("--tau2x", p.tau2_x, "Bulk variance of X")->capture_default_str();
  cmd->add_option("--tau2y", p.tau2_y, "Bulk variance of Y")->capture_default_str();
  cmd->add_option("--theta-x", p.theta_x, "Angle of psi_X from e1 (radians)")->capture_default_str();
  cmd->add_option("--theta-y", p.theta_y, "Angle of psi_Y from e1 (radians)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudoinverse CCA under a spiked covariance model"};
  app.require_subcommand(1);

  // simulate
  std::filesystem::path config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  unsigned threads = 1;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo grid");
  simulate->add_option("--config", config_path, "Grid config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out_override, "Output directory (overrides config)");
  auto* seed_opt = simulate->add_option("--seed", seed_override, "Master seed (overrides config)");
  simulate->add_option("--threads", threads, "Worker threads")->capture_default_str();

  // predict
  hdcca::SpikedParams predict_params;
  predict_params.rho = 0.7;
  predict_params.theta_x = predict_params.theta_y = 0.75 * std::numbers::pi;
  predict_params.d = 500;
  long predict_n = 20;
  auto* predict = app.add_subcommand("predict", "Print the predicted d -> infinity limits as JSON");
  add_model_options(predict, predict_params);
  predict->add_option("--n", predict_n, "Sample size")->required();

  // fit
  std::filesystem::path x_path, y_path, fit_out = "fit_out";
  hdcca::CcaOptions fit_options;
  auto* fit = app.add_subcommand("fit", "Fit CCA to two headerless CSV matrices (rows = dimensions)");
  fit->add_option("--x", x_path, "X data, d rows by n columns")->required()->check(CLI::ExistingFile);
  fit->add_option("--y", y_path, "Y data, same shape as X")->required()->check(CLI::ExistingFile);
  fit->add_flag("--center", fit_options.center, "Subtract row means first");
  fit->add_option("--rank-tol", fit_options.rank_tol, "Relative eigenvalue cutoff")->capture_default_str();
  fit->add_option("--components", fit_options.k, "Components to report (0 = all retained)")->capture_default_str();
  fit->add_option("--out", fit_out, "Output directory")->capture_default_str();

  // sample
  hdcca::SpikedParams sample_params = predict_params;
  long sample_n = 20;
  std::uint64_t sample_seed = 1;
  std::filesystem::path sample_out = "sample_out";
  auto* sample = app.add_subcommand("sample", "Draw one data set and write it as CSV");
  add_model_options(sample, sample_params);
  sample->add_option("--n", sample_n, "Sample size")->required();
  sample->add_option("--seed", sample_seed, "Master seed")->capture_default_str();
  sample->add_option("--out", sample_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      hdcca::GridConfig cfg = hdcca::load_grid_config(config_path);
      if (!out_override.empty()) cfg.out_dir = out_override;
      if (*seed_opt) cfg.master_seed = seed_override;
      const auto result = hdcca::run_grid(cfg, threads);
      long failed = 0;
      for (const auto& c : result.summary) failed += c.failed;
      std::cout << "wrote " << result.records.size() << " records ("
                << result.summary.size() << " cells, " << failed << " failed) to "
                << cfg.out_dir.string() << "\n";
    } else if (*predict) {
      const auto limits = hdcca::predicted_limits(predict_params, predict_n);
      std::optional<hdcca::Theorem1Constants> constants;
      if (predict_params.rho > 0.0)
        constants = hdcca::theorem1_constants(predict_params.sigma2_x,
                                              predict_params.sigma2_y, predict_params.rho);
      std::cout << hdcca::prediction_json(limits, constants);
    } else if (*fit) {
      const Eigen::MatrixXd x = hdcca::read_matrix_csv(x_path);
      const Eigen::MatrixXd y = hdcca::read_matrix_csv(y_path);
      const auto est = hdcca::cca_fit(x, y, fit_options);
      std::filesystem::create_directories(fit_out);
      hdcca::write_matrix_csv(fit_out / "rho_hat.csv", est.rho_hat);
      hdcca::write_matrix_csv(fit_out / "psi_x.csv", est.psi_x_hat);
      hdcca::write_matrix_csv(fit_out / "psi_y.csv", est.psi_y_hat);
      std::cout << "retained rank " << est.diagnostics.rank << " (x " << est.diagnostics.rank_x
                << ", y " << est.diagnostics.rank_y << "), " << est.components()
                << " components written to " << fit_out.string() << "\n";
    } else if (*sample) {
      const auto model = hdcca::build_population_model(sample_params);
      const auto root = hdcca::joint_sqrt(model);
      const auto data = hdcca::generate_dataset(model, root, sample_n,
                                                hdcca::replication_stream(sample_seed, 0, 0));
      hdcca::export_dataset(data, sample_out);
      std::cout << "wrote " << sample_out.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
