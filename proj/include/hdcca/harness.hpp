#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hdcca/asymptotics.hpp"
#include "hdcca/config.hpp"
#include "hdcca/sampling.hpp"
#include "hdcca/spiked_model.hpp"

namespace hdcca {

/// Everything a replication needs that does not depend on the draw. Built once
/// per grid cell and shared read-only between workers.
struct CellContext {
  std::uint32_t index = 0;
  SpikedParams params;
  long n = 0;
  PopulationModel model;
  StructuredSqrt root;
  LimitPrediction prediction;
  /// Present when the first-correlation limit is defined (rho > 0, alpha > 1).
  std::optional<Theorem1Constants> constants;
};

CellContext make_cell(const SpikedParams& params, long n, std::uint32_t index);

struct RepOptions {
  bool center = false;
  double rank_tol = 1e-10;
  int k = 5;
};

struct ComponentMetrics {
  double rho_hat = 0.0;
  double inner_x = 0.0;
  double abs_inner_x = 0.0;
  double angle_x_deg = 0.0;
  double inner_y = 0.0;
  double abs_inner_y = 0.0;
  double angle_y_deg = 0.0;
};

struct RepRecord {
  long n = 0;
  long d = 0;
  double alpha = 0.0;
  double rho = 0.0;
  int rep = 0;
  std::vector<ComponentMetrics> components;
  double lambda_x1_scaled = 0.0;   ///< lambda_X1 / max(d^alpha, d)
  double lambda_x2_scaled = 0.0;   ///< n * lambda_X2 / d
  double lambda_xy2_over_d = 0.0;  ///< second singular value of Sigma_XY, over d
  double oracle_rho1 = 0.0;        ///< NaN when the limit is undefined
  long retained_rank = 0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// One replication: sample, fit, and score against the population weights.
/// Estimation failures are reported in `status`, never thrown.
RepRecord run_rep(const CellContext& cell, int rep, std::uint64_t master_seed,
                  const RepOptions& options);

struct Stats {
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation; 0 for a single value
  double median = 0.0;
  long count = 0;
};

/// NaN entries are skipped; an empty input yields NaN statistics.
Stats describe(const std::vector<double>& values);

struct ComponentSummary {
  int component = 0;  ///< 1-based
  Stats rho_hat;
  Stats inner_x;
  Stats abs_inner_x;
  Stats angle_x_deg;
  Stats abs_inner_y;
  double predicted_abs_inner_x = 0.0;
  double predicted_rho = 0.0;  ///< NaN for the random first-correlation limit
};

struct CellSummary {
  long n = 0;
  long d = 0;
  double alpha = 0.0;
  double rho = 0.0;
  long reps = 0;
  long failed = 0;
  std::vector<ComponentSummary> components;
  Stats lambda_x1_scaled;
  Stats lambda_x2_scaled;
  Stats lambda_xy2_over_d;
  Stats oracle_rho1;
  Stats oracle_gap;  ///< |rho_hat_1 - oracle_rho1|
  std::optional<LimitPrediction> prediction;
};

/// Groups records by (n, d, alpha), sorted ascending, with theory columns
/// from `base` (its d and alpha are overridden per cell).
std::vector<CellSummary> summarize(const std::vector<RepRecord>& records,
                                   const SpikedParams& base);

struct GridResult {
  std::vector<RepRecord> records;  ///< ordered by cell, then rep
  std::vector<CellSummary> summary;
};

/// Cells in canonical order: sorted by n, then d, then alpha.
std::vector<CellContext> make_cells(const GridConfig& cfg);

/// Runs every replication of every cell on `threads` workers. Output does not
/// depend on the thread count. When `write` is set the records, summary and
/// run metadata are written under cfg.out_dir; if a worker aborts, completed
/// records are flushed before the error propagates.
GridResult run_grid(const GridConfig& cfg, unsigned threads = 1, bool write = true);

inline constexpr const char* kRecordsHeader =
    "n,d,alpha,rho,rep,component,rho_hat,inner_x,abs_inner_x,angle_x_deg,"
    "inner_y,abs_inner_y,angle_y_deg,lambda_x1_scaled,lambda_xy2_over_d,"
    "oracle_rho1,status";

void write_records_csv(std::ostream& out, const std::vector<RepRecord>& records);
std::string summary_json(const std::vector<CellSummary>& summary);
std::string metadata_json(const GridConfig& cfg);
std::string prediction_json(const LimitPrediction& p,
                            const std::optional<Theorem1Constants>& c);

}  // namespace hdcca
