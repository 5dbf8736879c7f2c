#include "hdcca/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "hdcca/csv.hpp"
#include "hdcca/estimator.hpp"

namespace hdcca {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

using Json = nlohmann::ordered_json;

Json to_json(const Stats& s) {
  return Json{{"mean", s.mean}, {"std", s.std}, {"median", s.median}, {"count", s.count}};
}

Json to_json(const LimitPrediction& p) {
  Json j;
  j["regime"] = std::string(to_string(p.regime));
  j["abs_inner_x_first"] = p.abs_inner_x_first;
  j["abs_inner_y_first"] = p.abs_inner_y_first;
  j["abs_inner_rest"] = p.abs_inner_rest;
  j["rho_first"] = p.rho_first;
  j["rho_rest"] = p.rho_rest;
  j["lambda_xy_rest_over_d"] = p.lambda_xy_rest_over_d;
  j["lambda_x_rest_scaled"] = p.lambda_x_rest_scaled;
  j["pc_eigval_scale"] = Json{{"chi2_scale", p.pc_eigval_scale.scale},
                              {"offset", p.pc_eigval_scale.offset},
                              {"mean", p.pc_eigval_scale.mean()}};
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_outputs(const GridConfig& cfg, const std::vector<RepRecord>& records,
                   const std::vector<CellSummary>& summary) {
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream out(cfg.out_dir / "records.csv");
    if (!out) throw std::runtime_error("cannot open records.csv in " + cfg.out_dir.string());
    write_records_csv(out, records);
    if (!out) throw std::runtime_error("write failed: records.csv");
  }
  write_text(cfg.out_dir / "summary.json", summary_json(summary));
  write_text(cfg.out_dir / "metadata.json", metadata_json(cfg));
}

}  // namespace

CellContext make_cell(const SpikedParams& params, long n, std::uint32_t index) {
  CellContext cell;
  cell.index = index;
  cell.params = params;
  cell.n = n;
  cell.model = build_population_model(params);
  cell.root = joint_sqrt(cell.model);
  cell.prediction = predicted_limits(params, n);
  if (params.rho > 0.0 && params.alpha > 1.0)
    cell.constants = theorem1_constants(params.sigma2_x, params.sigma2_y, params.rho);
  return cell;
}

RepRecord run_rep(const CellContext& cell, int rep, std::uint64_t master_seed,
                  const RepOptions& options) {
  RepRecord rec;
  rec.n = cell.n;
  rec.d = cell.params.d;
  rec.alpha = cell.params.alpha;
  rec.rho = cell.params.rho;
  rec.rep = rep;
  try {
    const StreamKey key =
        replication_stream(master_seed, cell.index, static_cast<std::uint32_t>(rep));
    const DataSet data = generate_dataset(cell.model, cell.root, cell.n, key);
    const SampleMoments moments =
        sample_moments(data.x, data.y, options.center, options.rank_tol);
    const CcaEstimate est = cca_from_moments(moments, options.k);

    rec.components.reserve(static_cast<std::size_t>(options.k));
    for (Eigen::Index i = 0; i < est.components(); ++i) {
      const Alignment ax = alignment(est.psi_x_hat.col(i), cell.model.psi_x);
      const Alignment ay = alignment(est.psi_y_hat.col(i), cell.model.psi_y);
      rec.components.push_back({est.rho_hat(i), ax.inner, ax.abs_inner, ax.angle_deg,
                                ay.inner, ay.abs_inner, ay.angle_deg});
    }

    const double d = static_cast<double>(rec.d);
    rec.lambda_x1_scaled =
        moments.x.values(0) / std::max(std::pow(d, rec.alpha), d);
    rec.lambda_x2_scaled = moments.x.values.size() > 1
                               ? static_cast<double>(rec.n) * moments.x.values(1) / d
                               : kNaN;
    const Eigen::VectorXd cross = cross_covariance_singular_values(moments);
    rec.lambda_xy2_over_d = cross.size() > 1 ? cross(1) / d : kNaN;
    rec.oracle_rho1 =
        cell.constants ? limit_rho1(data.z1, data.z2, *cell.constants) : kNaN;
    rec.retained_rank = static_cast<long>(est.diagnostics.rank);
  } catch (const std::exception& e) {
    rec.components.clear();
    rec.status = sanitize(std::string("error: ") + e.what());
  }
  return rec;
}

Stats describe(const std::vector<double>& values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values)
    if (!std::isnan(x)) v.push_back(x);

  Stats s;
  s.count = static_cast<long>(v.size());
  if (v.empty()) {
    s.mean = s.std = s.median = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  s.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return s;
}

std::vector<CellSummary> summarize(const std::vector<RepRecord>& records,
                                   const SpikedParams& base) {
  std::map<std::tuple<long, long, double>, std::vector<const RepRecord*>> cells;
  for (const RepRecord& r : records) cells[{r.n, r.d, r.alpha}].push_back(&r);

  std::vector<CellSummary> out;
  for (const auto& [key, recs] : cells) {
    CellSummary cs;
    std::tie(cs.n, cs.d, cs.alpha) = key;
    cs.rho = recs.front()->rho;
    cs.reps = static_cast<long>(recs.size());

    SpikedParams p = base;
    p.d = cs.d;
    p.alpha = cs.alpha;
    p.rho = cs.rho;
    try {
      cs.prediction = predicted_limits(p, cs.n);
    } catch (const std::invalid_argument&) {
      cs.prediction.reset();
    }

    std::vector<const RepRecord*> ok;
    for (const RepRecord* r : recs) {
      if (r->ok())
        ok.push_back(r);
      else
        ++cs.failed;
    }

    std::size_t k = 0;
    for (const RepRecord* r : ok) k = std::max(k, r->components.size());
    for (std::size_t i = 0; i < k; ++i) {
      std::vector<double> rho, inner_x, abs_x, angle_x, abs_y;
      for (const RepRecord* r : ok) {
        if (i >= r->components.size()) continue;
        const ComponentMetrics& c = r->components[i];
        rho.push_back(c.rho_hat);
        inner_x.push_back(c.inner_x);
        abs_x.push_back(c.abs_inner_x);
        angle_x.push_back(c.angle_x_deg);
        abs_y.push_back(c.abs_inner_y);
      }
      ComponentSummary comp;
      comp.component = static_cast<int>(i + 1);
      comp.rho_hat = describe(rho);
      comp.inner_x = describe(inner_x);
      comp.abs_inner_x = describe(abs_x);
      comp.angle_x_deg = describe(angle_x);
      comp.abs_inner_y = describe(abs_y);
      if (cs.prediction) {
        comp.predicted_abs_inner_x =
            i == 0 ? cs.prediction->abs_inner_x_first : cs.prediction->abs_inner_rest;
        comp.predicted_rho = i == 0 ? cs.prediction->rho_first : cs.prediction->rho_rest;
      } else {
        comp.predicted_abs_inner_x = comp.predicted_rho = kNaN;
      }
      cs.components.push_back(comp);
    }

    std::vector<double> l1, l2, lxy, oracle, gap;
    for (const RepRecord* r : ok) {
      l1.push_back(r->lambda_x1_scaled);
      l2.push_back(r->lambda_x2_scaled);
      lxy.push_back(r->lambda_xy2_over_d);
      oracle.push_back(r->oracle_rho1);
      if (!r->components.empty() && !std::isnan(r->oracle_rho1))
        gap.push_back(std::abs(r->components.front().rho_hat - r->oracle_rho1));
    }
    cs.lambda_x1_scaled = describe(l1);
    cs.lambda_x2_scaled = describe(l2);
    cs.lambda_xy2_over_d = describe(lxy);
    cs.oracle_rho1 = describe(oracle);
    cs.oracle_gap = describe(gap);
    out.push_back(std::move(cs));
  }
  return out;
}

std::vector<CellContext> make_cells(const GridConfig& cfg) {
  validate_config(cfg);
  auto n_values = cfg.n_values;
  auto d_values = cfg.d_values;
  auto alpha_values = cfg.alpha_values;
  std::sort(n_values.begin(), n_values.end());
  std::sort(d_values.begin(), d_values.end());
  std::sort(alpha_values.begin(), alpha_values.end());

  std::vector<CellContext> cells;
  SpikedParams p = cfg.base_params();
  std::uint32_t index = 0;
  for (long n : n_values) {
    for (long d : d_values) {
      for (double alpha : alpha_values) {
        p.d = d;
        p.alpha = alpha;
        cells.push_back(make_cell(p, n, index++));
      }
    }
  }
  return cells;
}

GridResult run_grid(const GridConfig& cfg, unsigned threads, bool write) {
  const std::vector<CellContext> cells = make_cells(cfg);
  const RepOptions options{cfg.center, cfg.rank_tol, cfg.k};
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  const std::size_t total = cells.size() * reps;

  std::vector<RepRecord> slots(total);
  std::vector<char> done(total, 0);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!abort.load(std::memory_order_relaxed)) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) return;
      try {
        slots[task] = run_rep(cells[task / reps], static_cast<int>(task % reps),
                              cfg.master_seed, options);
        done[task] = 1;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        abort = true;
      }
    }
  };

  const unsigned workers = std::max(1u, threads);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  GridResult result;
  result.records.reserve(total);
  for (std::size_t i = 0; i < total; ++i)
    if (done[i]) result.records.push_back(std::move(slots[i]));
  result.summary = summarize(result.records, cfg.base_params());

  if (write) write_outputs(cfg, result.records, result.summary);
  if (failure) std::rethrow_exception(failure);
  return result;
}

void write_records_csv(std::ostream& out, const std::vector<RepRecord>& records) {
  out << kRecordsHeader << '\n';
  const auto f = [](double v) { return format_double(v); };
  for (const RepRecord& r : records) {
    const std::string prefix = std::to_string(r.n) + ',' + std::to_string(r.d) + ',' +
                               f(r.alpha) + ',' + f(r.rho) + ',' + std::to_string(r.rep) + ',';
    const std::string tail = f(r.lambda_x1_scaled) + ',' + f(r.lambda_xy2_over_d) + ',' +
                             f(r.oracle_rho1) + ',' + r.status + '\n';
    if (r.components.empty()) {
      out << prefix << "0,nan,nan,nan,nan,nan,nan,nan," << tail;
      continue;
    }
    for (std::size_t i = 0; i < r.components.size(); ++i) {
      const ComponentMetrics& c = r.components[i];
      out << prefix << (i + 1) << ',' << f(c.rho_hat) << ',' << f(c.inner_x) << ','
          << f(c.abs_inner_x) << ',' << f(c.angle_x_deg) << ',' << f(c.inner_y) << ','
          << f(c.abs_inner_y) << ',' << f(c.angle_y_deg) << ',' << tail;
    }
  }
}

std::string summary_json(const std::vector<CellSummary>& summary) {
  Json cells = Json::array();
  for (const CellSummary& cs : summary) {
    Json cell;
    cell["n"] = cs.n;
    cell["d"] = cs.d;
    cell["alpha"] = cs.alpha;
    cell["rho"] = cs.rho;
    cell["reps"] = cs.reps;
    cell["failed"] = cs.failed;
    Json comps = Json::array();
    for (const ComponentSummary& c : cs.components) {
      comps.push_back(Json{{"component", c.component},
                           {"rho_hat", to_json(c.rho_hat)},
                           {"inner_x", to_json(c.inner_x)},
                           {"abs_inner_x", to_json(c.abs_inner_x)},
                           {"angle_x_deg", to_json(c.angle_x_deg)},
                           {"abs_inner_y", to_json(c.abs_inner_y)},
                           {"predicted_abs_inner_x", c.predicted_abs_inner_x},
                           {"predicted_rho", c.predicted_rho}});
    }
    cell["components"] = std::move(comps);
    cell["lambda_x1_scaled"] = to_json(cs.lambda_x1_scaled);
    cell["lambda_x2_scaled"] = to_json(cs.lambda_x2_scaled);
    cell["lambda_xy2_over_d"] = to_json(cs.lambda_xy2_over_d);
    cell["oracle_rho1"] = to_json(cs.oracle_rho1);
    cell["oracle_gap_rho1"] = to_json(cs.oracle_gap);
    cell["predicted"] = cs.prediction ? to_json(*cs.prediction) : Json(nullptr);
    cells.push_back(std::move(cell));
  }
  return cells.dump(2) + '\n';
}

std::string metadata_json(const GridConfig& cfg) {
  Json j;
  j["n_values"] = cfg.n_values;
  j["d_values"] = cfg.d_values;
  j["alpha_values"] = cfg.alpha_values;
  j["rho"] = cfg.rho;
  j["theta_x"] = cfg.theta_x;
  j["theta_y"] = cfg.theta_y;
  j["sigma2_x"] = cfg.sigma2_x;
  j["sigma2_y"] = cfg.sigma2_y;
  j["tau2_x"] = cfg.tau2_x;
  j["tau2_y"] = cfg.tau2_y;
  j["reps"] = cfg.reps;
  j["k"] = cfg.k;
  j["master_seed"] = cfg.master_seed;
  j["center"] = cfg.center;
  j["rank_tol"] = cfg.rank_tol;
  return j.dump(2) + '\n';
}

std::string prediction_json(const LimitPrediction& p,
                            const std::optional<Theorem1Constants>& c) {
  Json j = to_json(p);
  if (c) {
    j["theorem1"] = Json{{"c1", c->c1}, {"c2", c->c2}, {"a1", c->a1}, {"a2", c->a2},
                         {"b1", c->b1}, {"b2", c->b2},
                         {"m1_coef_z1", c->m1_coef_z1}, {"m1_coef_z2", c->m1_coef_z2},
                         {"m2_coef_z1", c->m2_coef_z1}, {"m2_coef_z2", c->m2_coef_z2}};
  }
  return j.dump(2) + '\n';
}

}  // namespace hdcca
