#include "vts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vts/error.hpp"
#include "vts/io.hpp"

namespace vts {

using nlohmann::json;

std::vector<double> decades(int first, int last) {
  std::vector<double> grid;
  for (int d = first; d <= last; ++d) grid.push_back(std::pow(10.0, -d));
  return grid;
}

namespace {

void check_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) {
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " grid values must be positive");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, std::string(name) + " grid must be strictly decreasing");
    }
  }
}

// sigma = 10^-d for integer d >= 0.
int sigma_digits(double sigma) {
  const double d = -std::log10(sigma);
  const double rounded = std::round(d);
  if (rounded < 0.0 || std::abs(d - rounded) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "sigma grid values must be 10^-d with integer d >= 0");
  }
  return static_cast<int>(rounded);
}

// Runs body(i) for i in [0, count) on `workers` threads. Each index writes
// only its own output slot, so results do not depend on scheduling.
void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

RunCell cell_from(const OptimizationTrace& trace, double grid_value, StopReason reason, StopReason wanted) {
  RunCell cell;
  cell.seed = trace.seed;
  cell.grid_value = grid_value;
  cell.n_it = trace.iterations();
  cell.loss_final = trace.final_loss();
  cell.match_error = trace.final_match_error();
  cell.stop_reason = to_string(reason);
  cell.ok = reason == wanted;
  return cell;
}

RunCell failed_cell(std::uint64_t seed, double grid_value, const Error& e) {
  RunCell cell;
  cell.seed = seed;
  cell.grid_value = grid_value;
  cell.loss_final = std::numeric_limits<double>::quiet_NaN();
  cell.match_error = std::numeric_limits<double>::quiet_NaN();
  cell.stop_reason = std::string("error:") + std::string(to_string(e.code()));
  return cell;
}

std::vector<RunCell> scaling_instance(const ExperimentSpec& spec, const OptimizerConfig& base, std::uint64_t seed) {
  std::vector<RunCell> cells;
  std::optional<ProblemInstance> instance;
  try {
    instance = random_instance(seed, spec.N, spec.min_modulus, spec.kind);
  } catch (const Error& e) {
    for (double eps : spec.epsilon_grid) cells.push_back(failed_cell(seed, eps, e));
    return cells;
  }
  OptimizerConfig config = base;
  config.seed = seed;
  if (spec.cold_start) {
    for (double eps : spec.epsilon_grid) {
      config.epsilon = eps;
      try {
        Optimizer optimizer(*instance, config);
        const StopReason reason = optimizer.advance(eps);
        cells.push_back(cell_from(optimizer.trace(), eps, reason, StopReason::Converged));
      } catch (const Error& e) {
        cells.push_back(failed_cell(seed, eps, e));
      }
    }
    return cells;
  }
  try {
    config.epsilon = spec.epsilon_grid.front();
    Optimizer optimizer(*instance, config);
    for (double eps : spec.epsilon_grid) {
      const StopReason reason = optimizer.advance(eps);
      cells.push_back(cell_from(optimizer.trace(), eps, reason, StopReason::Converged));
    }
  } catch (const Error& e) {
    for (std::size_t k = cells.size(); k < spec.epsilon_grid.size(); ++k) {
      cells.push_back(failed_cell(seed, spec.epsilon_grid[k], e));
    }
  }
  return cells;
}

std::vector<RunCell> sigma_instance(const ExperimentSpec& spec, const OptimizerConfig& base, std::uint64_t seed) {
  std::vector<RunCell> cells;
  std::optional<ProblemInstance> instance;
  try {
    instance = random_instance(seed, spec.N, spec.min_modulus, spec.kind);
  } catch (const Error& e) {
    for (double sigma : spec.sigma_grid) cells.push_back(failed_cell(seed, sigma, e));
    return cells;
  }
  OptimizerConfig config = base;
  config.seed = seed;
  config.stop_mode = StopMode::ConvergenceStall;
  for (double sigma : spec.sigma_grid) {
    config.quantization = QuantizationSpec{sigma_digits(sigma)};
    try {
      Optimizer optimizer(*instance, config);
      const StopReason reason = optimizer.advance();
      cells.push_back(cell_from(optimizer.trace(), sigma, reason, StopReason::Stalled));
    } catch (const Error& e) {
      cells.push_back(failed_cell(seed, sigma, e));
    }
  }
  return cells;
}

SweepResult run_sweep(const ExperimentSpec& spec, SweepKind sweep) {
  spec.validate();
  const OptimizerConfig base = experiment_config(spec);
  std::vector<std::vector<RunCell>> per_instance(static_cast<std::size_t>(spec.instance_count));
  parallel_for(spec.instance_count, worker_count(spec.threads), [&](int i) {
    const std::uint64_t seed = spec.seed_base + static_cast<std::uint64_t>(i);
    per_instance[static_cast<std::size_t>(i)] =
        sweep == SweepKind::Epsilon ? scaling_instance(spec, base, seed) : sigma_instance(spec, base, seed);
  });

  SweepResult result;
  result.sweep = sweep;
  result.kind = spec.kind;
  result.grid = sweep == SweepKind::Epsilon ? spec.epsilon_grid : spec.sigma_grid;
  result.fit_window = sweep == SweepKind::Epsilon ? kEpsilonFitWindow : kSigmaFitWindow;
  result.rule_exclusive = spec.rule_exclusive;
  result.cold_start = spec.cold_start;
  for (auto& cells : per_instance) {
    for (RunCell& cell : cells) result.rows.push_back(std::move(cell));
  }
  compute_fits(result);
  return result;
}

FitRecord fit_points(const std::vector<double>& x, const std::vector<double>& y) {
  FitRecord record;
  record.points = static_cast<int>(x.size());
  try {
    record.fit = fit_line(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())),
                          Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())));
  } catch (const Error& e) {
    record.error = std::string(to_string(e.code()));
  }
  return record;
}

// Window membership with a relative tolerance so 1e-3 from a computed grid
// still counts as <= 1e-3.
bool in_window(double value, double window) { return value <= window * (1.0 + 1e-9); }

}  // namespace

void ExperimentSpec::validate() const {
  if (instance_count < 1) throw Error(ErrorCode::InvalidArgument, "instance_count must be >= 1");
  if (log2_dim(N) < 1) throw Error(ErrorCode::InvalidArgument, "N must be a power of two >= 2");
  if (M < 1) throw Error(ErrorCode::InvalidArgument, "M must be >= 1");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  check_grid(epsilon_grid, "epsilon");
  check_grid(sigma_grid, "sigma");
  for (double sigma : sigma_grid) sigma_digits(sigma);
}

int worker_count(int hint) {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("VTS_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value >= 1) cap = static_cast<int>(value);
  }
  return hint > 0 ? std::min(hint, cap) : cap;
}

OptimizerConfig experiment_config(const ExperimentSpec& spec) {
  OptimizerConfig config;
  config.M = spec.M;
  config.evaluator = spec.evaluator;
  config.rule_exclusive = spec.rule_exclusive;
  config.max_iterations = spec.max_iterations;
  return config;
}

Aggregate aggregate(const std::vector<LineFit>& fits) {
  Aggregate agg;
  agg.count = static_cast<int>(fits.size());
  if (fits.empty()) return agg;
  for (const LineFit& f : fits) {
    agg.kappa += f.slope;
    agg.intercept += f.intercept;
  }
  agg.kappa /= agg.count;
  agg.intercept /= agg.count;
  for (const LineFit& f : fits) {
    agg.delta_kappa += (f.slope - agg.kappa) * (f.slope - agg.kappa);
    agg.delta_intercept += (f.intercept - agg.intercept) * (f.intercept - agg.intercept);
  }
  agg.delta_kappa = std::sqrt(agg.delta_kappa / agg.count);
  agg.delta_intercept = std::sqrt(agg.delta_intercept / agg.count);
  return agg;
}

void compute_fits(SweepResult& result) {
  result.fits.clear();
  result.missing = 0;
  std::map<std::uint64_t, std::vector<const RunCell*>> by_seed;
  std::vector<std::uint64_t> order;
  for (const RunCell& cell : result.rows) {
    if (!cell.ok) ++result.missing;
    auto [it, inserted] = by_seed.try_emplace(cell.seed);
    if (inserted) order.push_back(cell.seed);
    it->second.push_back(&cell);
  }

  std::vector<LineFit> iteration_fits, loss_fits, accuracy_fits;
  for (std::uint64_t seed : order) {
    std::vector<double> neg_log_x, log_x_loss, log_loss, log_x_acc, log_acc, n_it;
    for (const RunCell* cell : by_seed[seed]) {
      if (!cell->ok || !in_window(cell->grid_value, result.fit_window)) continue;
      const double lx = std::log10(cell->grid_value);
      neg_log_x.push_back(-lx);
      n_it.push_back(static_cast<double>(cell->n_it));
      if (cell->loss_final > 0.0) {
        log_x_loss.push_back(lx);
        log_loss.push_back(std::log10(cell->loss_final));
      }
      if (cell->match_error > 0.0) {
        log_x_acc.push_back(lx);
        log_acc.push_back(std::log10(cell->match_error));
      }
    }
    InstanceFits fits;
    fits.seed = seed;
    fits.iterations = fit_points(neg_log_x, n_it);
    fits.loss = fit_points(log_x_loss, log_loss);
    if (fits.iterations.fit) iteration_fits.push_back(*fits.iterations.fit);
    if (fits.loss.fit) loss_fits.push_back(*fits.loss.fit);
    if (result.sweep == SweepKind::Sigma) {
      fits.accuracy = fit_points(log_x_acc, log_acc);
      if (fits.accuracy.fit) accuracy_fits.push_back(*fits.accuracy.fit);
    }
    result.fits.push_back(std::move(fits));
  }
  result.iterations = aggregate(iteration_fits);
  result.loss = aggregate(loss_fits);
  result.accuracy = aggregate(accuracy_fits);
}

ScalingResult scaling_experiment(const ExperimentSpec& spec) { return run_sweep(spec, SweepKind::Epsilon); }

SigmaResult sigma_experiment(const ExperimentSpec& spec) { return run_sweep(spec, SweepKind::Sigma); }

bool TheoryReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoryCheck& c) { return c.pass; });
}

TheoryReport theory_checks(const ScalingResult& scaling, const SigmaResult& sigma, const TheoryBands& bands) {
  TheoryReport report;
  auto check = [&](const std::string& name, const Aggregate& agg, double lo, double hi) {
    report.checks.push_back({name, agg.kappa, lo, hi, agg.count > 0 && agg.kappa >= lo && agg.kappa <= hi});
  };
  check("kappa_L_eps", scaling.loss, bands.loss_eps_lo, bands.loss_eps_hi);
  check("kappa_L_sigma", sigma.loss, bands.loss_sigma_lo, bands.loss_sigma_hi);
  check("kappa_lambda_sigma", sigma.accuracy, bands.accuracy_lo, bands.accuracy_hi);

  auto flag = [&](const char* name, const FitRecord& rec, std::uint64_t seed, double lo, double hi) {
    if (rec.fit && (rec.fit->slope < lo || rec.fit->slope > hi)) {
      report.flagged.push_back(std::string(name) + ":" + std::to_string(seed));
    }
  };
  for (const InstanceFits& f : scaling.fits) flag("kappa_L_eps", f.loss, f.seed, bands.loss_eps_lo, bands.loss_eps_hi);
  for (const InstanceFits& f : sigma.fits) {
    flag("kappa_L_sigma", f.loss, f.seed, bands.loss_sigma_lo, bands.loss_sigma_hi);
    flag("kappa_lambda_sigma", f.accuracy, f.seed, bands.accuracy_lo, bands.accuracy_hi);
  }

  auto constant = [](const Aggregate& agg) {
    return agg.count > 0 && agg.kappa != 0.0 ? std::pow(10.0, -agg.intercept / agg.kappa) : 0.0;
  };
  report.loss_constant_eps = constant(scaling.loss);
  report.loss_constant_sigma = constant(sigma.loss);
  report.accuracy_constant = constant(sigma.accuracy);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf/nan; store them as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw Error(ErrorCode::ParseFailure, "bad number '" + s + "'");
}

json fit_json(const FitRecord& rec) {
  json out = {{"points", rec.points}};
  if (rec.fit) {
    out["slope"] = number(rec.fit->slope);
    out["intercept"] = number(rec.fit->intercept);
    out["residual"] = number(rec.fit->residual);
  } else {
    out["error"] = rec.error;
  }
  return out;
}

FitRecord fit_from(const json& j) {
  FitRecord rec;
  rec.points = j.at("points").get<int>();
  if (j.contains("slope")) {
    rec.fit = LineFit{number(j.at("slope")), number(j.at("intercept")), number(j.at("residual"))};
  } else {
    rec.error = j.value("error", "");
  }
  return rec;
}

json aggregate_json(const Aggregate& agg) {
  return {{"kappa", number(agg.kappa)},
          {"intercept", number(agg.intercept)},
          {"delta_kappa", number(agg.delta_kappa)},
          {"delta_intercept", number(agg.delta_intercept)},
          {"count", agg.count}};
}

Aggregate aggregate_from(const json& j) {
  return {number(j.at("kappa")), number(j.at("intercept")), number(j.at("delta_kappa")),
          number(j.at("delta_intercept")), j.at("count").get<int>()};
}

const char* sweep_name(SweepKind sweep) { return sweep == SweepKind::Epsilon ? "epsilon" : "sigma"; }

}  // namespace

std::string results_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "seed,kind,eps_or_sigma,n_it,loss_final,match_error,stop_reason\n";
  for (const RunCell& cell : result.rows) {
    out << cell.seed << ',' << to_string(result.kind) << ',' << fmt(cell.grid_value) << ',' << cell.n_it << ','
        << fmt(cell.loss_final) << ',' << fmt(cell.match_error) << ',' << cell.stop_reason << '\n';
  }
  return out.str();
}

std::string results_json(const SweepResult& result) {
  json rows = json::array();
  for (const RunCell& cell : result.rows) {
    rows.push_back({{"seed", cell.seed},
                    {"eps_or_sigma", number(cell.grid_value)},
                    {"n_it", cell.n_it},
                    {"loss_final", number(cell.loss_final)},
                    {"match_error", number(cell.match_error)},
                    {"stop_reason", cell.stop_reason},
                    {"ok", cell.ok}});
  }
  json fits = json::array();
  for (const InstanceFits& f : result.fits) {
    json entry = {{"seed", f.seed}, {"iterations", fit_json(f.iterations)}, {"loss", fit_json(f.loss)}};
    if (result.sweep == SweepKind::Sigma) entry["accuracy"] = fit_json(f.accuracy);
    fits.push_back(std::move(entry));
  }
  json grid = json::array();
  for (double g : result.grid) grid.push_back(number(g));
  json out = {{"sweep", sweep_name(result.sweep)},
              {"kind", to_string(result.kind)},
              {"grid", grid},
              {"fit_window", number(result.fit_window)},
              {"rule", result.rule_exclusive ? "exclusive" : "literal"},
              {"cold_start", result.cold_start},
              {"missing", result.missing},
              {"aggregates",
               {{"iterations", aggregate_json(result.iterations)},
                {"loss", aggregate_json(result.loss)},
                {"accuracy", aggregate_json(result.accuracy)}}},
              {"fits", fits},
              {"rows", rows}};
  return out.dump(2) + "\n";
}

SweepResult parse_results_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, e.what());
  }
  try {
    SweepResult result;
    const std::string sweep = doc.at("sweep").get<std::string>();
    if (sweep != "epsilon" && sweep != "sigma") throw Error(ErrorCode::ParseFailure, "unknown sweep '" + sweep + "'");
    result.sweep = sweep == "epsilon" ? SweepKind::Epsilon : SweepKind::Sigma;
    result.kind = parse_kind(doc.at("kind").get<std::string>());
    for (const json& g : doc.at("grid")) result.grid.push_back(number(g));
    result.fit_window = number(doc.at("fit_window"));
    result.rule_exclusive = doc.at("rule").get<std::string>() == "exclusive";
    result.cold_start = doc.at("cold_start").get<bool>();
    result.missing = doc.at("missing").get<int>();
    const json& agg = doc.at("aggregates");
    result.iterations = aggregate_from(agg.at("iterations"));
    result.loss = aggregate_from(agg.at("loss"));
    result.accuracy = aggregate_from(agg.at("accuracy"));
    for (const json& f : doc.at("fits")) {
      InstanceFits fits;
      fits.seed = f.at("seed").get<std::uint64_t>();
      fits.iterations = fit_from(f.at("iterations"));
      fits.loss = fit_from(f.at("loss"));
      if (f.contains("accuracy")) fits.accuracy = fit_from(f.at("accuracy"));
      result.fits.push_back(std::move(fits));
    }
    for (const json& r : doc.at("rows")) {
      RunCell cell;
      cell.seed = r.at("seed").get<std::uint64_t>();
      cell.grid_value = number(r.at("eps_or_sigma"));
      cell.n_it = r.at("n_it").get<long>();
      cell.loss_final = number(r.at("loss_final"));
      cell.match_error = number(r.at("match_error"));
      cell.stop_reason = r.at("stop_reason").get<std::string>();
      cell.ok = r.at("ok").get<bool>();
      result.rows.push_back(std::move(cell));
    }
    return result;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, e.what());
  }
}

void emit_results(const SweepResult& result, const std::filesystem::path& path, ResultFormat format) {
  write_text(path, format == ResultFormat::CSV ? results_csv(result) : results_json(result));
}

SweepResult load_results(const std::filesystem::path& path) { return parse_results_json(read_text(path)); }

std::string plot_series_csv(const std::vector<SweepResult>& results) {
  std::ostringstream out;
  out << "series,kind,seed,x,y\n";
  for (const SweepResult& result : results) {
    const std::string tag = result.sweep == SweepKind::Epsilon ? "eps" : "sigma";
    const char* kind = to_string(result.kind);
    struct Series {
      std::string name;
      std::function<std::optional<std::pair<double, double>>(const RunCell&)> point;
    };
    std::vector<Series> series{
        {"n_it_vs_neg_log_" + tag,
         [](const RunCell& c) -> std::optional<std::pair<double, double>> {
           return std::pair{-std::log10(c.grid_value), static_cast<double>(c.n_it)};
         }},
        {"log_loss_vs_log_" + tag, [](const RunCell& c) -> std::optional<std::pair<double, double>> {
           if (!(c.loss_final > 0.0)) return std::nullopt;
           return std::pair{std::log10(c.grid_value), std::log10(c.loss_final)};
         }}};
    if (result.sweep == SweepKind::Sigma) {
      series.push_back({"log_eps_min_vs_log_sigma", [](const RunCell& c) -> std::optional<std::pair<double, double>> {
                          if (!(c.match_error > 0.0)) return std::nullopt;
                          return std::pair{std::log10(c.grid_value), std::log10(c.match_error)};
                        }});
    }
    for (const Series& s : series) {
      std::map<double, std::pair<double, int>> sums;  // x -> (sum y, count)
      for (const RunCell& cell : result.rows) {
        if (!cell.ok) continue;
        const auto p = s.point(cell);
        if (!p) continue;
        out << s.name << ',' << kind << ',' << cell.seed << ',' << fmt(p->first) << ',' << fmt(p->second) << '\n';
        auto& acc = sums[p->first];
        acc.first += p->second;
        ++acc.second;
      }
      for (const auto& [x, acc] : sums) {
        out << s.name << ',' << kind << ",mean," << fmt(x) << ',' << fmt(acc.first / acc.second) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace vts
