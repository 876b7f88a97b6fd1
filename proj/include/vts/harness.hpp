#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vts/loss.hpp"
#include "vts/numerics.hpp"
#include "vts/optimizer.hpp"

namespace vts {

std::vector<double> decades(int first, int last);  // 10^-first .. 10^-last

struct ExperimentSpec {
  ProblemKind kind = ProblemKind::GEV;
  int instance_count = 20;
  std::uint64_t seed_base = 1;
  Eigen::Index N = 4;
  int M = 10;
  std::vector<double> epsilon_grid = decades(1, 7);
  std::vector<double> sigma_grid = decades(1, 8);
  EvaluatorSpec evaluator;
  int threads = 0;  // 0: VTS_THREADS or all cores
  double min_modulus = 0.1;
  bool cold_start = false;
  bool rule_exclusive = false;
  long max_iterations = 200000;

  void validate() const;
};

/// Worker count: `hint` (if positive) capped by VTS_THREADS, which itself
/// defaults to the number of available cores.
int worker_count(int hint = 0);

enum class SweepKind { Epsilon, Sigma };

/// One (instance, grid point) outcome. `ok` is false for missing cells.
struct RunCell {
  std::uint64_t seed = 0;
  double grid_value = 0.0;
  long n_it = 0;
  double loss_final = 0.0;
  double match_error = 0.0;
  std::string stop_reason;
  bool ok = false;
};

struct FitRecord {
  std::optional<LineFit> fit;
  int points = 0;
  std::string error;  // set when the fit was rejected
};

struct InstanceFits {
  std::uint64_t seed = 0;
  FitRecord iterations;  // N_it against -log x
  FitRecord loss;        // log eps_L against log x
  FitRecord accuracy;    // log eps_min against log sigma (sigma sweeps only)
};

/// Mean and root-mean-square deviation of per-instance slopes and intercepts.
struct Aggregate {
  double kappa = 0.0;
  double intercept = 0.0;
  double delta_kappa = 0.0;
  double delta_intercept = 0.0;
  int count = 0;
};

Aggregate aggregate(const std::vector<LineFit>& fits);

struct SweepResult {
  SweepKind sweep = SweepKind::Epsilon;
  ProblemKind kind = ProblemKind::GEV;
  std::vector<double> grid;
  double fit_window = 0.0;  // grid values <= this enter the fits
  bool rule_exclusive = false;
  bool cold_start = false;
  std::vector<RunCell> rows;  // instance-major, grid order within an instance
  std::vector<InstanceFits> fits;
  Aggregate iterations;
  Aggregate loss;
  Aggregate accuracy;
  int missing = 0;
};

using ScalingResult = SweepResult;
using SigmaResult = SweepResult;

inline constexpr double kEpsilonFitWindow = 1e-3;
inline constexpr double kSigmaFitWindow = 1e-6;

/// Per-instance fits and aggregates from raw rows; used by both sweeps and
/// by the loader so emitted files reproduce the in-memory numbers.
void compute_fits(SweepResult& result);

/// Optimizer settings shared by every run of an experiment.
OptimizerConfig experiment_config(const ExperimentSpec& spec);

ScalingResult scaling_experiment(const ExperimentSpec& spec);
SigmaResult sigma_experiment(const ExperimentSpec& spec);

struct TheoryBands {
  double loss_eps_lo = 1.75, loss_eps_hi = 2.25;
  double loss_sigma_lo = 1.6, loss_sigma_hi = 2.45;
  double accuracy_lo = 0.8, accuracy_hi = 1.25;
};

struct TheoryCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

struct TheoryReport {
  std::vector<TheoryCheck> checks;
  std::vector<std::string> flagged;  // "<check>:<seed>" for per-instance slopes outside the band
  double loss_constant_eps = 0.0;    // 10^(-C/kappa) of the eps-sweep loss fit
  double loss_constant_sigma = 0.0;
  double accuracy_constant = 0.0;
  bool all_pass() const;
};

TheoryReport theory_checks(const ScalingResult& scaling, const SigmaResult& sigma, const TheoryBands& bands = {});

enum class ResultFormat { CSV, JSON };

std::string results_csv(const SweepResult& result);
std::string results_json(const SweepResult& result);
SweepResult parse_results_json(const std::string& text);
void emit_results(const SweepResult& result, const std::filesystem::path& path, ResultFormat format);
SweepResult load_results(const std::filesystem::path& path);

/// x/y series for the figure analogues: series,seed,x,y rows. Seed "mean"
/// rows average the valid cells at one grid point.
std::string plot_series_csv(const std::vector<SweepResult>& results);

}  // namespace vts
