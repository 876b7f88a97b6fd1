// Command-line front end: solve, oracle, experiment, compile, plotdata.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vts/circuit.hpp"
#include "vts/error.hpp"
#include "vts/harness.hpp"
#include "vts/io.hpp"
#include "vts/optimizer.hpp"

namespace fs = std::filesystem;
using namespace vts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure: return kExitIo;
    case ErrorCode::NoConvergence:
    case ErrorCode::MaxIterationsExceeded:
    case ErrorCode::NoSuccessfulShots: return kExitConvergence;
    default: return kExitValidation;
  }
}

nlohmann::json spectrum_json(const Spectrum& s) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    switch (s.slots[static_cast<std::size_t>(k)]) {
      case SlotState::Finite: out.push_back({{"re", s.values(k).real()}, {"im", s.values(k).imag()}}); break;
      case SlotState::Indeterminate: out.push_back({{"slot", "indeterminate"}}); break;
      case SlotState::Infinite: out.push_back({{"slot", "infinite"}}); break;
    }
  }
  return out;
}

ProblemInstance load_instance(const std::string& path, const std::string& kind_override) {
  const MatrixFile file = read_matrix_file(path);
  ProblemKind kind = file.kind;
  if (!kind_override.empty()) kind = parse_kind(kind_override);
  std::optional<ComplexMatrix> b = file.b;
  // An EV request on a file that carries B ignores B; a GEV request without B is an error.
  if (kind == ProblemKind::EV) b.reset();
  return make_instance(kind, file.a, b);
}

struct SolveArgs {
  std::string input, kind, evaluator = "matrix", trace, summary, checkpoint, resume;
  double eps = 1e-4;
  int M = 10;
  std::uint64_t seed = 0;
  long max_iterations = 200000;
  bool rule_exclusive = false;
};

int cmd_solve(const SolveArgs& args) {
  const ProblemInstance instance = load_instance(args.input, args.kind);
  OptimizerConfig config;
  config.epsilon = args.eps;
  config.M = args.M;
  config.seed = args.seed;
  config.evaluator = EvaluatorSpec::parse(args.evaluator);
  config.max_iterations = args.max_iterations;
  config.rule_exclusive = args.rule_exclusive;
  std::optional<ParameterVector> start;
  if (!args.resume.empty()) start = parse_checkpoint_json(read_text(args.resume));

  const OptimizationTrace trace = run(instance, config, start);
  if (!args.trace.empty()) write_text(args.trace, trace_csv(trace));
  if (!args.checkpoint.empty()) write_text(args.checkpoint, checkpoint_json(trace.final_params));
  const std::string summary = trace_summary_json(trace, config);
  if (!args.summary.empty()) write_text(args.summary, summary + "\n");
  std::cout << summary << "\n";
  return trace.stop_reason == StopReason::Converged ? kExitOk : kExitConvergence;
}

int cmd_oracle(const std::string& input, const std::string& kind) {
  const ProblemInstance instance = load_instance(input, kind);
  const nlohmann::json out = {{"kind", to_string(instance.kind)}, {"eigenvalues", spectrum_json(oracle_spectrum(instance))}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string kind = "gev", out = ".", evaluator = "matrix";
  int instances = 20;
  std::uint64_t seed_base = 1;
  bool full = false, cold_start = false, rule_exclusive = false;
  int threads = 0, M = 10;
  long max_iterations = 200000;
  int first_decade = 1, last_decade = 0;
};

int cmd_experiment(const ExperimentArgs& args, SweepKind sweep) {
  ExperimentSpec spec;
  spec.kind = parse_kind(args.kind);
  spec.instance_count = args.full ? 100 : args.instances;
  spec.seed_base = args.seed_base;
  spec.M = args.M;
  spec.evaluator = EvaluatorSpec::parse(args.evaluator);
  spec.threads = args.threads;
  spec.cold_start = args.cold_start;
  spec.rule_exclusive = args.rule_exclusive;
  spec.max_iterations = args.max_iterations;
  const int last = args.last_decade > 0 ? args.last_decade : (sweep == SweepKind::Epsilon ? 7 : 8);
  if (sweep == SweepKind::Epsilon) {
    spec.epsilon_grid = decades(args.first_decade, last);
  } else {
    spec.sigma_grid = decades(args.first_decade, last);
  }

  fs::create_directories(args.out);
  const SweepResult result = sweep == SweepKind::Epsilon ? scaling_experiment(spec) : sigma_experiment(spec);
  const std::string stem = std::string(sweep == SweepKind::Epsilon ? "scaling_" : "sigma_") + args.kind;
  emit_results(result, fs::path(args.out) / (stem + ".csv"), ResultFormat::CSV);
  emit_results(result, fs::path(args.out) / (stem + ".json"), ResultFormat::JSON);

  std::printf("%s rule=%s instances=%d missing=%d\n", stem.c_str(), args.rule_exclusive ? "exclusive" : "literal",
              spec.instance_count, result.missing);
  auto line = [](const char* name, const Aggregate& agg) {
    if (agg.count == 0) return;
    std::printf("  %-10s kappa=%.4f +- %.4f  C=%.4f +- %.4f  (%d fits)\n", name, agg.kappa, agg.delta_kappa,
                agg.intercept, agg.delta_intercept, agg.count);
  };
  line("N_it", result.iterations);
  line("log L", result.loss);
  if (sweep == SweepKind::Sigma) line("log eps", result.accuracy);
  return kExitOk;
}

int cmd_compile(int n, int M, const std::string& kind, const std::string& out, const std::string& params_path,
                bool counts) {
  ParameterVector params = ParameterVector::zeros(parse_kind(kind), n, M);
  if (!params_path.empty()) {
    params = parse_checkpoint_json(read_text(params_path));
    if (params.n != n || params.M != M || params.kind != parse_kind(kind)) {
      throw Error(ErrorCode::LayoutMismatch, "checkpoint does not match --n/--M/--kind");
    }
  }
  const GateProgram program = compile_program(params, RegisterLayout{n});
  const std::string text = export_program(program);
  if (!out.empty()) {
    write_text(out, text);
  } else if (!counts) {
    std::cout << text;
  }
  if (counts) {
    const DepthReport report = depth_and_counts(program);
    std::printf("%-8s %6s %6s %6s %6s %6s %6s %6s %6s %8s\n", "stage", "depth", "H", "Rz", "Ry", "X", "CX", "CCX",
                "MCX", "toffoli");
    auto row = [](const std::string& label, const GateCounts& c) {
      auto get = [&](const char* key) {
        const auto it = c.counts.find(key);
        return it == c.counts.end() ? 0 : it->second;
      };
      std::printf("%-8s %6d %6d %6d %6d %6d %6d %6d %6d %8ld\n", label.c_str(), c.depth, get("H"), get("Rz"),
                  get("Ry"), get("X"), get("CX"), get("CCX"), get("MCX"), c.toffoli_equivalent);
    };
    for (const auto& [label, c] : report.stages) row(label, c);
    row("total", report.program);
  }
  return kExitOk;
}

int cmd_plotdata(const std::string& in, const std::string& out) {
  std::vector<fs::path> files;
  if (fs::is_directory(in)) {
    for (const auto& entry : fs::directory_iterator(in)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
  } else if (fs::exists(in)) {
    files.push_back(in);
  } else {
    throw Error(ErrorCode::IoFailure, in + " does not exist");
  }
  std::sort(files.begin(), files.end());
  std::vector<SweepResult> results;
  for (const fs::path& f : files) {
    try {
      results.push_back(load_results(f));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseFailure) throw;
      std::fprintf(stderr, "skipping %s: %s\n", f.string().c_str(), e.what());
    }
  }
  if (results.empty()) throw Error(ErrorCode::IoFailure, "no result files in " + in);
  write_text(out, plot_series_csv(results));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational triangularization eigensolver"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one eigenvalue problem from a matrix file");
  solve_cmd->add_option("--input", solve.input, "Matrix JSON")->required();
  solve_cmd->add_option("--kind", solve.kind, "gev or ev (defaults to the file's kind)");
  solve_cmd->add_option("--eps", solve.eps, "Target accuracy against the oracle");
  solve_cmd->add_option("--evaluator", solve.evaluator, "matrix, circuit or shots:N");
  solve_cmd->add_option("--M", solve.M, "Ansatz blocks");
  solve_cmd->add_option("--seed", solve.seed, "Seed for shot sampling");
  solve_cmd->add_option("--max-iterations", solve.max_iterations);
  solve_cmd->add_option("--trace", solve.trace, "Per-iteration CSV output");
  solve_cmd->add_option("--summary", solve.summary, "Summary JSON output");
  solve_cmd->add_option("--checkpoint", solve.checkpoint, "Write final parameters");
  solve_cmd->add_option("--resume", solve.resume, "Start from a parameter checkpoint");
  solve_cmd->add_flag("--rule-exclusive", solve.rule_exclusive, "A loss increase only shrinks the step");

  std::string oracle_input, oracle_kind;
  auto* oracle_cmd = app.add_subcommand("oracle", "Print the classical spectrum");
  oracle_cmd->add_option("--input", oracle_input, "Matrix JSON")->required();
  oracle_cmd->add_option("--kind", oracle_kind);

  auto* experiment_cmd = app.add_subcommand("experiment", "Run an accuracy sweep");
  experiment_cmd->require_subcommand(1);
  ExperimentArgs scaling, sigma;
  auto add_experiment = [&](const char* name, const char* help, ExperimentArgs& a) {
    auto* cmd = experiment_cmd->add_subcommand(name, help);
    cmd->add_option("--kind", a.kind, "gev or ev");
    cmd->add_option("--instances", a.instances);
    cmd->add_option("--seed-base", a.seed_base);
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_flag("--full-100", a.full, "Use 100 instances");
    cmd->add_flag("--rule-exclusive", a.rule_exclusive);
    cmd->add_option("--evaluator", a.evaluator);
    cmd->add_option("--threads", a.threads, "Worker hint, capped by VTS_THREADS");
    cmd->add_option("--M", a.M);
    cmd->add_option("--max-iterations", a.max_iterations);
    cmd->add_option("--from", a.first_decade, "First grid point 10^-from");
    cmd->add_option("--to", a.last_decade, "Last grid point 10^-to");
    return cmd;
  };
  auto* scaling_cmd = add_experiment("scaling", "Accuracy sweep over eps", scaling);
  scaling_cmd->add_flag("--cold-start", scaling.cold_start, "Restart every grid point from zero");
  auto* sigma_cmd = add_experiment("sigma", "Quantization sweep over sigma", sigma);

  int compile_n = 2, compile_M = 10;
  std::string compile_kind = "gev", compile_out, compile_params;
  bool compile_counts = false;
  auto* compile_cmd = app.add_subcommand("compile", "Emit the gate program");
  compile_cmd->add_option("--n", compile_n, "Qubits per index register");
  compile_cmd->add_option("--M", compile_M);
  compile_cmd->add_option("--kind", compile_kind);
  compile_cmd->add_option("--out", compile_out);
  compile_cmd->add_option("--params", compile_params, "Parameter checkpoint (default zeros)");
  compile_cmd->add_flag("--counts", compile_counts, "Print the depth table");

  std::string plot_in, plot_out = "plots.csv";
  auto* plot_cmd = app.add_subcommand("plotdata", "Figure series from experiment results");
  plot_cmd->add_option("--in", plot_in, "Result JSON file or directory of them")->required();
  plot_cmd->add_option("--out", plot_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve);
    if (*oracle_cmd) return cmd_oracle(oracle_input, oracle_kind);
    if (*scaling_cmd) return cmd_experiment(scaling, SweepKind::Epsilon);
    if (*sigma_cmd) return cmd_experiment(sigma, SweepKind::Sigma);
    if (*compile_cmd) return cmd_compile(compile_n, compile_M, compile_kind, compile_out, compile_params, compile_counts);
    if (*plot_cmd) return cmd_plotdata(plot_in, plot_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: IoFailure: %s\n", e.what());
    return kExitIo;
  }
  return kExitValidation;
}
