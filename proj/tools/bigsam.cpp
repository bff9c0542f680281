// bigsam command-line front end.
//
//   bigsam solve      one run, trajectory CSV
//   bigsam benchmark  Monte-Carlo sweep over noise levels, gammas, replications
//   bigsam oracle     reference phi*, omega*, x_mn for one instance
//   bigsam generate   write a generated instance as MatrixMarket files
//   bigsam inspect    summary of a matrix file
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.

#include "bigsam/benchmark.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <functional>
#include <iostream>

using namespace bigsam;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

// Flags are collected as edits and applied on top of the TOML file.
struct Overrides {
  std::string config_path;
  std::vector<std::function<void(RunConfig&)>> edits;

  template <class T, class F>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help, F apply) {
    return app->add_option_function<T>(
        name, [this, apply](const T& v) { edits.push_back([apply, v](RunConfig& c) { apply(c, v); }); },
        help);
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    for (const auto& e : edits) e(cfg);
    cfg.validate();
    return cfg;
  }
};

void add_problem_flags(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_path, "TOML run configuration")->check(CLI::ExistingFile);
  o.add<std::string>(app, "--id", "problem id", [](RunConfig& c, const std::string& v) { c.problem.id = v; });
  o.add<long>(app, "--rows", "generated rows m", [](RunConfig& c, long v) { c.problem.rows = v; });
  o.add<long>(app, "--cols", "generated columns n", [](RunConfig& c, long v) { c.problem.cols = v; });
  o.add<long>(app, "--rank", "generated rank", [](RunConfig& c, long v) { c.problem.rank = v; });
  o.add<double>(app, "--sv-decay", "singular value ratio", [](RunConfig& c, double v) { c.problem.sv_decay = v; });
  o.add<std::uint64_t>(app, "--problem-seed", "generator seed",
                       [](RunConfig& c, std::uint64_t v) { c.problem.seed = v; });
  o.add<std::string>(app, "--matrix", "A from a .mtx or .csv file",
                     [](RunConfig& c, const std::string& v) { c.problem.matrix_path = v; });
  o.add<std::string>(app, "--rhs", "b from a .mtx or .csv file",
                     [](RunConfig& c, const std::string& v) { c.problem.rhs_path = v; });
}

void add_solver_flags(CLI::App* app, Overrides& o) {
  o.add<std::string>(app, "--solver", "bigsam or tikhonov",
                     [](RunConfig& c, const std::string& v) { c.solver = solver_kind_from_string(v); });
  o.add<double>(app, "-t,--step-inner", "inner step t (default 1/L_f)",
                [](RunConfig& c, double v) { c.step_inner = v; });
  o.add<double>(app, "-s,--step-outer", "outer step s (default 2/(L_w + sigma))",
                [](RunConfig& c, double v) { c.step_outer = v; });
  o.add<double>(app, "--lambda0", "Tikhonov schedule lambda_k = lambda0 / k",
                [](RunConfig& c, double v) { c.lambda0 = v; });
  o.add<double>(app, "--relative-gap", "stop when the relative feasibility gap drops below this",
                [](RunConfig& c, double v) { c.relative_gap = v; });
  o.add<long>(app, "--max-iterations", "iteration limit",
              [](RunConfig& c, long v) { c.max_iterations = v; });
  o.add<double>(app, "--time-limit", "wall-clock limit in seconds",
                [](RunConfig& c, double v) { c.time_limit_seconds = v; });
  o.add<long>(app, "--oracle-budget", "projected-gradient budget for large instances",
              [](RunConfig& c, long v) { c.reference_budget = v; });
}

LeastSquaresInstance noisy_instance(const RunConfig& cfg, int replication) {
  return add_noise(make_instance(cfg.problem), cfg.noise_levels.front(),
                   replication_seed(cfg.seed, replication));
}

OracleSolution oracle_for(const RunConfig& cfg, const LeastSquaresInstance& inst) {
  ReferenceOptions ro;
  ro.budget = cfg.reference_budget;
  ro.residual_target = cfg.reference_residual;
  return solve_reference(inst, default_outer(inst.A.cols()), ro, cfg.lower_bound_mu);
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BiG-SAM bi-level solver, oracle and benchmark harness"};
  app.require_subcommand(1);

  // solve
  Overrides solve_o;
  double solve_noise = 1e-2, solve_gamma = 1.0;
  int solve_rep = 0;
  std::string solve_out;
  long solve_every = 1;
  auto* solve = app.add_subcommand("solve", "run one solver on one instance");
  add_problem_flags(solve, solve_o);
  add_solver_flags(solve, solve_o);
  auto* solve_noise_opt = solve->add_option("--noise", solve_noise, "noise level rho");
  auto* solve_gamma_opt = solve->add_option("--gamma", solve_gamma, "gamma in (0, 1]");
  solve->add_option("--replication", solve_rep, "replication index selecting the noise seed");
  solve->add_option("-o,--output", solve_out, "trajectory CSV path");
  solve->add_option("--record-every", solve_every, "keep every m-th iteration in the CSV")
      ->check(CLI::PositiveNumber);

  // benchmark
  Overrides bench_o;
  auto* bench = app.add_subcommand("benchmark", "Monte-Carlo sweep; writes report.csv");
  add_problem_flags(bench, bench_o);
  add_solver_flags(bench, bench_o);
  bench_o.add<std::vector<double>>(bench, "--gamma", "gamma values",
                                   [](RunConfig& c, const std::vector<double>& v) { c.gammas = v; });
  bench_o.add<std::vector<double>>(bench, "--noise", "noise levels rho",
                                   [](RunConfig& c, const std::vector<double>& v) { c.noise_levels = v; });
  bench_o.add<int>(bench, "--replications", "replications per noise level",
                   [](RunConfig& c, int v) { c.replications = v; });
  bench_o.add<std::uint64_t>(bench, "--seed", "base noise seed",
                             [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  bench_o.add<int>(bench, "-j,--parallelism", "worker threads",
                   [](RunConfig& c, int v) { c.parallelism = v; });
  bench_o.add<std::string>(bench, "-o,--output-dir", "output directory",
                           [](RunConfig& c, const std::string& v) { c.output_dir = v; });
  bench_o.add<bool>(bench, "--trajectories", "also write one trajectory CSV per run",
                    [](RunConfig& c, bool v) { c.trajectories = v; });
  bench_o.add<long>(bench, "--record-every", "trajectory thinning",
                    [](RunConfig& c, long v) { c.record_every = v; });
  bool quiet = false;
  bench->add_flag("-q,--quiet", quiet, "no per-run progress lines");

  // oracle
  Overrides oracle_o;
  double oracle_noise = 1e-2;
  int oracle_rep = 0;
  auto* oracle = app.add_subcommand("oracle", "reference solution as JSON");
  add_problem_flags(oracle, oracle_o);
  auto* oracle_noise_opt = oracle->add_option("--noise", oracle_noise, "noise level rho");
  oracle->add_option("--replication", oracle_rep, "replication index selecting the noise seed");
  oracle_o.add<long>(oracle, "--oracle-budget", "projected-gradient budget for large instances",
                     [](RunConfig& c, long v) { c.reference_budget = v; });

  // generate
  Overrides gen_o;
  double gen_noise = 0.0;
  int gen_rep = 0;
  std::string gen_dir = ".";
  auto* gen = app.add_subcommand("generate", "write A.mtx, b.mtx and x_true.mtx");
  add_problem_flags(gen, gen_o);
  gen->add_option("--noise", gen_noise, "noise level rho (default 0)");
  gen->add_option("--replication", gen_rep, "replication index selecting the noise seed");
  gen->add_option("-o,--output-dir", gen_dir, "target directory");

  // inspect
  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "dimensions and singular values of a matrix file");
  inspect->add_option("matrix", inspect_path, "matrix file (.mtx, .mm, .csv, .txt)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*solve) {
      RunConfig cfg = solve_o.resolve();
      if (*solve_noise_opt) cfg.noise_levels = {solve_noise};
      if (*solve_gamma_opt) cfg.gammas = {solve_gamma};
      cfg.trajectories = !solve_out.empty();
      cfg.record_every = solve_every;
      cfg.validate();
      const LeastSquaresInstance inst = noisy_instance(cfg, solve_rep);
      const OracleSolution ref = oracle_for(cfg, inst);
      SingleRun run = run_single(inst, ref, cfg, cfg.gammas.front());
      if (!solve_out.empty()) write_trajectory_csv(solve_out, run.trajectory, ref.x_mn);
      json out{{"solver", to_string(cfg.solver)},
               {"iterations", run.row.iterations},
               {"termination", run.row.termination},
               {"rfg", run.row.rfg},
               {"rog", run.row.rog},
               {"rog_absolute", run.row.rog_absolute},
               {"elapsed_seconds", run.row.elapsed_seconds},
               {"beta", run.trajectory.beta},
               {"t", run.trajectory.step_inner},
               {"s", run.trajectory.step_outer},
               {"phi_star", ref.phi_star},
               {"omega_star", ref.omega_star},
               {"oracle", to_string(ref.method)},
               {"distance_to_x_mn", (run.trajectory.last().x - ref.x_mn).norm()}};
      std::cout << out.dump(2) << '\n';
    } else if (*bench) {
      RunConfig cfg = bench_o.resolve();
      if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
      std::error_code ec;
      std::filesystem::create_directories(cfg.output_dir, ec);
      if (ec) throw IoError(cfg.output_dir.string() + ": " + ec.message());
      auto progress = [quiet](const RunRow& r) {
        if (quiet) return;
        std::cerr << "rho=" << r.rho << " gamma=" << r.gamma << " rep=" << r.replication << ": ";
        if (r.ok())
          std::cerr << r.iterations << " it, " << r.termination << ", rfg=" << r.rfg << '\n';
        else
          std::cerr << "error: " << r.error << '\n';
      };
      const BenchmarkReport report = run_benchmark(cfg, progress);
      write_report_csv(cfg.output_dir / "report.csv", report);
      write_text_file(cfg.output_dir / "report.meta.json", run_metadata_json(cfg));
      std::cout << report_csv(BenchmarkReport{{}, report.aggregates});
    } else if (*oracle) {
      RunConfig cfg = oracle_o.resolve();
      if (*oracle_noise_opt) cfg.noise_levels = {oracle_noise};
      const LeastSquaresInstance inst = noisy_instance(cfg, oracle_rep);
      const OracleSolution ref = oracle_for(cfg, inst);
      json out{{"method", to_string(ref.method)},
               {"approximate", ref.approximate},
               {"phi_star", ref.phi_star},
               {"omega_star", ref.omega_star},
               {"x_mn", vector_json(ref.x_mn)}};
      if (ref.xstar) {
        out["zero_coords"] = ref.xstar->zero_coords;
        out["null_dimension"] = ref.xstar->null_dimension();
        out["bounded"] = ref.xstar->bounded();
      }
      std::cout << out.dump(2) << '\n';
    } else if (*gen) {
      RunConfig cfg = gen_o.resolve();
      if (cfg.problem.from_files()) throw ConfigError("generate: --matrix/--rhs make no sense here");
      LeastSquaresInstance inst = make_instance(cfg.problem);
      inst = add_noise(inst, gen_noise, replication_seed(cfg.seed, gen_rep));
      std::error_code ec;
      std::filesystem::create_directories(gen_dir, ec);
      if (ec) throw IoError(gen_dir + ": " + ec.message());
      const std::filesystem::path dir(gen_dir);
      write_matrix_market(dir / "A.mtx", inst.A);
      write_matrix_market(dir / "b.mtx", inst.b);
      if (inst.x_true) write_matrix_market(dir / "x_true.mtx", *inst.x_true);
      std::cout << "wrote " << (dir / "A.mtx").string() << " (" << inst.A.rows() << " x "
                << inst.A.cols() << ")\n";
    } else if (*inspect) {
      const Matrix A = load_matrix(inspect_path);
      Eigen::BDCSVD<Matrix> svd(A);
      const Vector sv = svd.singularValues();
      const double tol = sv.size() ? 1e-12 * sv[0] * static_cast<double>(std::max(A.rows(), A.cols())) : 0.0;
      Index rank = 0;
      for (Index i = 0; i < sv.size(); ++i) rank += sv[i] > tol;
      json out{{"rows", A.rows()},
               {"cols", A.cols()},
               {"numerical_rank", rank},
               {"sigma_max", sv.size() ? sv[0] : 0.0},
               {"sigma_min", sv.size() ? sv[sv.size() - 1] : 0.0},
               {"lipschitz_f", sv.size() ? 2.0 * sv[0] * sv[0] : 0.0}};
      std::cout << out.dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
