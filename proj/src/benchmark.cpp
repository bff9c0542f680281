#include "bigsam/benchmark.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace bigsam {

std::uint64_t replication_seed(std::uint64_t base, int replication) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(replication) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LeastSquaresInstance make_instance(const ProblemSpec& spec) {
  if (spec.from_files()) {
    if (!spec.rhs_path) throw ConfigError("problem.rhs is required with problem.matrix");
    return load_least_squares(*spec.matrix_path, *spec.rhs_path);
  }
  return generate_rank_deficient_ls(spec.rows, spec.cols, spec.rank, spec.sv_decay, spec.seed);
}

QuadraticForm default_outer(Index n) {
  return quadratic_outer_from_operator(FirstDifferenceOperator(n));
}

SingleRun run_single(const LeastSquaresInstance& inst, const OracleSolution& oracle,
                     const RunConfig& cfg, double gamma) {
  if (!(oracle.phi_star > 0.0))
    throw ConfigError("phi* = 0: the relative feasibility gap is undefined for this instance");
  const QuadraticForm outer = default_outer(inst.A.cols());
  const BilevelProblem problem = make_nonneg_ls_problem(inst, outer.smooth());

  SolveConfig sc;
  sc.step_inner = cfg.step_inner;
  sc.step_outer = cfg.step_outer;
  sc.gamma = gamma;
  sc.max_iterations = cfg.max_iterations;
  sc.residual_tol = 0.0;
  sc.relative_gap_tol = cfg.relative_gap;
  sc.phi_star = oracle.phi_star;
  if (cfg.time_limit_seconds) sc.time_limit = std::chrono::duration<double>(*cfg.time_limit_seconds);
  sc.record_every = cfg.trajectories ? cfg.record_every : cfg.max_iterations;

  SingleRun out;
  out.oracle = oracle;
  out.trajectory = cfg.solver == SolverKind::BigSam
                       ? bigsam_run(problem, sc)
                       : tikhonov_baseline_run(problem, harmonic_schedule(cfg.lambda0), sc);
  const IterationRecord& last = out.trajectory.last();
  out.row.gamma = gamma;
  out.row.iterations = out.trajectory.iterations;
  out.row.elapsed_seconds = last.elapsed.count();
  out.row.rfg = metric_rfg(last.phi_y, oracle.phi_star);
  const GapValue rog = metric_rog(last.omega_y, oracle.omega_star);
  out.row.rog = rog.value;
  out.row.rog_absolute = rog.absolute;
  out.row.termination = std::string(to_string(out.trajectory.termination));
  return out;
}

namespace {

std::string trajectory_name(const RunRow& row) {
  std::string name = "traj_" + row.problem_id + "_rho" + format_double(row.rho) + "_gamma" +
                     format_double(row.gamma) + "_rep" + std::to_string(row.replication) + ".csv";
  std::replace(name.begin(), name.end(), '/', '_');
  return name;
}

}  // namespace

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows) {
  std::map<std::tuple<std::string, double, double>, AggregateRow> groups;
  for (const RunRow& r : rows) {
    AggregateRow& a = groups[{r.problem_id, r.rho, r.gamma}];
    a.problem_id = r.problem_id;
    a.rho = r.rho;
    a.gamma = r.gamma;
    if (!r.ok()) {
      ++a.failures;
      continue;
    }
    ++a.runs;
    a.mean_iterations += static_cast<double>(r.iterations);
    a.mean_elapsed_seconds += r.elapsed_seconds;
    a.mean_rfg += r.rfg;
    a.mean_rog += r.rog;
    if (r.termination == to_string(Termination::MaxIterations) ||
        r.termination == to_string(Termination::TimeLimit))
      ++a.count_at_limit;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, a] : groups) {
    if (a.runs > 0) {
      const double n = a.runs;
      a.mean_iterations /= n;
      a.mean_elapsed_seconds /= n;
      a.mean_rfg /= n;
      a.mean_rog /= n;
    } else {
      a.mean_iterations = a.mean_elapsed_seconds = a.mean_rfg = a.mean_rog =
          std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(a);
  }
  return out;
}

BenchmarkReport run_benchmark(const RunConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const LeastSquaresInstance base = make_instance(cfg.problem);
  const std::filesystem::path out_dir = cfg.output_dir.empty() ? default_output_dir() : cfg.output_dir;
  if (cfg.trajectories) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError(out_dir.string() + ": " + ec.message());
  }

  struct Task {
    double rho;
    int replication;
  };
  std::vector<Task> tasks;
  for (double rho : cfg.noise_levels)
    for (int r = 0; r < cfg.replications; ++r) tasks.push_back({rho, r});

  std::vector<RunRow> rows;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};

  auto record = [&](RunRow row) {
    std::lock_guard<std::mutex> lock(mutex);
    if (progress) progress(row);
    rows.push_back(std::move(row));
  };

  auto work = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task task = tasks[i];
      RunRow proto;
      proto.problem_id = cfg.problem.id;
      proto.rho = task.rho;
      proto.replication = task.replication;
      proto.seed = replication_seed(cfg.seed, task.replication);

      LeastSquaresInstance inst;
      OracleSolution oracle;
      std::string setup_error;
      try {
        inst = add_noise(base, task.rho, proto.seed);
        ReferenceOptions ro;
        ro.budget = cfg.reference_budget;
        ro.residual_target = cfg.reference_residual;
        oracle = solve_reference(inst, default_outer(inst.A.cols()), ro, cfg.lower_bound_mu);
      } catch (const std::exception& e) {
        setup_error = e.what();
      }

      for (double gamma : cfg.gammas) {
        RunRow row = proto;
        row.gamma = gamma;
        if (!setup_error.empty()) {
          row.error = setup_error;
          record(std::move(row));
          continue;
        }
        try {
          SingleRun run = run_single(inst, oracle, cfg, gamma);
          run.row.problem_id = row.problem_id;
          run.row.rho = row.rho;
          run.row.replication = row.replication;
          run.row.seed = row.seed;
          row = run.row;
          if (cfg.trajectories)
            write_trajectory_csv(out_dir / trajectory_name(row), run.trajectory, oracle.x_mn);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
        record(std::move(row));
      }
    }
  };

  const int workers = std::min<int>(cfg.parallelism, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return std::tie(a.problem_id, a.rho, a.gamma, a.replication) <
           std::tie(b.problem_id, b.rho, b.gamma, b.replication);
  });
  BenchmarkReport report;
  report.aggregates = aggregate(rows);
  report.runs = std::move(rows);
  return report;
}

std::string report_csv(const BenchmarkReport& report) {
  std::string out = csv_line(kReportColumns);
  for (const RunRow& r : report.runs) {
    out += csv_line({"run", r.problem_id, format_double(r.rho), format_double(r.gamma),
                     std::to_string(r.replication), std::to_string(r.seed),
                     std::to_string(r.iterations), format_double(r.elapsed_seconds),
                     format_double(r.rfg), format_double(r.rog), r.rog_absolute ? "1" : "0",
                     r.termination, r.error, "", "", ""});
  }
  for (const AggregateRow& a : report.aggregates) {
    out += csv_line({"mean", a.problem_id, format_double(a.rho), format_double(a.gamma), "", "",
                     format_double(a.mean_iterations), format_double(a.mean_elapsed_seconds),
                     format_double(a.mean_rfg), format_double(a.mean_rog), "", "", "",
                     std::to_string(a.runs), std::to_string(a.failures),
                     std::to_string(a.count_at_limit)});
  }
  return out;
}

void write_report_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  write_text_file(path, report_csv(report));
}

std::string run_metadata_json(const RunConfig& cfg) {
  nlohmann::json meta;
  meta["config_toml"] = to_toml(cfg);
  meta["normal_generator"] = kNormalAlgorithm;
  meta["outer_objective"] = "0.5 x^T (D^T D + I) x, D forward difference";
  meta["inner_objective"] = "|Ax - b|^2 + indicator(x >= 0)";
  meta["oracle_enumeration_limit"] = kMaxEnumerationDimension;
  return meta.dump(2) + "\n";
}

}  // namespace bigsam
