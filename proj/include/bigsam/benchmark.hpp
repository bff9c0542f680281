#pragma once

#include "bigsam/config.hpp"
#include "bigsam/oracle.hpp"
#include "bigsam/problems.hpp"
#include "bigsam/report.hpp"
#include "bigsam/solver.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bigsam {

// Rows carry their full identity (problem, rho, gamma, replication) so the
// report does not depend on the order in which workers finish.
struct RunRow {
  std::string problem_id;
  double rho = 0.0;
  double gamma = 0.0;
  int replication = 0;
  std::uint64_t seed = 0;
  long iterations = 0;
  double elapsed_seconds = 0.0;
  double rfg = 0.0;
  double rog = 0.0;
  bool rog_absolute = false;
  std::string termination;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

// Means over the successful member rows.
struct AggregateRow {
  std::string problem_id;
  double rho = 0.0;
  double gamma = 0.0;
  int runs = 0;
  int failures = 0;
  double mean_iterations = 0.0;
  double mean_elapsed_seconds = 0.0;
  double mean_rfg = 0.0;
  double mean_rog = 0.0;
  int count_at_limit = 0;  // max-iterations or time-limit terminations
};

struct BenchmarkReport {
  std::vector<RunRow> runs;
  std::vector<AggregateRow> aggregates;
};

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& rows);

// Seed for replication r derived from the base seed (splitmix64 mixing).
std::uint64_t replication_seed(std::uint64_t base, int replication);

// Builds the instance named by the problem spec before noise.
LeastSquaresInstance make_instance(const ProblemSpec& spec);

// The outer objective used throughout: 1/2 x^T (D^T D + I) x.
QuadraticForm default_outer(Index n);

struct SingleRun {
  Trajectory trajectory;
  OracleSolution oracle;
  RunRow row;
};

// One solver run on an already noisy instance, stopping on the relative gap.
SingleRun run_single(const LeastSquaresInstance& inst, const OracleSolution& oracle,
                     const RunConfig& cfg, double gamma);

using ProgressFn = std::function<void(const RunRow&)>;

// For each (rho, replication): add noise with the replication seed, solve the
// oracle once, then run every gamma. Failures are recorded as rows with the
// error text. Rows come back sorted by (rho, gamma, replication).
BenchmarkReport run_benchmark(const RunConfig& cfg, const ProgressFn& progress = {});

inline const std::vector<std::string> kReportColumns{
    "kind", "problem_id", "rho", "gamma", "replication", "seed", "iterations",
    "elapsed_seconds", "rfg", "rog", "rog_absolute", "termination", "error",
    "runs", "failures", "count_at_limit"};

std::string report_csv(const BenchmarkReport& report);
void write_report_csv(const std::filesystem::path& path, const BenchmarkReport& report);

// JSON sidecar with the canonical config, generator name and build info.
std::string run_metadata_json(const RunConfig& cfg);

}  // namespace bigsam
