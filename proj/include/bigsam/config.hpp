#pragma once

#include "bigsam/functions.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bigsam {

enum class SolverKind { BigSam, Tikhonov };

std::string_view to_string(SolverKind k);
SolverKind solver_kind_from_string(std::string_view name);

// Either generator parameters or a pair of matrix files.
struct ProblemSpec {
  std::string id = "generated";
  Index rows = 8;
  Index cols = 6;
  Index rank = 4;
  double sv_decay = 0.5;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> matrix_path;
  std::optional<std::filesystem::path> rhs_path;

  bool from_files() const { return matrix_path.has_value(); }
};

struct RunConfig {
  ProblemSpec problem;

  SolverKind solver = SolverKind::BigSam;
  std::vector<double> gammas{1.0};
  std::optional<double> step_inner;
  std::optional<double> step_outer;
  double lambda0 = 1.0;  // Tikhonov schedule lambda_k = lambda0 / k

  std::vector<double> noise_levels{1e-2};
  int replications = 1;
  std::uint64_t seed = 1;
  int parallelism = 1;

  double relative_gap = 1e-2;
  long max_iterations = 1000000;
  std::optional<double> time_limit_seconds;

  long reference_budget = 1000000;
  double reference_residual = 1e-12;
  double lower_bound_mu = 1e-4;

  std::filesystem::path output_dir;
  bool trajectories = false;
  long record_every = 1;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Parses the TOML schema documented in docs/config.md. Unknown keys are errors.
RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Canonical TOML rendering; parse_run_config(to_toml(c)) reproduces c.
std::string to_toml(const RunConfig& cfg);

inline constexpr const char* kOutputDirEnv = "BIGSAM_OUTPUT_DIR";

// $BIGSAM_OUTPUT_DIR when set and non-empty, otherwise the current directory.
std::filesystem::path default_output_dir();

}  // namespace bigsam
