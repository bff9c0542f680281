#pragma once

#include "bigsam/mappings.hpp"
#include "bigsam/problems.hpp"

#include <chrono>
#include <functional>
#include <string_view>
#include <vector>

namespace bigsam {

// alpha_k = min{ 2 gamma / (k (1 - beta)), 1 }
struct AlphaSchedule {
  double gamma = 1.0;
  double beta = 0.0;

  AlphaSchedule() = default;
  AlphaSchedule(double gamma, double beta);

  double at(long k) const;
};

/// Presets for gamma used in the inverse-problem sweeps.
inline constexpr std::array<double, 3> kGammaPresets{0.1, 0.5, 1.0};

enum class Termination { Residual, RelativeGap, MaxIterations, TimeLimit };

std::string_view to_string(Termination t);

struct SolveConfig {
  // Inner step t; defaults to 1/L_f.
  std::optional<double> step_inner;
  // Outer step s; defaults to 2/(L_omega + sigma) for smooth outer objectives,
  // or to 2 delta / l_omega^2 when smoothing_accuracy (delta) is set.
  std::optional<double> step_outer;
  std::optional<double> smoothing_accuracy;
  // Tighter contraction factor supplied by the caller.
  std::optional<double> beta_override;

  double gamma = 1.0;
  long max_iterations = 100000;
  // Stop when |y^k - x^{k-1}| <= residual_tol. Zero disables the rule.
  double residual_tol = 1e-9;
  // Stop when (phi(y^k) - phi*) / phi* < relative_gap_tol; needs phi_star > 0.
  std::optional<double> relative_gap_tol;
  std::optional<double> phi_star;
  std::optional<std::chrono::duration<double>> time_limit;
  // Keep every m-th record plus the final one.
  long record_every = 1;
  // Starting point; zero vector when unset.
  std::optional<Vector> x0;

  void validate() const;
};

struct IterationRecord {
  long k = 0;
  Vector x;  // x^k = alpha z + (1 - alpha) y
  Vector y;  // T(x^{k-1})
  Vector z;  // S(x^{k-1})
  double alpha = 0.0;
  double phi_y = 0.0;
  double omega_y = 0.0;
  double step_residual = 0.0;  // |x^k - x^{k-1}|
  double map_residual = 0.0;   // |y^k - x^{k-1}|
  std::chrono::duration<double> elapsed{0.0};
};

struct Trajectory {
  std::vector<IterationRecord> records;
  Termination termination = Termination::MaxIterations;
  SolveConfig config;
  long iterations = 0;
  // Parameters actually used.
  double beta = 0.0;
  double step_inner = 0.0;
  double step_outer = 0.0;

  const IterationRecord& last() const { return records.back(); }
};

using VectorMap = std::function<Vector(const Vector&)>;
using ScalarFn = std::function<double(const Vector&)>;

// Functions evaluated at y^k for reporting and stopping. Missing entries are
// recorded as NaN.
struct Observers {
  ScalarFn phi;
  ScalarFn omega;
};

// Sequential averaging x^k = alpha_k S(x^{k-1}) + (1 - alpha_k) T(x^{k-1}).
// Throws NumericalError naming the iteration if a non-finite value appears.
Trajectory sam_run(const VectorMap& contraction, const VectorMap& nonexpansive, const Vector& x0,
                   const AlphaSchedule& schedule, const SolveConfig& cfg,
                   const Observers& observers = {});

// SAM with T = prox-grad mapping of the inner problem and S = gradient step on
// omega (smooth) or prox step on omega (nonsmooth).
Trajectory bigsam_run(const BilevelProblem& p, const SolveConfig& cfg);

// s = 2 delta / l^2; keeps omega - M_{s omega} <= delta everywhere.
double smoothing_parameter(double delta, double lipschitz_value);

// Iterations sufficient for an epsilon inner gap while keeping delta uniform
// accuracy on the outer objective:
//   ceil( 4 C^2 / (t eps) * (2 + 3 l^2 / (2 sigma delta) + l^4 / (4 sigma^2 delta^2)) - 1 )
long long iteration_bound(double epsilon, double delta, double radius, double step_inner,
                          double sigma, double lipschitz_value);

using LambdaSchedule = std::function<double(long)>;

// lambda_k = lambda0 / k
LambdaSchedule harmonic_schedule(double lambda0 = 1.0);

// Diagonal Tikhonov scheme: one prox-grad step on f + lambda_k omega per
// iteration with t_k = 1 / (L_f + lambda_k L_omega) (or cfg.step_inner when it
// is smaller). The record's alpha holds lambda_k and y = z = x^k.
Trajectory tikhonov_baseline_run(const BilevelProblem& p, const LambdaSchedule& lambdas,
                                 const SolveConfig& cfg);

}  // namespace bigsam
