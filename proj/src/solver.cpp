#include "bigsam/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace bigsam {

AlphaSchedule::AlphaSchedule(double gamma_, double beta_) : gamma(gamma_), beta(beta_) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("alpha schedule: gamma must lie in (0, 1]");
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("alpha schedule: beta must lie in [0, 1)");
}

double AlphaSchedule::at(long k) const {
  if (k < 1) throw ConfigError("alpha schedule is defined for k >= 1");
  return std::min(2.0 * gamma / (static_cast<double>(k) * (1.0 - beta)), 1.0);
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Residual: return "residual";
    case Termination::RelativeGap: return "relative-gap";
    case Termination::MaxIterations: return "max-iterations";
    case Termination::TimeLimit: return "time-limit";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  if (step_inner && !(*step_inner > 0.0)) throw ConfigError("t must be positive");
  if (step_outer && !(*step_outer > 0.0)) throw ConfigError("s must be positive");
  if (smoothing_accuracy && !(*smoothing_accuracy > 0.0))
    throw ConfigError("smoothing accuracy delta must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(residual_tol >= 0.0)) throw ConfigError("residual_tol must be nonnegative");
  if (relative_gap_tol) {
    if (!(*relative_gap_tol >= 0.0)) throw ConfigError("relative_gap_tol must be nonnegative");
    if (!phi_star) throw ConfigError("the relative-gap rule needs phi_star");
    if (!(*phi_star > 0.0))
      throw ConfigError(
          "phi_star must be positive for the relative-gap rule; use an absolute gap for "
          "zero-residual instances");
  }
  if (time_limit && !(time_limit->count() >= 0.0)) throw ConfigError("time_limit must be >= 0");
  if (record_every < 1) throw ConfigError("record_every must be at least 1");
  if (x0 && !x0->allFinite()) throw ConfigError("x0 must be finite");
}

namespace {

struct Step {
  Vector x;
  Vector y;
  Vector z;
  double alpha;
};

using StepFn = std::function<Step(long, const Vector&)>;

void check_finite(const Vector& v, const char* what, long k) {
  if (!v.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite " << what << " at iteration " << k;
    throw NumericalError(msg.str());
  }
}

Trajectory run_loop(const StepFn& step, const Vector& x0, const SolveConfig& cfg,
                    const Observers& obs) {
  cfg.validate();
  if (!x0.allFinite()) throw ConfigError("x0 must be finite");

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool gap_rule = cfg.relative_gap_tol.has_value();
  const double phi_star = cfg.phi_star.value_or(nan);

  Trajectory traj;
  traj.config = cfg;
  Vector x = x0;
  for (long k = 1;; ++k) {
    Step s = step(k, x);
    check_finite(s.y, "y", k);
    check_finite(s.z, "z", k);
    check_finite(s.x, "x", k);

    IterationRecord rec;
    rec.k = k;
    rec.alpha = s.alpha;
    rec.step_residual = (s.x - x).norm();
    rec.map_residual = (s.y - x).norm();
    rec.elapsed = clock::now() - start;

    std::optional<Termination> stop;
    double phi_y = nan;
    if (gap_rule && obs.phi) phi_y = obs.phi(s.y);
    if (cfg.time_limit && rec.elapsed >= *cfg.time_limit) {
      stop = Termination::TimeLimit;
    } else if (gap_rule && (phi_y - phi_star) / phi_star < *cfg.relative_gap_tol) {
      stop = Termination::RelativeGap;
    } else if (cfg.residual_tol > 0.0 && rec.map_residual <= cfg.residual_tol) {
      stop = Termination::Residual;
    } else if (k >= cfg.max_iterations) {
      stop = Termination::MaxIterations;
    }

    if (stop || k % cfg.record_every == 0) {
      rec.phi_y = gap_rule ? phi_y : (obs.phi ? obs.phi(s.y) : nan);
      rec.omega_y = obs.omega ? obs.omega(s.y) : nan;
      rec.x = s.x;
      rec.y = std::move(s.y);
      rec.z = std::move(s.z);
      traj.records.push_back(std::move(rec));
    }
    x = std::move(s.x);
    if (stop) {
      traj.termination = *stop;
      traj.iterations = k;
      return traj;
    }
  }
}

}  // namespace

Trajectory sam_run(const VectorMap& contraction, const VectorMap& nonexpansive, const Vector& x0,
                   const AlphaSchedule& schedule, const SolveConfig& cfg,
                   const Observers& observers) {
  if (!contraction || !nonexpansive) throw ConfigError("sam_run: both mappings are required");
  auto step = [&](long k, const Vector& x) {
    Step s;
    s.y = nonexpansive(x);
    s.z = contraction(x);
    s.alpha = schedule.at(k);
    s.x = s.alpha * s.z + (1.0 - s.alpha) * s.y;
    return s;
  };
  Trajectory traj = run_loop(step, x0, cfg, observers);
  traj.beta = schedule.beta;
  return traj;
}

Trajectory bigsam_run(const BilevelProblem& p, const SolveConfig& cfg) {
  cfg.validate();
  const ProxGradMapping inner(p.inner_smooth, p.inner_prox, cfg.step_inner);

  std::optional<double> s = cfg.step_outer;
  if (const auto* w = std::get_if<NonsmoothOuter>(&p.outer); w && !s) {
    if (!cfg.smoothing_accuracy)
      throw ConfigError("nonsmooth outer objective: set s or the smoothing accuracy delta");
    s = smoothing_parameter(*cfg.smoothing_accuracy, w->lipschitz_value());
  }
  OuterContraction outer = OuterContraction::for_outer(p.outer, s);
  if (cfg.beta_override) outer = outer.with_beta(*cfg.beta_override);

  const AlphaSchedule schedule(cfg.gamma, outer.beta());
  const OuterFunction& omega = p.outer;
  VectorMap S = [&outer, &omega](const Vector& x) { return contraction_step(outer, omega, x); };
  VectorMap T = [&inner](const Vector& x) { return inner(x); };
  Observers obs{[&p](const Vector& y) { return p.inner_objective(y); },
                [&p](const Vector& y) { return p.outer_objective(y); }};

  const Vector x0 = cfg.x0.value_or(Vector::Zero(p.dimension));
  if (x0.size() != p.dimension) throw ConfigError("x0 has the wrong dimension");
  Trajectory traj = sam_run(S, T, x0, schedule, cfg, obs);
  traj.step_inner = inner.step();
  traj.step_outer = outer.step();
  return traj;
}

double smoothing_parameter(double delta, double lipschitz_value) {
  if (!(delta > 0.0) || !(lipschitz_value > 0.0))
    throw ConfigError("smoothing parameter: delta and l must be positive");
  return 2.0 * delta / (lipschitz_value * lipschitz_value);
}

long long iteration_bound(double epsilon, double delta, double radius, double step_inner,
                          double sigma, double lipschitz_value) {
  if (!(epsilon > 0.0 && delta > 0.0 && radius > 0.0 && step_inner > 0.0 && sigma > 0.0 &&
        lipschitz_value > 0.0))
    throw ConfigError("iteration_bound: all arguments must be positive");
  const double l2 = lipschitz_value * lipschitz_value;
  const double ratio = l2 / (sigma * delta);
  const double factor = 2.0 + 1.5 * ratio + 0.25 * ratio * ratio;
  const double rhs = 4.0 * radius * radius / (step_inner * epsilon) * factor - 1.0;
  if (!std::isfinite(rhs) || rhs > 9.0e18) return std::numeric_limits<long long>::max();
  return static_cast<long long>(std::ceil(rhs));
}

LambdaSchedule harmonic_schedule(double lambda0) {
  if (!(lambda0 >= 0.0)) throw ConfigError("lambda0 must be nonnegative");
  return [lambda0](long k) { return lambda0 / static_cast<double>(k); };
}

Trajectory tikhonov_baseline_run(const BilevelProblem& p, const LambdaSchedule& lambdas,
                                 const SolveConfig& cfg) {
  cfg.validate();
  const auto* omega = std::get_if<SmoothFunction>(&p.outer);
  if (!omega) throw ConfigError("the Tikhonov baseline is defined for smooth outer objectives only");
  if (!lambdas) throw ConfigError("the Tikhonov baseline needs a lambda schedule");
  const double lf = p.inner_smooth.lipschitz_grad();
  if (cfg.step_inner && *cfg.step_inner > (1.0 / lf) * (1.0 + tolerance::kStepAdmissible))
    throw ConfigError("t must not exceed 1/L_f");
  const double step_cap = cfg.step_inner.value_or(kInfinity);
  const double lw = omega->lipschitz_grad();

  auto step = [&](long k, const Vector& x) {
    const double lambda = lambdas(k);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      std::ostringstream msg;
      msg << "lambda schedule produced " << lambda << " at iteration " << k;
      throw ConfigError(msg.str());
    }
    const double t = std::min(step_cap, 1.0 / (lf + lambda * lw));
    Step s;
    s.x = p.inner_prox.prox(t, x - t * (p.inner_smooth.gradient(x) + lambda * omega->gradient(x)));
    s.y = s.x;
    s.z = s.x;
    s.alpha = lambda;
    return s;
  };
  Observers obs{[&p](const Vector& y) { return p.inner_objective(y); },
                [&p](const Vector& y) { return p.outer_objective(y); }};
  const Vector x0 = cfg.x0.value_or(Vector::Zero(p.dimension));
  if (x0.size() != p.dimension) throw ConfigError("x0 has the wrong dimension");
  Trajectory traj = run_loop(step, x0, cfg, obs);
  traj.step_inner = std::min(step_cap, 1.0 / lf);
  return traj;
}

}  // namespace bigsam
