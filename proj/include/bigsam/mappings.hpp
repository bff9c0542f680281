#pragma once

#include "bigsam/functions.hpp"

namespace bigsam {

// T_t(x) = prox_{t g}(x - t grad f(x)). Nonexpansive for t in (0, 1/L_f], and
// its fixed points are exactly the minimizers of f + g.
class ProxGradMapping {
 public:
  // step defaults to 1/L_f; larger steps are rejected.
  ProxGradMapping(SmoothFunction f, ProxFunction g, std::optional<double> step = std::nullopt);

  // Builds the mapping for any t > 0. Only the fixed-point set is guaranteed
  // (Fix(T_t) = argmin f + g); nonexpansiveness is not.
  static ProxGradMapping with_any_step(SmoothFunction f, ProxFunction g, double step);

  Vector operator()(const Vector& x) const;

  double step() const { return step_; }
  const SmoothFunction& smooth() const { return f_; }
  const ProxFunction& nonsmooth() const { return g_; }
  // phi(x) = f(x) + g(x)
  double objective(const Vector& x) const { return f_.value(x) + g_.value(x); }

 private:
  struct Unchecked {};
  ProxGradMapping(Unchecked, SmoothFunction f, ProxFunction g, double step);

  SmoothFunction f_;
  ProxFunction g_;
  double step_;
};

Vector prox_grad_step(const ProxGradMapping& m, const Vector& x);

// |T_t(x) - x|; zero exactly on argmin f + g.
double fixed_point_residual(const ProxGradMapping& m, const Vector& x);

enum class ContractionMode { GradientStep, ProxStep };

// The outer map S of the averaging scheme together with its contraction factor.
//   GradientStep: S(x) = x - s grad omega(x),  beta = sqrt(1 - 2 s sigma L / (sigma + L))
//   ProxStep:     S(x) = prox_{s omega}(x),    beta = 1 / (1 + s sigma)
class OuterContraction {
 public:
  static OuterContraction gradient_step(double sigma, double lipschitz_grad,
                                        std::optional<double> step = std::nullopt);
  static OuterContraction prox_step(double sigma, double step);
  // Picks the mode matching the outer objective; the step defaults to
  // 2/(L + sigma) for smooth outer objectives and is required otherwise.
  static OuterContraction for_outer(const OuterFunction& outer, std::optional<double> step);

  // Replace beta with a tighter bound known to the caller. Must lie in [0, 1).
  OuterContraction with_beta(double beta) const;

  ContractionMode mode() const { return mode_; }
  double step() const { return step_; }
  double beta() const { return beta_; }

 private:
  OuterContraction(ContractionMode mode, double step, double beta)
      : mode_(mode), step_(step), beta_(beta) {}

  ContractionMode mode_;
  double step_;
  double beta_;
};

// Applies S to x. Throws ConfigError when the mode does not match the kind of
// outer objective (gradient steps need a SmoothFunction, prox steps a
// NonsmoothOuter).
Vector contraction_step(const OuterContraction& c, const OuterFunction& outer, const Vector& x);

double contraction_factor_smooth(double sigma, double lipschitz_grad, double step);
double contraction_factor_prox(double sigma, double step);

}  // namespace bigsam
