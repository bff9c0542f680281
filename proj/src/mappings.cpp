#include "bigsam/mappings.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace bigsam {

ProxGradMapping::ProxGradMapping(SmoothFunction f, ProxFunction g, std::optional<double> step)
    : f_(std::move(f)), g_(std::move(g)), step_(0.0) {
  const double max_step = 1.0 / f_.lipschitz_grad();
  step_ = step.value_or(max_step);
  if (!(step_ > 0.0) || step_ > max_step * (1.0 + tolerance::kStepAdmissible)) {
    std::ostringstream msg;
    msg << "prox-grad step t=" << step_ << " outside the admissible interval (0, 1/L_f] = (0, "
        << max_step << "]";
    throw ConfigError(msg.str());
  }
}

ProxGradMapping::ProxGradMapping(Unchecked, SmoothFunction f, ProxFunction g, double step)
    : f_(std::move(f)), g_(std::move(g)), step_(step) {
  if (!(step_ > 0.0)) throw ConfigError("prox-grad step must be positive");
}

ProxGradMapping ProxGradMapping::with_any_step(SmoothFunction f, ProxFunction g, double step) {
  return ProxGradMapping(Unchecked{}, std::move(f), std::move(g), step);
}

Vector ProxGradMapping::operator()(const Vector& x) const {
  return g_.prox(step_, x - step_ * f_.gradient(x));
}

Vector prox_grad_step(const ProxGradMapping& m, const Vector& x) { return m(x); }

double fixed_point_residual(const ProxGradMapping& m, const Vector& x) {
  return (m(x) - x).norm();
}

double contraction_factor_smooth(double sigma, double lipschitz_grad, double step) {
  if (!(sigma > 0.0) || !(lipschitz_grad > 0.0))
    throw ConfigError("contraction factor: sigma and L must be positive");
  if (sigma > lipschitz_grad * (1.0 + tolerance::kStepAdmissible))
    throw ConfigError("contraction factor: requires sigma <= L");
  const double max_step = 2.0 / (lipschitz_grad + sigma);
  if (!(step > 0.0) || step > max_step * (1.0 + tolerance::kStepAdmissible)) {
    std::ostringstream msg;
    msg << "outer gradient step s=" << step << " outside the admissible interval (0, 2/(L+sigma)] = (0, "
        << max_step << "]";
    throw ConfigError(msg.str());
  }
  const double radicand = 1.0 - 2.0 * step * sigma * lipschitz_grad / (sigma + lipschitz_grad);
  // At s = 2/(L+sigma) the radicand is ((L-sigma)/(L+sigma))^2 and may round below 0.
  return std::sqrt(std::max(radicand, 0.0));
}

double contraction_factor_prox(double sigma, double step) {
  if (!(sigma > 0.0) || !(step > 0.0))
    throw ConfigError("contraction factor: sigma and s must be positive");
  return 1.0 / (1.0 + step * sigma);
}

OuterContraction OuterContraction::gradient_step(double sigma, double lipschitz_grad,
                                                 std::optional<double> step) {
  const double s = step.value_or(2.0 / (lipschitz_grad + sigma));
  return OuterContraction(ContractionMode::GradientStep, s,
                          contraction_factor_smooth(sigma, lipschitz_grad, s));
}

OuterContraction OuterContraction::prox_step(double sigma, double step) {
  return OuterContraction(ContractionMode::ProxStep, step, contraction_factor_prox(sigma, step));
}

OuterContraction OuterContraction::for_outer(const OuterFunction& outer,
                                             std::optional<double> step) {
  if (const auto* smooth = std::get_if<SmoothFunction>(&outer)) {
    if (!(smooth->strong_convexity() > 0.0))
      throw ConfigError("outer objective must be strongly convex (sigma > 0)");
    return gradient_step(smooth->strong_convexity(), smooth->lipschitz_grad(), step);
  }
  const auto& nonsmooth = std::get<NonsmoothOuter>(outer);
  if (!step) throw ConfigError("nonsmooth outer objective requires an explicit smoothing step s");
  return prox_step(nonsmooth.strong_convexity(), *step);
}

OuterContraction OuterContraction::with_beta(double beta) const {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("contraction factor override must lie in [0, 1)");
  return OuterContraction(mode_, step_, beta);
}

Vector contraction_step(const OuterContraction& c, const OuterFunction& outer, const Vector& x) {
  if (c.mode() == ContractionMode::GradientStep) {
    const auto* smooth = std::get_if<SmoothFunction>(&outer);
    if (!smooth) throw ConfigError("gradient-step contraction needs a smooth outer objective");
    return x - c.step() * smooth->gradient(x);
  }
  const auto* nonsmooth = std::get_if<NonsmoothOuter>(&outer);
  if (!nonsmooth) throw ConfigError("prox-step contraction needs a nonsmooth outer objective");
  return nonsmooth->prox(c.step(), x);
}

}  // namespace bigsam
