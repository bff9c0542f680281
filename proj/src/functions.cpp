#include "bigsam/functions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace bigsam {

namespace {

void require_positive_step(double step, const char* what) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    std::ostringstream msg;
    msg << what << ": step must be a positive finite number, got " << step;
    throw ConfigError(msg.str());
  }
}

}  // namespace

SmoothFunction::SmoothFunction(ValueFn value, GradientFn gradient, double lipschitz_grad,
                               double strong_convexity)
    : value_(std::move(value)),
      gradient_(std::move(gradient)),
      lipschitz_grad_(lipschitz_grad),
      strong_convexity_(strong_convexity) {
  if (!value_ || !gradient_) throw ConfigError("SmoothFunction: value and gradient are required");
  if (!(lipschitz_grad_ > 0.0) || !std::isfinite(lipschitz_grad_))
    throw ConfigError("SmoothFunction: gradient Lipschitz constant must be positive and finite");
  if (!(strong_convexity_ >= 0.0) || strong_convexity_ > lipschitz_grad_ * (1.0 + 1e-12))
    throw ConfigError("SmoothFunction: strong convexity must lie in [0, L]");
}

ProxFunction::ProxFunction(ValueFn value, ProxFn prox)
    : value_(std::move(value)), prox_(std::move(prox)) {
  if (!value_ || !prox_) throw ConfigError("ProxFunction: value and prox are required");
}

Vector ProxFunction::prox(double step, const Vector& x) const {
  require_positive_step(step, "prox");
  return prox_(step, x);
}

NonsmoothOuter::NonsmoothOuter(ProxFunction fn, double lipschitz_value, double strong_convexity)
    : fn_(std::move(fn)), lipschitz_value_(lipschitz_value), strong_convexity_(strong_convexity) {
  if (!(lipschitz_value_ > 0.0) || !std::isfinite(lipschitz_value_))
    throw ConfigError("NonsmoothOuter: Lipschitz constant of the value must be positive");
  if (!(strong_convexity_ > 0.0))
    throw ConfigError("NonsmoothOuter: strong convexity modulus must be positive");
}

double outer_value(const OuterFunction& outer, const Vector& x) {
  return std::visit([&](const auto& w) { return w.value(x); }, outer);
}

double outer_strong_convexity(const OuterFunction& outer) {
  return std::visit([](const auto& w) { return w.strong_convexity(); }, outer);
}

Box Box::symmetric(Index n, double radius) {
  if (!(radius > 0.0)) throw ConfigError("Box: radius must be positive");
  return Box{Vector::Constant(n, -radius), Vector::Constant(n, radius)};
}

bool Box::contains(const Vector& x, double slack) const {
  if (x.size() != lower.size()) return false;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// QuadraticForm

struct QuadraticForm::Data {
  Matrix hessian;
  Vector linear;
  double min_eig = 0.0;
  double max_eig = 0.0;
  std::optional<double> cached_step;
  Eigen::LLT<Matrix> cached_factor;
};

namespace {

Eigen::LLT<Matrix> factor_shifted(const Matrix& hessian, double step) {
  Matrix shifted = step * hessian;
  shifted.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success)
    throw NumericalError("QuadraticForm: Cholesky factorization of I + tQ failed");
  return llt;
}

}  // namespace

QuadraticForm::QuadraticForm(Matrix hessian, std::optional<Vector> linear,
                             std::optional<double> prox_step) {
  if (hessian.rows() != hessian.cols() || hessian.rows() == 0)
    throw ConfigError("QuadraticForm: Q must be a nonempty square matrix");
  if (!hessian.allFinite()) throw ConfigError("QuadraticForm: Q has non-finite entries");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  if ((hessian - hessian.transpose()).cwiseAbs().maxCoeff() > tolerance::kSymmetry * scale)
    throw ConfigError("QuadraticForm: Q is not symmetric");

  auto data = std::make_shared<Data>();
  const Index n = hessian.rows();
  data->linear = linear.value_or(Vector::Zero(n));
  if (data->linear.size() != n) throw ConfigError("QuadraticForm: linear term has wrong size");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("QuadraticForm: eigenvalue solve failed");
  data->min_eig = eig.eigenvalues().minCoeff();
  data->max_eig = eig.eigenvalues().maxCoeff();
  if (!(data->min_eig > 0.0)) throw ConfigError("QuadraticForm: Q is not positive definite");

  data->hessian = std::move(hessian);
  if (prox_step) {
    require_positive_step(*prox_step, "QuadraticForm");
    data->cached_step = prox_step;
    data->cached_factor = factor_shifted(data->hessian, *prox_step);
  }
  data_ = std::move(data);
}

Index QuadraticForm::dimension() const { return data_->hessian.rows(); }
const Matrix& QuadraticForm::hessian() const { return data_->hessian; }
const Vector& QuadraticForm::linear() const { return data_->linear; }
double QuadraticForm::min_eigenvalue() const { return data_->min_eig; }
double QuadraticForm::max_eigenvalue() const { return data_->max_eig; }
std::optional<double> QuadraticForm::cached_prox_step() const { return data_->cached_step; }

double QuadraticForm::value(const Vector& x) const {
  return 0.5 * x.dot(data_->hessian * x) + data_->linear.dot(x);
}

Vector QuadraticForm::gradient(const Vector& x) const {
  return data_->hessian * x + data_->linear;
}

Vector QuadraticForm::prox(double step, const Vector& x) const {
  require_positive_step(step, "QuadraticForm::prox");
  const Vector rhs = x - step * data_->linear;
  if (data_->cached_step && *data_->cached_step == step) return data_->cached_factor.solve(rhs);
  return factor_shifted(data_->hessian, step).solve(rhs);
}

QuadraticForm QuadraticForm::with_prox_step(double step) const {
  return QuadraticForm(data_->hessian, data_->linear, step);
}

SmoothFunction QuadraticForm::smooth() const {
  auto self = *this;
  return SmoothFunction([self](const Vector& x) { return self.value(x); },
                        [self](const Vector& x) { return self.gradient(x); },
                        data_->max_eig, data_->min_eig);
}

ProxFunction QuadraticForm::proximal() const {
  auto self = *this;
  return ProxFunction([self](const Vector& x) { return self.value(x); },
                      [self](double t, const Vector& x) { return self.prox(t, x); });
}

// ---------------------------------------------------------------------------
// catalog

namespace catalog {

Vector project_nonneg(const Vector& x) { return x.cwiseMax(0.0); }

ProxFunction nonneg_indicator() {
  return ProxFunction(
      [](const Vector& x) { return (x.array() >= 0.0).all() ? 0.0 : kInfinity; },
      [](double, const Vector& x) { return project_nonneg(x); });
}

ProxFunction box_indicator(Vector lower, Vector upper) {
  if (lower.size() != upper.size()) throw ConfigError("box_indicator: bound sizes differ");
  if ((lower.array() > upper.array()).any()) throw ConfigError("box_indicator: empty box");
  return ProxFunction(
      [lower, upper](const Vector& x) {
        return ((x.array() >= lower.array()) && (x.array() <= upper.array())).all() ? 0.0
                                                                                    : kInfinity;
      },
      [lower, upper](double, const Vector& x) -> Vector {
        return x.cwiseMax(lower).cwiseMin(upper);
      });
}

ProxFunction l1_norm(double weight) {
  if (!(weight >= 0.0)) throw ConfigError("l1_norm: weight must be nonnegative");
  return ProxFunction([weight](const Vector& x) { return weight * x.lpNorm<1>(); },
                      [weight](double t, const Vector& x) -> Vector {
                        const double thr = t * weight;
                        return x.unaryExpr([thr](double v) {
                          return std::copysign(std::max(std::abs(v) - thr, 0.0), v);
                        });
                      });
}

ProxFunction euclidean_norm(double weight) {
  if (!(weight >= 0.0)) throw ConfigError("euclidean_norm: weight must be nonnegative");
  return ProxFunction([weight](const Vector& x) { return weight * x.norm(); },
                      [weight](double t, const Vector& x) -> Vector {
                        const double nrm = x.norm();
                        const double thr = t * weight;
                        if (nrm <= thr) return Vector::Zero(x.size());
                        return (1.0 - thr / nrm) * x;
                      });
}

ProxFunction affine_indicator(Matrix A, Vector b) {
  if (A.rows() != b.size()) throw ConfigError("affine_indicator: A and b sizes differ");
  Eigen::FullPivLU<Matrix> lu(A);
  if (lu.rank() != A.rows()) throw ConfigError("affine_indicator: A must have full row rank");
  const Matrix gram = A * A.transpose();
  auto factor = std::make_shared<const Eigen::LLT<Matrix>>(gram);
  if (factor->info() != Eigen::Success)
    throw NumericalError("affine_indicator: Gram matrix factorization failed");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return ProxFunction(
      [A, b, scale](const Vector& x) {
        return (A * x - b).cwiseAbs().maxCoeff() <= 1e-10 * scale ? 0.0 : kInfinity;
      },
      [A, b, factor](double, const Vector& x) -> Vector {
        return x - A.transpose() * factor->solve(A * x - b);
      });
}

ProxFunction quadratic(const QuadraticForm& q) { return q.proximal(); }

NonsmoothOuter add_strong_convexity(const ProxFunction& h, double sigma, double lipschitz_value) {
  if (!(sigma > 0.0)) throw ConfigError("add_strong_convexity: sigma must be positive");
  ProxFunction omega(
      [h, sigma](const Vector& x) { return 0.5 * sigma * x.squaredNorm() + h.value(x); },
      [h, sigma](double s, const Vector& x) -> Vector {
        const double shrink = 1.0 + s * sigma;
        return h.prox(s / shrink, x / shrink);
      });
  return NonsmoothOuter(std::move(omega), lipschitz_value, sigma);
}

double elastic_net_lipschitz(double sigma, double weight, const Box& box) {
  const Vector radius = box.lower.cwiseAbs().cwiseMax(box.upper.cwiseAbs());
  return (sigma * radius.array() + weight).matrix().norm();
}

NonsmoothOuter elastic_net(double sigma, double weight, const Box& box) {
  return add_strong_convexity(l1_norm(weight), sigma, elastic_net_lipschitz(sigma, weight, box));
}

}  // namespace catalog

// ---------------------------------------------------------------------------
// Moreau envelope

double moreau_value(const ProxFunction& w, double s, const Vector& x) {
  const Vector u = w.prox(s, x);
  return w.value(u) + (u - x).squaredNorm() / (2.0 * s);
}

Vector moreau_gradient(const ProxFunction& w, double s, const Vector& x) {
  return (x - w.prox(s, x)) / s;
}

SmoothFunction smooth_from_nonsmooth(const NonsmoothOuter& w, double s) {
  require_positive_step(s, "smooth_from_nonsmooth");
  const double sigma = w.strong_convexity();
  if (!(sigma > 0.0)) throw ConfigError("smooth_from_nonsmooth: outer must be strongly convex");
  const ProxFunction fn = w.as_prox();
  return SmoothFunction([fn, s](const Vector& x) { return moreau_value(fn, s, x); },
                        [fn, s](const Vector& x) { return moreau_gradient(fn, s, x); }, 1.0 / s,
                        sigma / (1.0 + s * sigma));
}

}  // namespace bigsam
