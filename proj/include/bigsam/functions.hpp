#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace bigsam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Raised when user-supplied data violates a documented precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an iteration produces non-finite values or a factorization fails.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace tolerance {
// Relative slack on Q == Q^T checks at construction.
inline constexpr double kSymmetry = 1e-12;
// Relative slack on step-size upper bounds such as t <= 1/L_f.
inline constexpr double kStepAdmissible = 1e-12;
}  // namespace tolerance

// A convex differentiable function with an L-Lipschitz gradient and an
// optional strong-convexity modulus (0 means merely convex).
class SmoothFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  SmoothFunction(ValueFn value, GradientFn gradient, double lipschitz_grad,
                 double strong_convexity = 0.0);

  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }
  double lipschitz_grad() const { return lipschitz_grad_; }
  double strong_convexity() const { return strong_convexity_; }

 private:
  ValueFn value_;
  GradientFn gradient_;
  double lipschitz_grad_;
  double strong_convexity_;
};

// An extended-real-valued convex function together with its proximal map
//   prox(t, x) = argmin_u  h(u) + |u - x|^2 / (2t).
// Values outside the domain are +infinity; prox always returns a finite point.
class ProxFunction {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(double, const Vector&)>;

  ProxFunction(ValueFn value, ProxFn prox);

  double value(const Vector& x) const { return value_(x); }
  Vector prox(double step, const Vector& x) const;

 private:
  ValueFn value_;
  ProxFn prox_;
};

// A strongly convex, possibly nonsmooth outer objective. The Lipschitz
// constant of the value is only meaningful on a bounded region; see Box.
class NonsmoothOuter {
 public:
  NonsmoothOuter(ProxFunction fn, double lipschitz_value, double strong_convexity);

  double value(const Vector& x) const { return fn_.value(x); }
  Vector prox(double step, const Vector& x) const { return fn_.prox(step, x); }
  const ProxFunction& as_prox() const { return fn_; }
  double lipschitz_value() const { return lipschitz_value_; }
  double strong_convexity() const { return strong_convexity_; }

 private:
  ProxFunction fn_;
  double lipschitz_value_;
  double strong_convexity_;
};

using OuterFunction = std::variant<SmoothFunction, NonsmoothOuter>;

double outer_value(const OuterFunction& outer, const Vector& x);
double outer_strong_convexity(const OuterFunction& outer);

// Axis-aligned box [lower, upper]. Used to make Lipschitz constants of
// strongly convex outer objectives finite.
struct Box {
  Vector lower;
  Vector upper;

  static Box symmetric(Index n, double radius);
  bool contains(const Vector& x, double slack = 0.0) const;
  Index dimension() const { return lower.size(); }
};

// f(x) = 1/2 x^T Q x + c^T x with Q symmetric positive definite.
//
// The prox solve (I + tQ) u = x - t c uses a Cholesky factor cached for one
// step size, chosen at construction. Other step sizes factorize on the spot;
// use with_prox_step() to get an object whose cache matches a new step.
class QuadraticForm {
 public:
  explicit QuadraticForm(Matrix hessian, std::optional<Vector> linear = std::nullopt,
                         std::optional<double> prox_step = std::nullopt);

  Index dimension() const;
  const Matrix& hessian() const;
  const Vector& linear() const;
  double min_eigenvalue() const;
  double max_eigenvalue() const;
  std::optional<double> cached_prox_step() const;

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector prox(double step, const Vector& x) const;

  QuadraticForm with_prox_step(double step) const;
  SmoothFunction smooth() const;
  ProxFunction proximal() const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
};

// Closed-form proximal operators.
namespace catalog {

Vector project_nonneg(const Vector& x);

// Indicator of the nonnegative orthant; prox is the componentwise clamp.
ProxFunction nonneg_indicator();
// Indicator of [lower, upper].
ProxFunction box_indicator(Vector lower, Vector upper);
// weight * |x|_1; prox is soft thresholding.
ProxFunction l1_norm(double weight = 1.0);
// weight * |x|_2; prox is block soft thresholding.
ProxFunction euclidean_norm(double weight = 1.0);
// Indicator of {x : A x = b}. A must have full row rank.
ProxFunction affine_indicator(Matrix A, Vector b);
// 1/2 x^T Q x (+ c^T x), prox solves (I + tQ) u = x - t c.
ProxFunction quadratic(const QuadraticForm& q);

// omega(x) = sigma/2 |x|^2 + h(x). Its prox reduces to the prox of h:
//   prox_{s omega}(x) = prox_{s/(1+s sigma) h}(x / (1 + s sigma)).
// lipschitz_value is the caller's bound on subgradient norms over the region
// of interest.
NonsmoothOuter add_strong_convexity(const ProxFunction& h, double sigma,
                                    double lipschitz_value);

// omega(x) = sigma/2 |x|^2 + weight |x|_1 with its Lipschitz constant taken as
// the largest subgradient norm over `box`.
NonsmoothOuter elastic_net(double sigma, double weight, const Box& box);
double elastic_net_lipschitz(double sigma, double weight, const Box& box);

}  // namespace catalog

/// Moreau envelope value M_{s w}(x) = w(u) + |u - x|^2 / (2s), u = prox_{s w}(x).
double moreau_value(const ProxFunction& w, double s, const Vector& x);

/// Gradient of the Moreau envelope, (x - prox_{s w}(x)) / s.
Vector moreau_gradient(const ProxFunction& w, double s, const Vector& x);

/// The Moreau envelope of a strongly convex outer objective as a smooth
/// function: gradient Lipschitz 1/s, strong convexity sigma / (1 + s sigma).
SmoothFunction smooth_from_nonsmooth(const NonsmoothOuter& w, double s);

}  // namespace bigsam
