#include "bigsam/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace bigsam {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::vector<Index> support_of(unsigned mask, const std::vector<Index>& pool) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (mask & (1u << i)) out.push_back(pool[i]);
  return out;
}

Matrix columns(const Matrix& A, const std::vector<Index>& cols) {
  Matrix out(A.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = A.col(cols[j]);
  return out;
}

Vector scatter(const Vector& values, const std::vector<Index>& cols, Index n) {
  Vector x = Vector::Zero(n);
  for (std::size_t j = 0; j < cols.size(); ++j) x[cols[j]] = values[static_cast<Index>(j)];
  return x;
}

// Orthonormal basis of null(M) from a full SVD.
Matrix null_space(const Matrix& M, double rel_tol = 1e-10) {
  if (M.cols() == 0) return Matrix(0, 0);
  if (M.rows() == 0) return Matrix::Identity(M.cols(), M.cols());
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thresh = rel_tol * std::max(1.0, sv.size() ? sv[0] : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > thresh) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

std::vector<Index> complement(const std::vector<Index>& excluded, Index n) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (std::find(excluded.begin(), excluded.end(), i) == excluded.end()) out.push_back(i);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// NNLS

NnlsResult nnls(const Matrix& A, const Vector& b, int max_iterations) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (b.size() != m) throw ConfigError("nnls: A and b sizes differ");
  if (max_iterations <= 0) max_iterations = static_cast<int>(30 * n + 30);

  NnlsResult res;
  res.x = Vector::Zero(n);
  std::vector<bool> passive(n, false);
  std::vector<bool> blocked(n, false);
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  const double tol = 10.0 * kEps * std::max(norm1, 1.0) * static_cast<double>(std::max(m, n));

  auto passive_set = [&] {
    std::vector<Index> p;
    for (Index i = 0; i < n; ++i)
      if (passive[i]) p.push_back(i);
    return p;
  };
  auto solve_on = [&](const std::vector<Index>& p) {
    if (p.empty()) return Vector(Vector::Zero(n));
    const Matrix ap = columns(A, p);
    const Vector sp = ap.colPivHouseholderQr().solve(b);
    return scatter(sp, p, n);
  };

  Vector w = A.transpose() * (b - A * res.x);
  while (res.iterations < max_iterations) {
    Index j = -1;
    double best = tol;
    for (Index i = 0; i < n; ++i)
      if (!passive[i] && !blocked[i] && w[i] > best) {
        best = w[i];
        j = i;
      }
    if (j < 0) {
      res.converged = true;
      break;
    }
    passive[j] = true;
    Vector s = solve_on(passive_set());
    if (s[j] <= 0.0) {
      // Degenerate entry; the column cannot improve the fit from here.
      passive[j] = false;
      blocked[j] = true;
      continue;
    }
    while (res.iterations < max_iterations) {
      ++res.iterations;
      bool feasible = true;
      for (Index i = 0; i < n; ++i)
        if (passive[i] && s[i] <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (Index i = 0; i < n; ++i)
        if (passive[i] && s[i] <= 0.0) alpha = std::min(alpha, res.x[i] / (res.x[i] - s[i]));
      res.x += alpha * (s - res.x);
      for (Index i = 0; i < n; ++i)
        if (passive[i] && res.x[i] <= tol) {
          passive[i] = false;
          res.x[i] = 0.0;
        }
      s = solve_on(passive_set());
    }
    res.x = s;
    for (Index i = 0; i < n; ++i)
      if (!passive[i]) res.x[i] = 0.0;
    std::fill(blocked.begin(), blocked.end(), false);
    w = A.transpose() * (b - A * res.x);
  }
  res.residual_norm = (A * res.x - b).norm();
  return res;
}

NnlsResult nonneg_qp(const Matrix& H, const Vector& g) {
  if (H.rows() != H.cols() || H.rows() != g.size()) throw ConfigError("nonneg_qp: size mismatch");
  Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw NumericalError("nonneg_qp: H is not positive definite");
  const Matrix upper = llt.matrixU();
  const Vector d = -llt.matrixL().solve(g);
  return nnls(upper, d);
}

// ---------------------------------------------------------------------------
// SolutionSet

bool SolutionSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  if ((x.array() < -tol).any()) return false;
  for (Index i : zero_coords)
    if (std::abs(x[i]) > tol) return false;
  return (A * x - image).norm() <= tol * std::max(1.0, image.norm());
}

std::vector<Vector> SolutionSet::vertices(double tol) const {
  const Index n = dimension();
  const std::vector<Index> free = complement(zero_coords, n);
  const double scale = std::max(1.0, image.norm());
  std::vector<Vector> out;
  const unsigned count = 1u << free.size();
  for (unsigned mask = 0; mask < count; ++mask) {
    const auto support = support_of(mask, free);
    Vector x;
    if (support.empty()) {
      if (image.norm() > tol * scale) continue;
      x = Vector::Zero(n);
    } else {
      const Matrix af = columns(A, support);
      Eigen::FullPivLU<Matrix> lu(af);
      lu.setThreshold(1e-10);
      if (lu.rank() != static_cast<Index>(support.size())) continue;
      const Vector xf = af.colPivHouseholderQr().solve(image);
      if ((af * xf - image).norm() > tol * scale) continue;
      if ((xf.array() < -tol).any()) continue;
      x = scatter(xf.cwiseMax(0.0), support, n);
    }
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Vector& v) {
      return (v - x).cwiseAbs().maxCoeff() <= tol * std::max(1.0, x.cwiseAbs().maxCoeff());
    });
    if (!duplicate) out.push_back(std::move(x));
  }
  return out;
}

bool SolutionSet::bounded() const {
  // A ray d >= 0, d != 0 with A d = 0 exists iff min |A d| over the simplex
  // on the free coordinates is zero.
  const std::vector<Index> free = complement(zero_coords, dimension());
  if (free.empty()) return true;
  const Matrix af = columns(A, free);
  const double weight = 1e3 * std::max(1.0, af.norm());
  Matrix aug(af.rows() + 1, af.cols());
  aug.topRows(af.rows()) = af;
  aug.row(af.rows()).setConstant(weight);
  Vector rhs = Vector::Zero(af.rows() + 1);
  rhs[af.rows()] = weight;
  const NnlsResult r = nnls(aug, rhs);
  return (af * r.x).norm() > 1e-9 * std::max(1.0, af.norm());
}

// ---------------------------------------------------------------------------
// Enumeration oracles

InnerSolution solve_inner_exact(const Matrix& A, const Vector& b) {
  const Index n = A.cols();
  if (n > kMaxEnumerationDimension) {
    std::ostringstream msg;
    msg << "solve_inner_exact: n = " << n << " exceeds the enumeration limit "
        << kMaxEnumerationDimension;
    throw ConfigError(msg.str());
  }
  if (n < 1 || b.size() != A.rows()) throw ConfigError("solve_inner_exact: bad dimensions");

  std::vector<Index> all(n);
  for (Index i = 0; i < n; ++i) all[i] = i;

  double best = kInfinity;
  Vector best_x;
  const unsigned count = 1u << n;
  for (unsigned mask = 0; mask < count; ++mask) {
    const auto support = support_of(mask, all);
    Vector x = Vector::Zero(n);
    if (!support.empty()) {
      const Matrix af = columns(A, support);
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(af);
      cod.setThreshold(1e-12);
      const Vector xf = cod.solve(b);
      const double feas_tol = 1e-12 * std::max(1.0, xf.cwiseAbs().maxCoeff());
      if ((xf.array() < -feas_tol).any()) continue;
      x = scatter(xf.cwiseMax(0.0), support, n);
    }
    const double value = (A * x - b).squaredNorm();
    if (best_x.size() == 0 || value < best - 1e-14 * std::max(1.0, std::abs(best))) {
      best = value;
      best_x = std::move(x);
    }
  }

  InnerSolution sol;
  SolutionSet& set = sol.set;
  set.A = A;
  set.image = A * best_x;
  set.particular = best_x;
  set.null_basis = null_space(A);
  const Vector grad = 2.0 * A.transpose() * (set.image - b);
  const double grad_tol = 1e-8 * std::max(1.0, grad.cwiseAbs().maxCoeff());
  for (Index i = 0; i < n; ++i)
    if (grad[i] > grad_tol) set.zero_coords.push_back(i);
  set.phi_star = (set.image - b).squaredNorm();
  // Residuals at rounding level mean a consistent system.
  const double floor = 64.0 * kEps * std::max(1.0, b.norm());
  if (set.phi_star <= floor * floor) set.phi_star = 0.0;
  sol.phi_star = set.phi_star;
  return sol;
}

OuterSolution solve_outer_exact(const SolutionSet& set, const QuadraticForm& outer) {
  const Index n = set.dimension();
  if (n == 0 || set.image.size() != set.A.rows())
    throw ConfigError("solve_outer_exact: empty solution-set description");
  if (outer.dimension() != n) throw ConfigError("solve_outer_exact: dimension mismatch");
  if (n > kMaxEnumerationDimension) throw ConfigError("solve_outer_exact: dimension too large");

  const std::vector<Index> free = complement(set.zero_coords, n);
  const Matrix& Q = outer.hessian();
  const Vector& c = outer.linear();
  const double scale = std::max(1.0, set.image.norm());

  double best = kInfinity;
  Vector best_x;
  const unsigned count = 1u << free.size();
  for (unsigned mask = 0; mask < count; ++mask) {
    const auto support = support_of(mask, free);
    Vector x = Vector::Zero(n);
    if (support.empty()) {
      if (set.image.norm() > 1e-10 * scale) continue;
    } else {
      const Matrix af = columns(set.A, support);
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(af);
      cod.setThreshold(1e-12);
      Vector xf = cod.solve(set.image);
      if ((af * xf - set.image).norm() > 1e-10 * scale) continue;
      const Matrix basis = null_space(af);
      if (basis.cols() > 0) {
        Matrix qf(support.size(), support.size());
        Vector cf(support.size());
        for (std::size_t i = 0; i < support.size(); ++i) {
          cf[static_cast<Index>(i)] = c[support[i]];
          for (std::size_t j = 0; j < support.size(); ++j)
            qf(static_cast<Index>(i), static_cast<Index>(j)) = Q(support[i], support[j]);
        }
        const Matrix reduced = basis.transpose() * qf * basis;
        const Vector rhs = -basis.transpose() * (qf * xf + cf);
        Eigen::LLT<Matrix> llt(reduced);
        if (llt.info() != Eigen::Success)
          throw NumericalError("solve_outer_exact: reduced Hessian is not positive definite");
        xf += basis * llt.solve(rhs);
      }
      const double feas_tol = 1e-12 * std::max(1.0, xf.cwiseAbs().maxCoeff());
      if ((xf.array() < -feas_tol).any()) continue;
      x = scatter(xf.cwiseMax(0.0), support, n);
    }
    const double value = outer.value(x);
    if (best_x.size() == 0 || value < best - 1e-14 * std::max(1.0, std::abs(best))) {
      best = value;
      best_x = std::move(x);
    }
  }
  if (!std::isfinite(best)) throw NumericalError("solve_outer_exact: no feasible face found");
  return OuterSolution{best_x, best};
}

std::string_view to_string(OracleMethod m) {
  return m == OracleMethod::ActiveSetEnumeration ? "active-set-enumeration" : "high-accuracy-pg";
}

// ---------------------------------------------------------------------------
// Large-instance references

LowerBound omega_lower_bound(const Matrix& A, const Vector& b, const QuadraticForm& outer,
                             double phi_star, double mu, int max_bisections) {
  if (!(phi_star >= 0.0)) throw ConfigError("omega_lower_bound: phi_star must be nonnegative");
  if (!(mu >= 0.0)) throw ConfigError("omega_lower_bound: mu must be nonnegative");
  if (outer.dimension() != A.cols() || b.size() != A.rows())
    throw ConfigError("omega_lower_bound: dimension mismatch");

  const double radius = phi_star * (1.0 + mu);
  const Matrix gram = 2.0 * A.transpose() * A;
  const Vector atb = 2.0 * A.transpose() * b;
  const double constant = b.squaredNorm();

  // Lagrangian minimizer and dual value at multiplier eta.
  struct Eval {
    double eta, dual, slope;
    Vector x;
  };
  auto evaluate = [&](double eta) {
    const Matrix H = outer.hessian() + eta * gram;
    const Vector g = outer.linear() - eta * atb;
    Vector x = nonneg_qp(H, g).x;
    const double fx = (A * x - b).squaredNorm();
    (void)constant;
    return Eval{eta, outer.value(x) + eta * (fx - radius), fx - radius, std::move(x)};
  };

  const double slope_tol = 1e-8 * std::max(1.0, radius);
  Eval lo = evaluate(0.0);
  LowerBound out{lo.dual, 0.0, lo.x, false};
  if (lo.slope <= slope_tol) return out;  // constraint inactive; bound is exact

  auto keep_best = [&](const Eval& e) {
    if (e.dual > out.value) out = LowerBound{e.dual, e.eta, e.x, false};
  };

  constexpr double kMaxMultiplier = 1e10;
  Eval hi = evaluate(1.0);
  keep_best(hi);
  int steps = 0;
  while (hi.slope > 0.0 && hi.eta < kMaxMultiplier && steps < max_bisections) {
    lo = std::move(hi);
    hi = evaluate(lo.eta * 4.0);
    keep_best(hi);
    ++steps;
  }
  if (hi.slope > 0.0) {
    out.approximate = true;
    return out;
  }
  bool closed = std::abs(hi.slope) <= slope_tol;
  while (!closed && steps < max_bisections) {
    const double mid = lo.eta > 0.0 && hi.eta / lo.eta > 4.0 ? std::sqrt(lo.eta * hi.eta)
                                                             : 0.5 * (lo.eta + hi.eta);
    Eval e = evaluate(mid);
    keep_best(e);
    ++steps;
    if (std::abs(e.slope) <= slope_tol || hi.eta - lo.eta <= 1e-14 * hi.eta) closed = true;
    if (e.slope > 0.0)
      lo = std::move(e);
    else
      hi = std::move(e);
  }
  out.approximate = !closed;
  return out;
}

ReferenceSolution high_accuracy_reference(const Matrix& A, const Vector& b,
                                          const ReferenceOptions& options) {
  if (options.budget < 1) throw ConfigError("high_accuracy_reference: budget must be positive");
  LeastSquaresInstance inst;
  inst.A = A;
  inst.b = b;
  const double t = 1.0 / inst.lipschitz();
  const Matrix at = A.transpose();

  ReferenceSolution ref;
  Vector x = Vector::Zero(A.cols());
  Vector r = A * x - b;
  for (long k = 1; k <= options.budget; ++k) {
    Vector next = (x - (2.0 * t) * (at * r)).cwiseMax(0.0);
    ref.residual = (next - x).norm();
    x = std::move(next);
    r = A * x - b;
    ref.iterations = k;
    if (options.history_every > 0 && k % options.history_every == 0)
      ref.history.push_back(r.squaredNorm());
    if (ref.residual <= options.residual_target) {
      ref.reference_grade = true;
      break;
    }
  }
  ref.phi_ref = r.squaredNorm();
  ref.x_ref = std::move(x);
  return ref;
}

OracleSolution solve_reference(const LeastSquaresInstance& inst, const QuadraticForm& outer,
                               const ReferenceOptions& options, double mu) {
  OracleSolution sol;
  if (inst.A.cols() <= kMaxEnumerationDimension) {
    InnerSolution inner = solve_inner_exact(inst.A, inst.b);
    OuterSolution best = solve_outer_exact(inner.set, outer);
    sol.phi_star = inner.phi_star;
    sol.xstar = std::move(inner.set);
    sol.x_mn = std::move(best.x_mn);
    sol.omega_star = best.omega_star;
    sol.method = OracleMethod::ActiveSetEnumeration;
    return sol;
  }
  ReferenceSolution ref = high_accuracy_reference(inst.A, inst.b, options);
  LowerBound bound = omega_lower_bound(inst.A, inst.b, outer, ref.phi_ref, mu);
  sol.phi_star = ref.phi_ref;
  sol.x_mn = std::move(ref.x_ref);
  sol.omega_star = bound.value;
  sol.method = OracleMethod::HighAccuracyPG;
  sol.approximate = !ref.reference_grade || bound.approximate;
  return sol;
}

// ---------------------------------------------------------------------------
// Rate bounds

RateBounds RateBounds::compute(const Vector& x0, const Vector& fixed_point,
                               const Vector& contraction_at_fixed_point, double beta,
                               double step_inner) {
  if (!(beta >= 0.0 && beta < 1.0)) throw ConfigError("RateBounds: beta must lie in [0, 1)");
  RateBounds rb;
  rb.beta = beta;
  rb.step_inner = step_inner;
  rb.radius = std::max((x0 - fixed_point).norm(),
                       (fixed_point - contraction_at_fixed_point).norm() / (1.0 - beta));
  rb.J = static_cast<long>(std::floor(2.0 / (1.0 - beta)));
  return rb;
}

double RateBounds::step_residual(long k) const {
  return 2.0 * radius * static_cast<double>(J) / ((1.0 - beta) * static_cast<double>(k));
}

double RateBounds::map_residual(long k) const {
  return 2.0 * radius * static_cast<double>(J + 2) / ((1.0 - beta) * static_cast<double>(k));
}

double RateBounds::value_gap(long k) const {
  return 2.0 * radius * radius * static_cast<double>(J + 2) /
         (static_cast<double>(k + 1) * (1.0 - beta) * step_inner);
}

}  // namespace bigsam
