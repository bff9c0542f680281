#pragma once

#include "bigsam/functions.hpp"
#include "bigsam/problems.hpp"
#include "bigsam/solver.hpp"

#include <optional>
#include <vector>

namespace bigsam {

/// Largest dimension accepted by the enumeration oracles.
inline constexpr Index kMaxEnumerationDimension = 12;

// Lawson-Hanson active-set solver for min |A x - b| subject to x >= 0.
struct NnlsResult {
  Vector x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};
NnlsResult nnls(const Matrix& A, const Vector& b, int max_iterations = 0);

// min 1/2 x^T H x + g^T x subject to x >= 0 for symmetric positive definite H,
// solved exactly through nnls on the Cholesky factor.
NnlsResult nonneg_qp(const Matrix& H, const Vector& g);

// Optimal set of min |A x - b|^2 over x >= 0:
//   X* = { x >= 0 : A x = image, x_i = 0 for i in zero_coords }.
// The residual A x - b is the same at every optimal point, so the image
// describes the set completely; zero_coords are the coordinates whose
// multiplier 2 A^T (A x - b) is strictly positive.
struct SolutionSet {
  Matrix A;
  Vector image;
  std::vector<Index> zero_coords;
  Vector particular;  // one point of X*
  Matrix null_basis;  // orthonormal basis of null(A)
  double phi_star = 0.0;

  Index dimension() const { return A.cols(); }
  Index null_dimension() const { return null_basis.cols(); }
  bool contains(const Vector& x, double tol = 1e-9) const;
  // Vertices of the polyhedron (supports with linearly independent columns).
  std::vector<Vector> vertices(double tol = 1e-9) const;
  // False when X* contains a ray.
  bool bounded() const;
};

struct InnerSolution {
  double phi_star = 0.0;
  SolutionSet set;
};

// Enumerates all 2^n supports; each one is an unconstrained least-squares
// problem on the free variables. Refuses n > kMaxEnumerationDimension.
InnerSolution solve_inner_exact(const Matrix& A, const Vector& b);

struct OuterSolution {
  Vector x_mn;
  double omega_star = 0.0;
};

// Minimizes a strongly convex quadratic over X* by enumerating which of the
// remaining nonnegativity constraints are active. Each candidate is an
// equality-constrained QP solved in the null space of A restricted to the
// support.
OuterSolution solve_outer_exact(const SolutionSet& set, const QuadraticForm& outer);

enum class OracleMethod { ActiveSetEnumeration, HighAccuracyPG };

std::string_view to_string(OracleMethod m);

struct OracleSolution {
  double phi_star = 0.0;
  std::optional<SolutionSet> xstar;  // only for enumeration
  Vector x_mn;                       // x_ref for the high-accuracy path
  double omega_star = 0.0;           // lower bound for the high-accuracy path
  OracleMethod method = OracleMethod::ActiveSetEnumeration;
  bool approximate = false;
};

struct LowerBound {
  double value = 0.0;
  double multiplier = 0.0;
  Vector x;  // minimizer of the Lagrangian at the returned multiplier
  bool approximate = false;
};

// Lower bound on min omega over X* via the relaxation
//   min { omega(x) : x >= 0, |A x - b|^2 <= phi* (1 + mu) }.
// Every evaluated dual value is a valid bound; the best one is returned. The
// result is flagged approximate when the multiplier search does not close
// the complementarity gap to 1e-8 within the budget.
LowerBound omega_lower_bound(const Matrix& A, const Vector& b, const QuadraticForm& outer,
                             double phi_star, double mu = 1e-4, int max_bisections = 200);

struct ReferenceOptions {
  long budget = 1000000;
  double residual_target = 1e-12;
  // Record phi every `history_every` iterations (0 = never).
  long history_every = 0;
};

struct ReferenceSolution {
  double phi_ref = 0.0;
  Vector x_ref;
  long iterations = 0;
  double residual = 0.0;
  bool reference_grade = false;  // residual target reached
  std::vector<double> history;
};

// Plain projected gradient on |A x - b|^2 over x >= 0 with t = 1/L_f from 0.
ReferenceSolution high_accuracy_reference(const Matrix& A, const Vector& b,
                                          const ReferenceOptions& options = {});

// Enumeration for n <= kMaxEnumerationDimension; otherwise the projected
// gradient reference for phi* and the relaxation bound for omega*.
OracleSolution solve_reference(const LeastSquaresInstance& inst, const QuadraticForm& outer,
                               const ReferenceOptions& options = {}, double mu = 1e-4);

// ---------------------------------------------------------------------------
// Rate-bound constants for averaging runs with a known fixed point x~ of T.
//   C = max{ |x0 - x~|, |x~ - S(x~)| / (1 - beta) },  J = floor(2 / (1 - beta))
struct RateBounds {
  double radius = 0.0;  // C
  double beta = 0.0;
  double step_inner = 0.0;
  long J = 0;

  static RateBounds compute(const Vector& x0, const Vector& fixed_point,
                            const Vector& contraction_at_fixed_point, double beta,
                            double step_inner);

  // |x^k - x^{k-1}| <= 2 C J / ((1 - beta) k)
  double step_residual(long k) const;
  // |y^k - x^{k-1}| <= 2 C (J + 2) / ((1 - beta) k)
  double map_residual(long k) const;
  // phi(y^k) - phi* <= 2 C^2 (J + 2) / ((k + 1)(1 - beta) t)
  double value_gap(long k) const;
};

}  // namespace bigsam
