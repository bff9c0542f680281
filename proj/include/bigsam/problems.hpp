#pragma once

#include "bigsam/functions.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace bigsam {

/// Inner problem min f + g and an outer objective omega, all on R^n.
struct BilevelProblem {
  SmoothFunction inner_smooth;
  ProxFunction inner_prox;
  OuterFunction outer;
  Index dimension;

  double inner_objective(const Vector& x) const {
    return inner_smooth.value(x) + inner_prox.value(x);
  }
  double outer_objective(const Vector& x) const { return outer_value(outer, x); }
  bool nonsmooth_outer() const { return std::holds_alternative<NonsmoothOuter>(outer); }
};

/// Least-squares data for f(x) = |A x - b|^2.
struct LeastSquaresInstance {
  Matrix A;
  Vector b;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  // Set by the generator; b = A x_true before noise.
  std::optional<Vector> x_true;

  // L_f = 2 * (largest singular value of A)^2
  double lipschitz() const;
  double objective(const Vector& x) const { return (A * x - b).squaredNorm(); }
  SmoothFunction smooth() const;
};

/// Noise standard deviations used for the inverse-problem experiments.
inline constexpr std::array<double, 3> kNoiseGrid{1e-1, 1e-2, 1e-3};

/// Name of the standard-normal generator, recorded in run metadata so seeds
/// can be reproduced.
inline constexpr const char* kNormalAlgorithm = "marsaglia-polar over mt19937_64 (53-bit uniforms)";

// Deterministic standard normals. The same seed yields the same stream on
// every platform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed);
  double next();
  double uniform();  // [0, 1)

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// A = U diag(sv) V^T with sv_i = sv_decay^(i-1) for i <= rank, b = A x_true,
// x_true uniform on [0, 1)^n. Requires 1 <= rank <= min(m, n).
LeastSquaresInstance generate_rank_deficient_ls(Index m, Index n, Index rank, double sv_decay,
                                                std::uint64_t seed);

// b <- b + rho * eps with eps standard normal drawn from `seed`. rho = 0 is
// the identity.
LeastSquaresInstance add_noise(const LeastSquaresInstance& inst, double rho, std::uint64_t seed);

// (n-1) x n forward difference: row i has +1 at column i and -1 at i+1.
class FirstDifferenceOperator {
 public:
  explicit FirstDifferenceOperator(Index n);
  Index dimension() const { return n_; }
  Matrix matrix() const;

 private:
  Index n_;
};

// omega(x) = 1/2 x^T Q x with Q = D^T D + I (n x n), D the first difference.
QuadraticForm quadratic_outer_from_operator(const FirstDifferenceOperator& op);

// f = |Ax - b|^2, g = indicator of the nonnegative orthant.
BilevelProblem make_nonneg_ls_problem(const LeastSquaresInstance& inst, OuterFunction outer);

// ---------------------------------------------------------------------------
// File ingestion

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class MatrixFormat { MatrixMarket, Csv };

MatrixFormat format_from_path(const std::filesystem::path& path);
Matrix load_matrix(const std::filesystem::path& path, MatrixFormat format);
Matrix load_matrix(const std::filesystem::path& path);
Matrix parse_matrix(std::istream& in, MatrixFormat format, const std::string& name = "<stream>");

// Loads A and b; b must be a single column with A.rows() entries.
LeastSquaresInstance load_least_squares(const std::filesystem::path& matrix_path,
                                        const std::filesystem::path& rhs_path);

void write_matrix_market(const std::filesystem::path& path, const Matrix& m);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace bigsam
