#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the code under test except for the types.

#include "bigsam/functions.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace testing {

using bigsam::Index;
using bigsam::Matrix;
using bigsam::Vector;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal() { return std::normal_distribution<double>()(engine_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vector vector(Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }
  Vector box_vector(Index n, double radius) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform(-radius, radius);
    return v;
  }
  Matrix matrix(Index m, Index n) {
    Matrix a(m, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i) a(i, j) = normal();
    return a;
  }
  Matrix spd(Index n, double shift = 0.5) {
    const Matrix b = matrix(n, n);
    return b * b.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
  }

 private:
  std::mt19937_64 engine_;
};

// Central differences of a scalar function.
inline Vector finite_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                              double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Dense (n-1) x n forward difference built entry by entry.
inline Matrix difference_matrix(Index n) {
  Matrix d = Matrix::Zero(n - 1, n);
  for (Index i = 0; i + 1 < n; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -1.0;
  }
  return d;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Projected gradient for min |Ax - b|^2, x >= 0, to a tight tolerance. Used
// as an oracle independent of the enumeration code.
inline Vector nnls_by_projected_gradient(const Matrix& A, const Vector& b, long iterations) {
  const double l = 2.0 * Eigen::JacobiSVD<Matrix>(A).singularValues()[0] *
                   Eigen::JacobiSVD<Matrix>(A).singularValues()[0];
  Vector x = Vector::Zero(A.cols());
  for (long k = 0; k < iterations; ++k)
    x = (x - (2.0 / l) * A.transpose() * (A * x - b)).cwiseMax(0.0);
  return x;
}

}  // namespace testing
