#include "bigsam/oracle.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace bigsam;
using testing::Rng;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Matrix mat(Index m, Index n, std::initializer_list<double> xs) {
  Matrix a(m, n);
  auto it = xs.begin();
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = *it++;
  return a;
}

LeastSquaresInstance tiny(std::uint64_t seed, Index m = 6, Index n = 4, Index rank = 2) {
  return add_noise(generate_rank_deficient_ls(m, n, rank, 0.6, seed), 0.05, seed + 1000);
}

bool contains_point(const std::vector<Vector>& pts, const Vector& p, double tol = 1e-9) {
  for (const Vector& v : pts)
    if ((v - p).norm() < tol) return true;
  return false;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("nnls satisfies the KKT conditions and agrees with projected gradient") {
  Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const Index m = rng.integer(3, 10), n = rng.integer(2, 8);
    const Matrix a = rng.matrix(m, n);
    const Vector b = rng.vector(m, 2.0);
    const NnlsResult r = nnls(a, b);
    CHECK(r.converged);
    CHECK(r.x.minCoeff() >= 0.0);
    const Vector w = a.transpose() * (b - a * r.x);
    for (Index i = 0; i < n; ++i) {
      CHECK(w[i] <= 1e-9);
      if (r.x[i] > 0.0) CHECK(std::abs(w[i]) <= 1e-9);
    }
    CHECK(r.residual_norm == doctest::Approx((a * r.x - b).norm()));
    if (m >= n) {  // unique minimizer
      const Vector pg = testing::nnls_by_projected_gradient(a, b, 100000);
      CHECK((pg - r.x).norm() < 1e-6);
    }
  }
}

TEST_CASE("nnls on degenerate inputs") {
  CHECK(nnls(Matrix::Zero(3, 2), vec({1, 2, 3})).x.norm() == 0.0);
  CHECK(nnls(mat(2, 2, {1, 0, 0, 1}), vec({-1, -1})).x.norm() == 0.0);
  const NnlsResult dup = nnls(mat(2, 2, {1, 1, 1, 1}), vec({2, 2}));
  CHECK((mat(2, 2, {1, 1, 1, 1}) * dup.x - vec({2, 2})).norm() < 1e-12);
  CHECK_THROWS_AS(nnls(Matrix::Identity(2, 2), vec({1})), ConfigError);
}

TEST_CASE("nonnegative QP through the Cholesky factor") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = rng.spd(5, 0.3);
    const Vector g = rng.vector(5);
    const Vector x = nonneg_qp(h, g).x;
    const Vector grad = h * x + g;
    CHECK(x.minCoeff() >= 0.0);
    for (Index i = 0; i < 5; ++i) {
      CHECK(grad[i] >= -1e-9);
      if (x[i] > 1e-12) CHECK(std::abs(grad[i]) < 1e-9);
    }
  }
  CHECK_THROWS_AS(nonneg_qp(-Matrix::Identity(2, 2), vec({1, 1})), NumericalError);
}

TEST_CASE("inner oracle: consistent underdetermined system") {
  const InnerSolution s = solve_inner_exact(mat(1, 2, {1, 1}), vec({2}));
  CHECK(s.phi_star < 1e-24);
  CHECK(s.set.zero_coords.empty());
  CHECK(s.set.null_dimension() == 1);
  CHECK(s.set.contains(vec({2, 0})));
  CHECK(s.set.contains(vec({0.5, 1.5})));
  CHECK_FALSE(s.set.contains(vec({3, -1})));
  CHECK_FALSE(s.set.contains(vec({1, 2})));
  const auto verts = s.set.vertices();
  CHECK(verts.size() == 2);
  CHECK(contains_point(verts, vec({2, 0})));
  CHECK(contains_point(verts, vec({0, 2})));
  CHECK(s.set.bounded());
}

TEST_CASE("inner oracle: full-rank interior solution is a singleton") {
  const Matrix a = mat(3, 2, {1, 0, 0, 1, 1, 1});
  const Vector xhat = vec({0.7, 1.3});
  const Vector b = a * xhat + vec({0.1, 0.1, -0.1});
  const Vector ls = a.colPivHouseholderQr().solve(b);
  const InnerSolution s = solve_inner_exact(a, b);
  CHECK(s.phi_star == doctest::Approx((a * ls - b).squaredNorm()).epsilon(1e-12));
  CHECK(s.set.null_dimension() == 0);
  const auto verts = s.set.vertices();
  REQUIRE(verts.size() == 1);
  CHECK((verts[0] - ls).norm() < 1e-12);
  CHECK((s.set.particular - ls).norm() < 1e-12);
  CHECK(s.set.bounded());
}

TEST_CASE("inner oracle: unreducible residual and an unbounded face") {
  const InnerSolution s = solve_inner_exact(mat(2, 2, {1, 0, 0, 0}), vec({1, 1}));
  CHECK(s.phi_star == doctest::Approx(1.0));
  CHECK(s.set.contains(vec({1, 0})));
  CHECK(s.set.contains(vec({1, 17})));
  CHECK_FALSE(s.set.contains(vec({0.9, 0})));
  CHECK_FALSE(s.set.bounded());
  const auto verts = s.set.vertices();
  REQUIRE(verts.size() == 1);
  CHECK((verts[0] - vec({1, 0})).norm() < 1e-12);
}

TEST_CASE("inner oracle: active multipliers fix coordinates at zero") {
  // Column 2 points against b: its multiplier is positive, x2 = 0 on X*.
  const InnerSolution s = solve_inner_exact(mat(2, 2, {1, -1, 0, 0}), vec({1, 0}));
  CHECK(s.phi_star < 1e-24);
  REQUIRE(s.set.zero_coords.empty());  // x = (1 + x2, x2) is optimal for any x2 >= 0
  const InnerSolution t = solve_inner_exact(mat(2, 2, {1, 0, 0, 1}), vec({1, -1}));
  REQUIRE(t.set.zero_coords.size() == 1);
  CHECK(t.set.zero_coords[0] == 1);
  CHECK(t.phi_star == doctest::Approx(1.0));
}

TEST_CASE("boundedness agrees with a direct ray search") {
  // X* is unbounded iff some d >= 0, d != 0 has A d = 0. With null(A) spanned
  // by one vector v this happens iff v or -v is nonnegative.
  const InnerSolution u = solve_inner_exact(mat(1, 2, {1, -1}), vec({0}));
  CHECK_FALSE(u.set.bounded());
  const InnerSolution b = solve_inner_exact(mat(1, 2, {1, 1}), vec({1}));
  CHECK(b.set.bounded());
  const InnerSolution c = solve_inner_exact(mat(2, 3, {1, 0, 1, 0, 1, -1}), vec({1, 1}));
  CHECK(c.set.bounded());  // null(A) = span(-1, 1, 1)
  const InnerSolution d = solve_inner_exact(mat(2, 3, {1, 0, -1, 0, 1, -1}), vec({1, 1}));
  CHECK_FALSE(d.set.bounded());  // null(A) = span(1, 1, 1)
}

TEST_CASE("inner oracle refuses large dimensions") {
  CHECK_THROWS_AS(solve_inner_exact(Matrix::Identity(13, 13), Vector::Ones(13)), ConfigError);
  CHECK_NOTHROW(solve_inner_exact(Matrix::Identity(12, 12), Vector::Ones(12)));
}

TEST_CASE("inner oracle matches projected gradient and every described point is optimal") {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const LeastSquaresInstance inst = tiny(seed);
    const InnerSolution s = solve_inner_exact(inst.A, inst.b);
    const Vector pg = testing::nnls_by_projected_gradient(inst.A, inst.b, 200000);
    CHECK(std::abs(inst.objective(pg) - s.phi_star) < 1e-10);
    CHECK(s.set.contains(s.set.particular));
    const auto verts = s.set.vertices();
    REQUIRE(!verts.empty());
    Rng rng(seed);
    for (int i = 0; i < 50; ++i) {
      Vector w(static_cast<Index>(verts.size()));
      for (Index j = 0; j < w.size(); ++j) w[j] = rng.uniform();
      w /= w.sum();
      Vector p = Vector::Zero(inst.A.cols());
      for (Index j = 0; j < w.size(); ++j) p += w[j] * verts[static_cast<std::size_t>(j)];
      CHECK(std::abs(inst.objective(p) - s.phi_star) < 1e-9);
      CHECK(s.set.contains(p, 1e-8));
    }
  }
}

TEST_CASE("outer oracle examples on the segment") {
  const InnerSolution s = solve_inner_exact(mat(1, 2, {1, 1}), vec({2}));
  const OuterSolution a = solve_outer_exact(s.set, QuadraticForm(Matrix::Identity(2, 2)));
  CHECK((a.x_mn - vec({1, 1})).norm() < 1e-12);
  CHECK(a.omega_star == doctest::Approx(1.0));

  // omega = 1/2 ((x1 - 3)^2 + x2^2) = 1/2 |x|^2 - 3 x1 + 4.5. Candidates on the
  // three faces: the interior stationary point (2.5, -0.5) is infeasible, the
  // vertices give 0.5 at (2, 0) and 6.5 at (0, 2).
  const QuadraticForm shifted(Matrix::Identity(2, 2), vec({-3, 0}));
  const OuterSolution b = solve_outer_exact(s.set, shifted);
  CHECK((b.x_mn - vec({2, 0})).norm() < 1e-12);
  CHECK(b.omega_star + 4.5 == doctest::Approx(0.5));

  const Matrix a3 = mat(3, 2, {1, 0, 0, 1, 1, 1});
  const InnerSolution single = solve_inner_exact(a3, a3 * vec({0.5, 2.0}));
  const OuterSolution c = solve_outer_exact(single.set, shifted);
  CHECK((c.x_mn - vec({0.5, 2.0})).norm() < 1e-12);

  CHECK_THROWS_AS(solve_outer_exact(SolutionSet{}, shifted), ConfigError);
  CHECK_THROWS_AS(solve_outer_exact(s.set, QuadraticForm(Matrix::Identity(3, 3))), ConfigError);
}

TEST_CASE("outer oracle: variational inequality at every vertex") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const LeastSquaresInstance inst = tiny(seed, 7, 5, 3);
    const InnerSolution s = solve_inner_exact(inst.A, inst.b);
    const QuadraticForm q = quadratic_outer_from_operator(FirstDifferenceOperator(5));
    const OuterSolution o = solve_outer_exact(s.set, q);
    CHECK(s.set.contains(o.x_mn, 1e-8));
    CHECK(o.omega_star == doctest::Approx(q.value(o.x_mn)));
    const Vector g = q.gradient(o.x_mn);
    for (const Vector& v : s.set.vertices()) CHECK(g.dot(v - o.x_mn) >= -1e-8);
  }
}

TEST_CASE("outer oracle: no grid point on the face beats it") {
  int checked = 0;
  for (std::uint64_t seed = 1; checked < 6; ++seed) {
    REQUIRE(seed < 100);
    const LeastSquaresInstance inst = tiny(seed, 5, 4, 2);
    const InnerSolution s = solve_inner_exact(inst.A, inst.b);
    if (!s.set.bounded()) continue;  // a ray in null(A) meets the orthant
    ++checked;
    const QuadraticForm q = quadratic_outer_from_operator(FirstDifferenceOperator(4));
    const OuterSolution o = solve_outer_exact(s.set, q);

    // Parametrize the face by an orthonormal basis of the directions that keep
    // A x fixed and the zero coordinates at zero.
    Matrix cons(inst.A.rows() + static_cast<Index>(s.set.zero_coords.size()), 4);
    cons.setZero();
    cons.topRows(inst.A.rows()) = inst.A;
    for (std::size_t i = 0; i < s.set.zero_coords.size(); ++i)
      cons(inst.A.rows() + static_cast<Index>(i), s.set.zero_coords[i]) = 1.0;
    Eigen::JacobiSVD<Matrix> svd(cons, Eigen::ComputeFullV);
    Index rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()[rank] > 1e-10) ++rank;
    const Matrix basis = svd.matrixV().rightCols(4 - rank);
    REQUIRE(basis.cols() <= 2);

    const Vector base = o.x_mn;
    std::vector<Vector> verts = s.set.vertices();
    Vector lo = Vector::Constant(basis.cols(), kInfinity), hi = -lo;
    for (const Vector& v : verts) {
      const Vector z = basis.transpose() * (v - base);
      lo = lo.cwiseMin(z);
      hi = hi.cwiseMax(z);
    }
    const double h = 1e-3;
    double best = kInfinity;
    auto visit = [&](const Vector& z) {
      const Vector x = base + basis * z;
      if (x.minCoeff() < 0.0) return;
      best = std::min(best, q.value(x));
    };
    if (basis.cols() == 0) {
      visit(Vector::Zero(0));
    } else if (basis.cols() == 1) {
      for (double a = lo[0]; a <= hi[0]; a += h) visit(vec({a}));
    } else {
      for (double a = lo[0]; a <= hi[0]; a += h)
        for (double b = lo[1]; b <= hi[1]; b += h) visit(vec({a, b}));
    }
    CHECK(best >= o.omega_star - 1e-6);
  }
}

TEST_CASE("nonsmooth-mode optimum over the face stays within delta") {
  // X* = segment {x >= 0, x1 + 2 x2 = 2}, omega = 1/2 sigma |x|^2 + |x|_1.
  const Matrix a = mat(1, 2, {1, 2});
  const InnerSolution s = solve_inner_exact(a, vec({2}));
  const double sigma = 1.0;
  const Box box = Box::symmetric(2, 3.0);
  const NonsmoothOuter w = catalog::elastic_net(sigma, 1.0, box);
  // On the orthant omega is the quadratic 1/2 |x|^2 + 1^T x.
  const OuterSolution exact = solve_outer_exact(s.set, QuadraticForm(Matrix::Identity(2, 2), vec({1, 1})));
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const double sm = 2.0 * delta / (w.lipschitz_value() * w.lipschitz_value());
    double best_env = kInfinity;
    Vector xs;
    for (int i = 0; i <= 1000000; ++i) {
      const double x2 = i * 1e-6;
      const Vector x = vec({2.0 - 2.0 * x2, x2});
      const double m = moreau_value(w.as_prox(), sm, x);
      if (m < best_env) {
        best_env = m;
        xs = x;
      }
    }
    CHECK(w.value(xs) - exact.omega_star <= delta + 1e-8);
  }
}

TEST_CASE("omega lower bound") {
  const QuadraticForm q3 = quadratic_outer_from_operator(FirstDifferenceOperator(4));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LeastSquaresInstance inst = tiny(seed);
    const InnerSolution s = solve_inner_exact(inst.A, inst.b);
    const OuterSolution o = solve_outer_exact(s.set, q3);
    const LowerBound lb = omega_lower_bound(inst.A, inst.b, q3, s.phi_star);
    CHECK(lb.value <= o.omega_star + 1e-6);
    CHECK(lb.value >= 0.0);
    CHECK_FALSE(lb.approximate);
    // Monotone in mu.
    const LowerBound loose = omega_lower_bound(inst.A, inst.b, q3, s.phi_star, 1e-1);
    CHECK(loose.value <= lb.value + 1e-9);
    // Large mu: the constraint is inactive and the bound is the orthant minimum, 0.
    const LowerBound huge = omega_lower_bound(inst.A, inst.b, q3, s.phi_star, 1e9);
    CHECK(huge.value <= 1e-12);
  }
  // Singleton X* with mu = 0: the bound is omega at the singleton.
  const Matrix a = mat(3, 2, {1, 0, 0, 1, 1, 1});
  const Vector b = a * vec({0.5, 2.0}) + vec({0.01, -0.02, 0.01});
  const InnerSolution s = solve_inner_exact(a, b);
  const QuadraticForm q(Matrix::Identity(2, 2));
  const OuterSolution o = solve_outer_exact(s.set, q);
  const LowerBound lb = omega_lower_bound(a, b, q, s.phi_star, 0.0);
  CHECK(lb.value == doctest::Approx(o.omega_star).epsilon(1e-6));
  CHECK_THROWS_AS(omega_lower_bound(a, b, q, -1.0), ConfigError);
  CHECK_THROWS_AS(omega_lower_bound(a, b, q, 1.0, -1.0), ConfigError);
}

TEST_CASE("high-accuracy reference") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const LeastSquaresInstance inst = tiny(seed);
    const InnerSolution s = solve_inner_exact(inst.A, inst.b);
    ReferenceOptions opts;
    opts.history_every = 1;
    opts.budget = 200000;
    const ReferenceSolution ref = high_accuracy_reference(inst.A, inst.b, opts);
    CHECK(std::abs(ref.phi_ref - s.phi_star) <= 1e-10);
    for (std::size_t i = 1; i < ref.history.size(); ++i)
      CHECK(ref.history[i] <= ref.history[i - 1] + 1e-15);
  }
  const LeastSquaresInstance clean = generate_rank_deficient_ls(6, 4, 2, 0.6, 3);
  CHECK(high_accuracy_reference(clean.A, clean.b).phi_ref <= 1e-10);
  ReferenceOptions bad;
  bad.budget = 0;
  CHECK_THROWS_AS(high_accuracy_reference(clean.A, clean.b, bad), ConfigError);
  ReferenceOptions small;
  small.budget = 3;
  const ReferenceSolution r = high_accuracy_reference(clean.A, clean.b, small);
  CHECK(r.iterations == 3);
  CHECK_FALSE(r.reference_grade);
}

TEST_CASE("solve_reference chooses the method by size") {
  const LeastSquaresInstance small = tiny(4);
  const OracleSolution a = solve_reference(small, quadratic_outer_from_operator(FirstDifferenceOperator(4)));
  CHECK(a.method == OracleMethod::ActiveSetEnumeration);
  CHECK(a.xstar.has_value());
  CHECK_FALSE(a.approximate);
  CHECK(to_string(a.method) == "active-set-enumeration");

  const LeastSquaresInstance big =
      add_noise(generate_rank_deficient_ls(16, 13, 8, 0.8, 1), 0.01, 2);
  ReferenceOptions opts;
  opts.budget = 200000;
  const OracleSolution b = solve_reference(big, quadratic_outer_from_operator(FirstDifferenceOperator(13)), opts);
  CHECK(b.method == OracleMethod::HighAccuracyPG);
  CHECK_FALSE(b.xstar.has_value());
  CHECK(to_string(b.method) == "high-accuracy-pg");
  CHECK(b.phi_star > 0.0);
  CHECK(b.omega_star <= quadratic_outer_from_operator(FirstDifferenceOperator(13)).value(b.x_mn) + 1e-6);
}

TEST_CASE("rate bound constants") {
  const RateBounds rb = RateBounds::compute(vec({0, 0}), vec({3, 4}), vec({3, 1}), 0.5, 0.25);
  // C = max(5, 3 / 0.5) = 6, J = floor(4) = 4
  CHECK(rb.radius == doctest::Approx(6.0));
  CHECK(rb.J == 4);
  CHECK(rb.step_residual(10) == doctest::Approx(2.0 * 6.0 * 4.0 / (0.5 * 10.0)));
  CHECK(rb.map_residual(10) == doctest::Approx(2.0 * 6.0 * 6.0 / (0.5 * 10.0)));
  CHECK(rb.value_gap(10) == doctest::Approx(2.0 * 36.0 * 6.0 / (11.0 * 0.5 * 0.25)));
  CHECK_THROWS_AS(RateBounds::compute(vec({0}), vec({0}), vec({0}), 1.0, 1.0), ConfigError);
}

}  // TEST_SUITE
