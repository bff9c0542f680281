#include "bigsam/solver.hpp"

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

SolveConfig fixed_iterations(long n) {
  SolveConfig c;
  c.max_iterations = n;
  c.residual_tol = 0.0;
  return c;
}

// A tiny bilevel problem: f = |A x - b|^2 over x >= 0 with A = [1 1], b = 2,
// omega = 1/2 |x - c|^2. X* is the segment x1 + x2 = 2, x >= 0.
BilevelProblem segment_problem(const Vector& c) {
  Matrix a(1, 2);
  a << 1, 1;
  const Vector b = vec({2});
  const SmoothFunction f([a, b](const Vector& x) { return (a * x - b).squaredNorm(); },
                         [a, b](const Vector& x) { return Vector(2.0 * a.transpose() * (a * x - b)); },
                         4.0);
  const QuadraticForm omega(Matrix::Identity(2, 2), Vector(-c));
  return BilevelProblem{f, catalog::nonneg_indicator(), omega.smooth(), 2};
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("alpha schedule") {
  const AlphaSchedule a(1.0, 0.0);
  CHECK(a.at(1) == 1.0);
  CHECK(a.at(2) == 1.0);
  CHECK(a.at(4) == 0.5);
  CHECK(a.at(1000) == doctest::Approx(0.002));
  const AlphaSchedule b(0.5, 0.5);
  CHECK(b.at(1) == 1.0);
  CHECK(b.at(4) == doctest::Approx(0.5));
  CHECK(b.at(8) == doctest::Approx(0.25));
  for (long k = 1; k < 100; ++k) CHECK(b.at(k + 1) <= b.at(k));
  CHECK_THROWS_AS(AlphaSchedule(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(AlphaSchedule(1.5, 0.0), ConfigError);
  CHECK_THROWS_AS(AlphaSchedule(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(a.at(0), ConfigError);
  CHECK(kGammaPresets == std::array<double, 3>{0.1, 0.5, 1.0});
}

TEST_CASE("SAM converges to the projection of the anchor onto Fix(T)") {
  // T = projection onto the line x2 = 0, S(x) = x - (x - c) = c (beta = 0).
  const Vector c = vec({3, 4});
  VectorMap T = [](const Vector& x) { return vec({x[0], 0.0}); };
  VectorMap S = [c](const Vector&) { return c; };
  const Trajectory tr = sam_run(S, T, vec({-5, 5}), AlphaSchedule(1.0, 0.0), fixed_iterations(20000));
  CHECK((tr.last().x - vec({3, 0})).norm() < 1e-3);
  CHECK(tr.iterations == 20000);
  CHECK(tr.termination == Termination::MaxIterations);
  CHECK(tr.records.size() == 20000);
}

TEST_CASE("records hold the averaging identity") {
  Rng rng(3);
  VectorMap T = [](const Vector& x) { return Vector(x.cwiseMax(0.0)); };
  VectorMap S = [](const Vector& x) { return Vector(0.5 * x); };
  SolveConfig cfg = fixed_iterations(50);
  const Trajectory tr = sam_run(S, T, rng.vector(3), AlphaSchedule(0.3, 0.5), cfg);
  Vector prev;
  for (const IterationRecord& r : tr.records) {
    CHECK((r.x - (r.alpha * r.z + (1.0 - r.alpha) * r.y)).norm() < 1e-15);
    CHECK(r.alpha == AlphaSchedule(0.3, 0.5).at(r.k));
    if (prev.size()) {
      CHECK(r.step_residual == doctest::Approx((r.x - prev).norm()));
      CHECK(r.map_residual == doctest::Approx((r.y - prev).norm()));
    }
    CHECK(std::isnan(r.phi_y));
    prev = r.x;
  }
}

TEST_CASE("stopping rules and their order") {
  VectorMap T = [](const Vector& x) { return x; };
  VectorMap S = [](const Vector& x) { return Vector(0.5 * x); };
  const Vector x0 = vec({1.0});

  SolveConfig time = fixed_iterations(100);
  time.time_limit = std::chrono::duration<double>(0.0);
  const Trajectory t0 = sam_run(S, T, x0, AlphaSchedule(), time);
  CHECK(t0.termination == Termination::TimeLimit);
  CHECK(t0.iterations == 1);

  SolveConfig resid;
  resid.residual_tol = 1e-3;
  resid.max_iterations = 1000000;
  const Trajectory tr = sam_run(S, T, x0, AlphaSchedule(), resid);
  CHECK(tr.termination == Termination::Residual);
  CHECK(tr.last().map_residual <= 1e-3);

  // The gap rule needs phi and phi*.
  SolveConfig gap = fixed_iterations(1000);
  gap.relative_gap_tol = 0.5;
  CHECK_THROWS_AS(sam_run(S, T, x0, AlphaSchedule(), gap), ConfigError);
  gap.phi_star = 0.0;
  CHECK_THROWS_AS(sam_run(S, T, x0, AlphaSchedule(), gap), ConfigError);
  gap.phi_star = 1.0;
  Observers obs{[](const Vector& y) { return 1.0 + y.squaredNorm(); }, {}};
  const Trajectory tg = sam_run(S, T, x0, AlphaSchedule(), gap, obs);
  CHECK(tg.termination == Termination::RelativeGap);
  CHECK(tg.last().phi_y - 1.0 < 0.5);
  CHECK(std::isnan(tg.last().omega_y));
}

TEST_CASE("non-finite iterates are reported with the iteration number") {
  VectorMap T = [](const Vector& x) { return x; };
  int calls = 0;
  VectorMap S = [&calls](const Vector& x) {
    return ++calls == 3 ? Vector::Constant(x.size(), std::nan("")) : x;
  };
  try {
    sam_run(S, T, vec({1.0}), AlphaSchedule(), fixed_iterations(10));
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("iteration 3") != std::string::npos);
  }
  SolveConfig bad_x0 = fixed_iterations(10);
  CHECK_THROWS_AS(sam_run(S, T, vec({kInfinity}), AlphaSchedule(), bad_x0), ConfigError);
}

TEST_CASE("record thinning keeps every m-th record and the last one") {
  VectorMap T = [](const Vector& x) { return x; };
  VectorMap S = [](const Vector& x) { return Vector(0.5 * x); };
  SolveConfig cfg = fixed_iterations(1003);
  cfg.record_every = 100;
  const Trajectory tr = sam_run(S, T, vec({1.0}), AlphaSchedule(), cfg);
  REQUIRE(tr.records.size() == 11);
  CHECK(tr.records.front().k == 100);
  CHECK(tr.records[9].k == 1000);
  CHECK(tr.last().k == 1003);
}

TEST_CASE("config validation") {
  SolveConfig c;
  CHECK_NOTHROW(c.validate());
  auto rejects = [](auto edit) {
    SolveConfig cfg;
    edit(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  rejects([](SolveConfig& x) { x.step_inner = 0.0; });
  rejects([](SolveConfig& x) { x.step_outer = -1.0; });
  rejects([](SolveConfig& x) { x.smoothing_accuracy = 0.0; });
  rejects([](SolveConfig& x) { x.gamma = 0.0; });
  rejects([](SolveConfig& x) { x.max_iterations = 0; });
  rejects([](SolveConfig& x) { x.residual_tol = -1.0; });
  rejects([](SolveConfig& x) { x.record_every = 0; });
  rejects([](SolveConfig& x) { x.time_limit = std::chrono::duration<double>(-1.0); });
}

TEST_CASE("BiG-SAM on the segment problem reaches the outer minimizer over X*") {
  // omega = 1/2 |x - (3, 0)|^2 over {x >= 0, x1 + x2 = 2}: minimizer (2, 0).
  const BilevelProblem p = segment_problem(vec({3, 0}));
  SolveConfig cfg = fixed_iterations(200000);
  cfg.record_every = 200000;
  const Trajectory tr = bigsam_run(p, cfg);
  CHECK((tr.last().x - vec({2, 0})).norm() < 1e-4);
  CHECK(tr.step_inner == doctest::Approx(0.25));
  CHECK(tr.step_outer == doctest::Approx(1.0));
  CHECK(tr.beta == doctest::Approx(0.0));

  // Symmetric anchor: (1, 1).
  const Trajectory sym = bigsam_run(segment_problem(vec({0, 0})), cfg);
  CHECK((sym.last().x - vec({1, 1})).norm() < 1e-4);
}

TEST_CASE("BiG-SAM parameter handling") {
  const BilevelProblem p = segment_problem(vec({0, 0}));
  SolveConfig cfg = fixed_iterations(10);
  cfg.step_inner = 0.3;
  CHECK_THROWS_AS(bigsam_run(p, cfg), ConfigError);
  cfg.step_inner = 0.1;
  cfg.step_outer = 0.5;
  const Trajectory tr = bigsam_run(p, cfg);
  CHECK(tr.step_inner == 0.1);
  CHECK(tr.step_outer == 0.5);
  CHECK(tr.beta == doctest::Approx(std::sqrt(1.0 - 0.5)));
  cfg.beta_override = 0.2;
  CHECK(bigsam_run(p, cfg).beta == 0.2);
  cfg.x0 = vec({1, 2, 3});
  CHECK_THROWS_AS(bigsam_run(p, cfg), ConfigError);
}

TEST_CASE("BiG-SAM is deterministic") {
  const BilevelProblem p = segment_problem(vec({3, 1}));
  SolveConfig cfg = fixed_iterations(500);
  const Trajectory a = bigsam_run(p, cfg), b = bigsam_run(p, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].x == b.records[i].x);
    CHECK(a.records[i].phi_y == b.records[i].phi_y);
  }
}

TEST_CASE("nonsmooth outer objective uses the smoothing parameter") {
  const BilevelProblem smooth = segment_problem(vec({0, 0}));
  const Box box = Box::symmetric(2, 3.0);
  const NonsmoothOuter w = catalog::elastic_net(1.0, 1.0, box);
  const BilevelProblem p{smooth.inner_smooth, smooth.inner_prox, w, 2};
  CHECK(p.nonsmooth_outer());
  SolveConfig cfg = fixed_iterations(10);
  CHECK_THROWS_AS(bigsam_run(p, cfg), ConfigError);
  cfg.smoothing_accuracy = 0.1;
  const Trajectory tr = bigsam_run(p, cfg);
  const double ell = w.lipschitz_value();
  CHECK(tr.step_outer == doctest::Approx(0.2 / (ell * ell)));
  CHECK(tr.beta == doctest::Approx(1.0 / (1.0 + tr.step_outer)));
  cfg.step_outer = 0.7;
  CHECK(bigsam_run(p, cfg).step_outer == 0.7);
}

TEST_CASE("smoothing parameter and iteration bound formulas") {
  CHECK(smoothing_parameter(0.01, 2.0) == doctest::Approx(0.005));
  CHECK_THROWS_AS(smoothing_parameter(0.0, 1.0), ConfigError);
  CHECK_THROWS_AS(smoothing_parameter(1.0, 0.0), ConfigError);
  // eps=1, delta=1, C=1, t=1, sigma=1, l=1: 4 * (2 + 1.5 + 0.25) - 1 = 14
  CHECK(iteration_bound(1.0, 1.0, 1.0, 1.0, 1.0, 1.0) == 14);
  // eps=0.5, delta=2, C=3, t=0.25, sigma=2, l=2: ratio l^2/(sigma delta) = 1
  const double expect = 4.0 * 9.0 / (0.25 * 0.5) * (2.0 + 1.5 + 0.25) - 1.0;
  CHECK(iteration_bound(0.5, 2.0, 3.0, 0.25, 2.0, 2.0) == static_cast<long long>(std::ceil(expect)));
  CHECK(iteration_bound(1e-30, 1e-30, 1e10, 1e-10, 1e-10, 1e10) ==
        std::numeric_limits<long long>::max());
  CHECK_THROWS_AS(iteration_bound(0.0, 1.0, 1.0, 1.0, 1.0, 1.0), ConfigError);
}

TEST_CASE("Tikhonov baseline") {
  const BilevelProblem p = segment_problem(vec({3, 0}));
  SolveConfig cfg = fixed_iterations(200000);
  cfg.record_every = 1000;
  const Trajectory tr = tikhonov_baseline_run(p, harmonic_schedule(1.0), cfg);
  CHECK((tr.last().x - vec({2, 0})).norm() < 1e-3);
  CHECK(tr.records.front().alpha == doctest::Approx(1.0 / 1000.0));
  CHECK(tr.last().x == tr.last().y);
  CHECK(tr.step_inner == doctest::Approx(0.25));

  CHECK(harmonic_schedule(2.0)(4) == 0.5);
  CHECK_THROWS_AS(harmonic_schedule(-1.0), ConfigError);
  const NonsmoothOuter w = catalog::elastic_net(1.0, 1.0, Box::symmetric(2, 1.0));
  const BilevelProblem ns{p.inner_smooth, p.inner_prox, w, 2};
  CHECK_THROWS_AS(tikhonov_baseline_run(ns, harmonic_schedule(), cfg), ConfigError);
  CHECK_THROWS_AS(tikhonov_baseline_run(p, [](long) { return -1.0; }, cfg), ConfigError);
  CHECK_THROWS_AS(tikhonov_baseline_run(p, LambdaSchedule{}, cfg), ConfigError);
  SolveConfig big = cfg;
  big.step_inner = 1.0;
  CHECK_THROWS_AS(tikhonov_baseline_run(p, harmonic_schedule(), big), ConfigError);
}

TEST_CASE("termination names") {
  CHECK(to_string(Termination::Residual) == "residual");
  CHECK(to_string(Termination::RelativeGap) == "relative-gap");
  CHECK(to_string(Termination::MaxIterations) == "max-iterations");
  CHECK(to_string(Termination::TimeLimit) == "time-limit");
}

}  // TEST_SUITE
