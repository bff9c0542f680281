#include "bigsam/benchmark.hpp"
#include "bigsam/oracle.hpp"
#include "bigsam/problems.hpp"
#include "bigsam/solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace bigsam;

namespace {

py::dict trajectory_dict(const Trajectory& tr) {
  std::vector<long> k;
  std::vector<double> alpha, phi, omega, step, map;
  for (const IterationRecord& r : tr.records) {
    k.push_back(r.k);
    alpha.push_back(r.alpha);
    phi.push_back(r.phi_y);
    omega.push_back(r.omega_y);
    step.push_back(r.step_residual);
    map.push_back(r.map_residual);
  }
  py::dict d;
  d["x"] = tr.last().x;
  d["y"] = tr.last().y;
  d["iterations"] = tr.iterations;
  d["termination"] = std::string(to_string(tr.termination));
  d["beta"] = tr.beta;
  d["step_inner"] = tr.step_inner;
  d["step_outer"] = tr.step_outer;
  d["k"] = k;
  d["alpha"] = alpha;
  d["phi_y"] = phi;
  d["omega_y"] = omega;
  d["step_residual"] = step;
  d["map_residual"] = map;
  return d;
}

SolveConfig make_config(double gamma, long max_iterations, double residual_tol,
                        std::optional<double> relative_gap, std::optional<double> phi_star,
                        long record_every) {
  SolveConfig cfg;
  cfg.gamma = gamma;
  cfg.max_iterations = max_iterations;
  cfg.residual_tol = residual_tol;
  cfg.relative_gap_tol = relative_gap;
  cfg.phi_star = phi_star;
  cfg.record_every = record_every;
  return cfg;
}

LeastSquaresInstance instance(const Matrix& a, const Vector& b) {
  if (a.rows() != b.size()) throw ConfigError("A and b have incompatible shapes");
  LeastSquaresInstance inst;
  inst.A = a;
  inst.b = b;
  return inst;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bi-level sequential averaging for nonnegative least squares";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("generate_instance",
        [](Index m_, Index n, Index rank, double decay, std::uint64_t seed, double rho,
           std::uint64_t noise_seed) {
          LeastSquaresInstance inst = generate_rank_deficient_ls(m_, n, rank, decay, seed);
          if (rho > 0.0) inst = add_noise(inst, rho, noise_seed);
          return py::make_tuple(inst.A, inst.b, *inst.x_true);
        },
        py::arg("m"), py::arg("n"), py::arg("rank"), py::arg("sv_decay"), py::arg("seed"),
        py::arg("rho") = 0.0, py::arg("noise_seed") = 0,
        "Returns (A, b, x_true) for a rank-deficient instance, optionally with noise.");

  m.def("difference_outer", [](Index n) { return default_outer(n).hessian(); }, py::arg("n"),
        "Hessian D^T D + I of the default outer objective.");

  m.def("solve",
        [](const Matrix& a, const Vector& b, double gamma, long max_iterations,
           double residual_tol, std::optional<double> relative_gap,
           std::optional<double> phi_star, long record_every) {
          const BilevelProblem p =
              make_nonneg_ls_problem(instance(a, b), default_outer(a.cols()).smooth());
          py::gil_scoped_release release;
          Trajectory tr = bigsam_run(
              p, make_config(gamma, max_iterations, residual_tol, relative_gap, phi_star,
                             record_every));
          py::gil_scoped_acquire acquire;
          return trajectory_dict(tr);
        },
        py::arg("A"), py::arg("b"), py::arg("gamma") = 1.0, py::arg("max_iterations") = 100000,
        py::arg("residual_tol") = 1e-9, py::arg("relative_gap") = std::nullopt,
        py::arg("phi_star") = std::nullopt, py::arg("record_every") = 1,
        "BiG-SAM on min |Ax-b|^2 over x >= 0 with outer 1/2 x^T (D^T D + I) x.");

  m.def("solve_tikhonov",
        [](const Matrix& a, const Vector& b, double lambda0, long max_iterations,
           std::optional<double> relative_gap, std::optional<double> phi_star,
           long record_every) {
          const BilevelProblem p =
              make_nonneg_ls_problem(instance(a, b), default_outer(a.cols()).smooth());
          py::gil_scoped_release release;
          Trajectory tr = tikhonov_baseline_run(
              p, harmonic_schedule(lambda0),
              make_config(1.0, max_iterations, 0.0, relative_gap, phi_star, record_every));
          py::gil_scoped_acquire acquire;
          return trajectory_dict(tr);
        },
        py::arg("A"), py::arg("b"), py::arg("lambda0") = 1.0, py::arg("max_iterations") = 100000,
        py::arg("relative_gap") = std::nullopt, py::arg("phi_star") = std::nullopt,
        py::arg("record_every") = 1, "Diagonal Tikhonov scheme with lambda_k = lambda0 / k.");

  m.def("oracle",
        [](const Matrix& a, const Vector& b, long budget) {
          ReferenceOptions ro;
          ro.budget = budget;
          const OracleSolution s = solve_reference(instance(a, b), default_outer(a.cols()), ro);
          py::dict d;
          d["phi_star"] = s.phi_star;
          d["x_mn"] = s.x_mn;
          d["omega_star"] = s.omega_star;
          d["method"] = std::string(to_string(s.method));
          d["approximate"] = s.approximate;
          return d;
        },
        py::arg("A"), py::arg("b"), py::arg("budget") = 1000000,
        "Reference phi*, x_mn and omega* for the default outer objective.");

  m.def("nnls",
        [](const Matrix& a, const Vector& b) {
          const NnlsResult r = nnls(a, b);
          return py::make_tuple(r.x, r.residual_norm);
        },
        py::arg("A"), py::arg("b"), "Lawson-Hanson NNLS; returns (x, |Ax - b|).");

  m.def("alpha", [](long k, double gamma, double beta) { return AlphaSchedule(gamma, beta).at(k); },
        py::arg("k"), py::arg("gamma"), py::arg("beta"));
  m.def("smoothing_parameter", &smoothing_parameter, py::arg("delta"), py::arg("lipschitz_value"));
  m.def("iteration_bound", &iteration_bound, py::arg("epsilon"), py::arg("delta"),
        py::arg("radius"), py::arg("step_inner"), py::arg("sigma"), py::arg("lipschitz_value"));
}
