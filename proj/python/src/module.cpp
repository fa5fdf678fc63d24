#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vqrate/bounds.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/harness.hpp"
#include "vqrate/hessian.hpp"
#include "vqrate/solvers.hpp"
#include "vqrate/wasserstein.hpp"

namespace py = pybind11;
using namespace vqrate;

namespace {

// numpy 1D arrays arrive as K x 1 columns
Quantizer to_quantizer(const Eigen::MatrixXd& grid) { return Quantizer(grid); }

py::dict solve_result(const SolveResult& r) {
  py::dict d;
  d["grid"] = r.quantizer.points();
  d["distortion"] = r.distortion;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["gradient_norm"] = r.gradient_norm;
  d["history"] = r.history;
  d["solver"] = r.solver;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "vqrate native core";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InvalidQuantizer>(m, "InvalidQuantizer", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<NotApplicable>(m, "NotApplicable", PyExc_ValueError);
  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", PyExc_TypeError);
  py::register_exception<SizeLimitError>(m, "SizeLimitError", PyExc_ValueError);

  py::class_<Measure>(m, "Measure")
      .def(py::init([](const std::string& spec) { return parse_distribution(spec); }), py::arg("spec"))
      .def_static("empirical", py::overload_cast<Eigen::MatrixXd>(&Measure::empirical), py::arg("points"))
      .def_property_readonly("kind", &Measure::kind_name)
      .def_property_readonly("dim", &Measure::dim)
      .def("pdf", py::overload_cast<double>(&Measure::pdf, py::const_))
      .def("cdf", &Measure::cdf)
      .def("quantile", &Measure::quantile)
      .def("mean", &Measure::mean)
      .def("covariance", &Measure::covariance)
      .def("second_moment", &Measure::second_moment)
      .def("effective_support", &Measure::effective_support)
      .def(
          "sample",
          [](const Measure& self, std::size_t n, std::uint64_t seed) {
            Stream s(seed);
            return self.sample(n, s);
          },
          py::arg("n"), py::arg("seed") = 0);

  m.def(
      "distortion",
      [](const Eigen::MatrixXd& grid, const Measure& mu) {
        const auto d = distortion(to_quantizer(grid), mu);
        return py::make_tuple(d.value, d.std_error);
      },
      py::arg("grid"), py::arg("measure"), "Distortion and its standard error (0 for exact methods).");

  m.def(
      "gradient", [](const Eigen::MatrixXd& grid, const Measure& mu) { return gradient(to_quantizer(grid), mu); },
      py::arg("grid"), py::arg("measure"));

  m.def(
      "solve",
      [](const Measure& mu, int K, const std::string& method, const std::string& init, double tol, int max_iter,
         int restarts, std::uint64_t seed, std::optional<Eigen::MatrixXd> grid) {
        SolverConfig cfg;
        cfg.kind = parse_solver_kind(method);
        cfg.init = parse_init_strategy(init);
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        if (grid) cfg.given = to_quantizer(*grid);
        const auto r = best_of(mu, K, restarts, cfg, Stream(seed));
        py::dict d = solve_result(r.best);
        d["restart_distortions"] = r.restart_distortions;
        d["best_restart"] = r.best_restart;
        return d;
      },
      py::arg("measure"), py::arg("K"), py::arg("method") = "lloyd", py::arg("init") = "quantile",
      py::arg("tol") = -1.0, py::arg("max_iter") = kDefaultMaxIter, py::arg("restarts") = 1, py::arg("seed") = 0,
      py::arg("grid") = py::none());

  m.def(
      "hessian_1d", [](const Eigen::MatrixXd& grid, const Measure& mu) { return hessian_1d(to_quantizer(grid), mu).dense(); },
      py::arg("grid"), py::arg("measure"));

  m.def(
      "hessian_2d",
      [](const Eigen::MatrixXd& grid, const Measure& mu) {
        const auto h = hessian_2d_boundary(to_quantizer(grid), mu);
        return py::make_tuple(h.matrix, h.crosses_boundary);
      },
      py::arg("grid"), py::arg("measure"));

  m.def(
      "pd_certificate",
      [](const Eigen::MatrixXd& grid, const Measure& mu) {
        const auto c = pd_certificate(hessian_1d(to_quantizer(grid), mu));
        py::dict d;
        d["positive_definite"] = c.positive_definite;
        d["leading_minors"] = c.leading_minors;
        d["row_excess"] = c.row_excess;
        d["lambda_star"] = c.lambda_star;
        return d;
      },
      py::arg("grid"), py::arg("measure"));

  m.def(
      "w2",
      [](const Measure& a, const Measure& b, int p) {
        TransportResult r;
        if (a.dim() == 1)
          r = w_p_1d(a, b, p);
        else if (a.is_empirical() && b.is_empirical())
          r = w2_assignment(a, b);
        else
          r = w2_gaussian(a, b);
        return py::make_tuple(r.distance, r.method);
      },
      py::arg("a"), py::arg("b"), py::arg("p") = 2);

  m.def(
      "evaluate_bound",
      [](const std::string& name, const std::map<std::string, double>& params) {
        const auto r = evaluate_bound(name, params);
        py::dict d;
        d["name"] = r.name;
        d["bound"] = r.bound;
        d["applicable"] = to_string(r.applicable);
        d["slack"] = r.slack;
        d["measured"] = r.measured;
        d["note"] = r.note;
        return d;
      },
      py::arg("name"), py::arg("params"));

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        const auto cfg = parse_config(config_json);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg);
        }
        return py::make_tuple(to_csv(cfg, r.rows), r.timeouts);
      },
      py::arg("config_json"), "Run an experiment from a JSON config; returns (csv_text, timeouts).");

  m.def(
      "fit_rate",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto f = fit_rate(x, y);
        return py::make_tuple(f.slope, f.intercept, f.r2);
      },
      py::arg("x"), py::arg("y"));
}
