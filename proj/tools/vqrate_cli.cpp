#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vqrate/bounds.hpp"
#include "vqrate/csv.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/harness.hpp"
#include "vqrate/hessian.hpp"
#include "vqrate/solvers.hpp"
#include "vqrate/wasserstein.hpp"

using namespace vqrate;

namespace {

std::string num(double v) { return csv::format_double(v); }

void print_list(const char* key, const std::vector<double>& v) {
  std::cout << key << ":";
  for (double x : v) std::cout << ' ' << num(x);
  std::cout << '\n';
}

void print_matrix(const char* key, const Eigen::MatrixXd& m) {
  std::cout << key << ": " << m.rows() << 'x' << m.cols() << '\n';
  csv::write_matrix(std::cout, m);
}

struct SolveArgs {
  std::string dist, method = "lloyd", init = "quantile", grid_out;
  int K = 2, max_iter = kDefaultMaxIter, restarts = 1;
  double tol = -1.0;
  std::uint64_t seed = 0;
  std::size_t clvq_steps = 100000;
};

int run_solve(const SolveArgs& a) {
  const Measure m = parse_distribution(a.dist);
  SolverConfig cfg;
  cfg.kind = parse_solver_kind(a.method);
  cfg.tol = a.tol;
  cfg.max_iter = a.max_iter;
  cfg.clvq_steps = a.clvq_steps;
  if (a.init.rfind("file:", 0) == 0) {
    cfg.init = InitStrategy::Given;
    cfg.given = Quantizer(csv::read_matrix(a.init.substr(5)));
  } else {
    cfg.init = parse_init_strategy(a.init);
  }
  const auto r = best_of(m, a.K, a.restarts, cfg, Stream(a.seed));
  const auto& s = r.best;
  std::cout << "solver: " << s.solver << '\n'
            << "K: " << s.quantizer.K() << '\n'
            << "dim: " << s.quantizer.dim() << '\n'
            << "distortion: " << num(s.distortion) << '\n'
            << "error: " << num(std::sqrt(s.distortion)) << '\n'
            << "iterations: " << s.iterations << '\n'
            << "converged: " << (s.converged ? "true" : "false") << '\n'
            << "gradient_norm: " << num(s.gradient_norm) << '\n'
            << "best_restart: " << r.best_restart << '\n';
  print_list("restart_distortions", r.restart_distortions);
  print_matrix("grid", s.quantizer.points());
  if (!a.grid_out.empty()) csv::write_matrix(a.grid_out, s.quantizer.points());
  return 0;
}

int run_hessian(const std::string& dist, const std::string& grid, bool fd_check) {
  const Measure m = parse_distribution(dist);
  const Quantizer x(csv::read_matrix(grid));
  Eigen::MatrixXd H;
  if (x.dim() == 1) {
    const auto T = hessian_1d(x, m);
    H = T.dense();
    const auto c = pd_certificate(T);
    std::cout << "kind: tridiagonal\n"
              << "positive_definite: " << (c.positive_definite ? "true" : "false") << '\n'
              << "lambda_star: " << num(c.lambda_star) << '\n';
    print_list("leading_minors", c.leading_minors);
    print_list("row_excess", c.row_excess);
  } else {
    const auto h = hessian_2d_boundary(x, m);
    H = h.matrix;
    std::cout << "kind: boundary-2d\n"
              << "crosses_boundary: " << (h.crosses_boundary ? "true" : "false") << '\n';
  }
  print_matrix("matrix", H);
  if (fd_check) {
    const double step = 1e-4 * std::max(1.0, x.max_norm());
    const Eigen::MatrixXd F = x.dim() == 1 ? fd_hessian(x, m, step) : fd_hessian(x, m, 1e-3, method::Cubature2d{1e-12});
    std::cout << "fd_relative_error: " << num((H - F).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff()) << '\n';
  }
  return 0;
}

int run_w2(const std::string& a, const std::string& b, int p) {
  const Measure ma = parse_distribution(a), mb = parse_distribution(b);
  TransportResult r;
  if (ma.dim() == 1) {
    r = w_p_1d(ma, mb, p);
  } else if (p != 2) {
    throw DomainError("w2: only p = 2 in dimension > 1");
  } else if (ma.is_empirical() && mb.is_empirical()) {
    r = w2_assignment(ma, mb);
  } else {
    r = w2_gaussian(ma, mb);
  }
  std::cout << "distance: " << num(r.distance) << '\n'
            << "p: " << r.p << '\n'
            << "method: " << r.method << '\n'
            << "error_bound: " << num(r.error_bound) << '\n';
  return 0;
}

int run_bounds(const std::string& name, const std::string& params) {
  const auto r = evaluate_bound(name, parse_params(params));
  std::cout << "name: " << r.name << '\n'
            << "bound: " << num(r.bound) << '\n'
            << "applicable: " << to_string(r.applicable) << '\n';
  if (r.measured) std::cout << "measured: " << num(*r.measured) << '\n';
  if (r.slack) std::cout << "slack: " << num(*r.slack) << '\n';
  for (const auto& [k, v] : r.inputs) std::cout << "input." << k << ": " << num(v) << '\n';
  if (!r.note.empty()) std::cout << "note: " << r.note << '\n';
  return 0;
}

int run_experiment_cmd(const std::string& config, const std::string& out, std::optional<int> workers) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config);
    if (workers) cfg.workers = *workers;
    if (!out.empty()) cfg.output = out;
    validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto r = run_experiment(cfg);
  if (cfg.output.empty()) {
    write_csv(std::cout, cfg, r.rows);
  } else {
    std::ofstream os(cfg.output, std::ios::binary);
    if (!os) throw DomainError("cannot write " + cfg.output);
    write_csv(os, cfg, r.rows);
  }
  std::cerr << r.rows.size() << " cells, " << r.timeouts << " timeouts\n";
  return r.timeouts > 0 ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vqrate: optimal quantizers, Hessians, Wasserstein distances and rate bounds"};
  app.require_subcommand(1);

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Compute a K-point quantizer");
  solve->add_option("--dist", sa.dist, "Distribution spec")->required();
  solve->add_option("--K", sa.K, "Number of points")->required()->check(CLI::PositiveNumber);
  solve->add_option("--method", sa.method, "lloyd | newton | clvq");
  solve->add_option("--init", sa.init, "quantile | sample-pp | file:<grid.csv>");
  solve->add_option("--tol", sa.tol, "Stopping tolerance (default depends on the measure)");
  solve->add_option("--max-iter", sa.max_iter);
  solve->add_option("--restarts", sa.restarts)->check(CLI::PositiveNumber);
  solve->add_option("--seed", sa.seed);
  solve->add_option("--clvq-steps", sa.clvq_steps);
  solve->add_option("--grid", sa.grid_out, "Also write the grid to this CSV file");

  std::string h_dist, h_grid;
  bool fd_check = false;
  auto* hess = app.add_subcommand("hessian", "Hessian of the distortion and its PD certificate");
  hess->add_option("--dist", h_dist)->required();
  hess->add_option("--grid", h_grid, "Grid CSV, K rows x d columns")->required();
  hess->add_flag("--fd-check", fd_check, "Compare with central finite differences");

  std::string wa, wb;
  int p = 2;
  auto* w2 = app.add_subcommand("w2", "Wasserstein distance between two distributions");
  w2->add_option("--a", wa)->required();
  w2->add_option("--b", wb)->required();
  w2->add_option("--p", p)->check(CLI::IsMember({1, 2}));

  std::string bname, bparams;
  auto* bounds = app.add_subcommand("bounds", "Evaluate a bound from named parameters");
  bounds->add_option("--name", bname)->required();
  bounds->add_option("--params", bparams, "k=v,...");

  std::string cfg_path, out;
  std::optional<int> workers;
  auto* exp = app.add_subcommand("experiment", "Run an experiment grid and write CSV");
  exp->add_option("--config", cfg_path)->required();
  exp->add_option("--out", out);
  exp->add_option("--workers", workers);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_solve(sa);
    if (*hess) return run_hessian(h_dist, h_grid, fd_check);
    if (*w2) return run_w2(wa, wb, p);
    if (*bounds) return run_bounds(bname, bparams);
    if (*exp) return run_experiment_cmd(cfg_path, out, workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
