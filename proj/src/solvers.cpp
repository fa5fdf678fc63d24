#include "vqrate/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqrate/errors.hpp"
#include "vqrate/hessian.hpp"
#include "vqrate/parallel.hpp"

namespace vqrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_exact_1d(const Measure& m) { return m.dim() == 1 && m.is_analytic(); }

Quantizer kmeanspp(const Eigen::MatrixXd& pts, int K, Stream& stream) {
  const auto n = pts.rows();
  Eigen::MatrixXd centers(K, pts.cols());
  std::vector<double> d2(static_cast<std::size_t>(n), kInf);
  auto i0 = static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = pts.row(i0);
  for (int k = 1; k < K; ++k) {
    long double total = 0.0L;
    for (Eigen::Index r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], (pts.row(r) - centers.row(k - 1)).squaredNorm());
      total += d2[r];
    }
    if (!(total > 0.0L)) throw DomainError("init_quantizer: fewer than K distinct support points");
    const long double target = static_cast<long double>(stream.uniform()) * total;
    long double acc = 0.0L;
    Eigen::Index pick = -1;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (d2[r] <= 0.0) continue;
      acc += d2[r];
      pick = r;
      if (acc >= target) break;
    }
    centers.row(k) = pts.row(pick);
  }
  return Quantizer(std::move(centers));
}

// Grid with a dead center moved away: see lloyd().
Eigen::MatrixXd relocate_dead(const Measure& m, const Method& method, Eigen::MatrixXd centers,
                              const std::vector<int>& dead) {
  std::vector<bool> is_dead(static_cast<std::size_t>(centers.rows()), false);
  for (int j : dead) is_dead[j] = true;
  auto live_rows = [&]() {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < centers.rows(); ++i)
      if (!is_dead[i]) rows.push_back(i);
    return rows;
  };
  for (int j : dead) {
    const auto rows = live_rows();
    Eigen::MatrixXd live(static_cast<Eigen::Index>(rows.size()), centers.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) live.row(static_cast<Eigen::Index>(r)) = centers.row(rows[r]);
    if (std::holds_alternative<method::Exact1d>(method)) {
      // Split the live cell of largest distortion at its center and take the
      // conditional mean of its heavier half.
      const Quantizer q(live);
      const auto s = cell_statistics(q, m, method);
      Eigen::Index worst = 0;
      s.distortion.maxCoeff(&worst);
      const auto cuts = q.cut_points();
      const double xw = q.points()(worst, 0);
      const double lo = worst == 0 ? -kInf : cuts[worst - 1];
      const double hi = worst + 1 == q.K() ? kInf : cuts[worst];
      const CellMoments right = m.cell_moments(xw, hi);
      const CellMoments left = m.cell_moments(lo, xw);
      const CellMoments& half = right.mass >= left.mass ? right : left;
      if (!(half.mass > 0.0)) throw DomainError("lloyd: cannot re-seed an empty cell");
      centers(j, 0) = half.first / half.mass;
    } else {
      // Farthest atom (or Monte Carlo draw) from its nearest live center.
      double best = -1.0;
      Eigen::VectorXd pick(centers.cols());
      auto consider = [&](const double* p) {
        const auto nn = nearest(live, p);
        if (nn.sq_distance > best) {
          best = nn.sq_distance;
          pick = Eigen::Map<const Eigen::VectorXd>(p, centers.cols());
        }
      };
      if (m.is_empirical()) {
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts = m.points();
        for (Eigen::Index r = 0; r < pts.rows(); ++r) consider(pts.data() + r * pts.cols());
      } else {
        const auto& mc = std::get<method::MonteCarlo>(method);
        Stream st = mc.stream;
        std::vector<double> buf(static_cast<std::size_t>(centers.cols()));
        for (std::size_t r = 0; r < mc.samples; ++r) {
          m.draw(st, buf.data());
          consider(buf.data());
        }
      }
      if (!(best > 0.0)) throw DomainError("lloyd: fewer than K distinct support points");
      centers.row(j) = pick.transpose();
    }
    is_dead[j] = false;
  }
  return centers;
}

// Solves the symmetric tridiagonal system T s = r; false on a vanishing pivot.
bool thomas(const TridiagonalMatrix& t, const std::vector<double>& r, std::vector<double>& s) {
  const int K = t.size();
  std::vector<double> c(K), d(K);
  double piv = t.diag[0];
  if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) return false;
  c[0] = K > 1 ? t.off[0] / piv : 0.0;
  d[0] = r[0] / piv;
  for (int i = 1; i < K; ++i) {
    piv = t.diag[i] - t.off[i - 1] * c[i - 1];
    if (!(std::abs(piv) > 1e-300) || !std::isfinite(piv)) return false;
    c[i] = i + 1 < K ? t.off[i] / piv : 0.0;
    d[i] = (r[i] - t.off[i - 1] * d[i - 1]) / piv;
  }
  s.assign(K, 0.0);
  s[K - 1] = d[K - 1];
  for (int i = K - 2; i >= 0; --i) s[i] = d[i] - c[i] * s[i + 1];
  return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}

Method method_for(const Measure& m, const Stream& stream) {
  if (m.is_empirical()) return method::EmpiricalSum{};
  if (m.dim() == 1) return method::Exact1d{};
  method::MonteCarlo mc;
  mc.stream = stream;
  return mc;
}

}  // namespace

InitStrategy parse_init_strategy(const std::string& name) {
  if (name == "quantile") return InitStrategy::Quantile;
  if (name == "sample-pp") return InitStrategy::SamplePP;
  if (name == "given") return InitStrategy::Given;
  throw ParseError("unknown init strategy '" + name + "'");
}

std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::Quantile:
      return "quantile";
    case InitStrategy::SamplePP:
      return "sample-pp";
    default:
      return "given";
  }
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "lloyd") return SolverKind::Lloyd;
  if (name == "newton") return SolverKind::Newton;
  if (name == "clvq") return SolverKind::Clvq;
  throw ParseError("unknown solver '" + name + "'");
}

std::string to_string(SolverKind s) {
  switch (s) {
    case SolverKind::Lloyd:
      return "lloyd";
    case SolverKind::Newton:
      return "newton";
    default:
      return "clvq";
  }
}

Quantizer init_quantizer(const Measure& m, int K, InitStrategy strategy, Stream& stream, const Quantizer* given) {
  if (K < 1) throw DomainError("init_quantizer: K must be positive");
  if (m.is_empirical() && m.distinct_atoms() < static_cast<std::size_t>(K))
    throw DomainError("init_quantizer: empirical support has fewer than K distinct points");
  switch (strategy) {
    case InitStrategy::Given: {
      if (!given) throw DomainError("init_quantizer: strategy 'given' needs a grid");
      if (given->K() != K || given->dim() != m.dim()) throw DomainError("init_quantizer: given grid has wrong shape");
      return *given;
    }
    case InitStrategy::Quantile: {
      if (m.dim() != 1) throw UnsupportedOperation("quantile initialisation needs a 1D measure");
      std::vector<double> v(K);
      for (int i = 0; i < K; ++i) v[i] = m.quantile((2.0 * i + 1.0) / (2.0 * K));
      bool distinct = true;
      for (int i = 1; i < K; ++i) distinct = distinct && v[i] > v[i - 1];
      if (!distinct) {
        // Atoms repeat: spread the grid over the distinct values instead.
        std::vector<double> u = m.sorted_atoms();
        u.erase(std::unique(u.begin(), u.end()), u.end());
        const double U = static_cast<double>(u.size());
        for (int i = 0; i < K; ++i) {
          auto idx = static_cast<std::size_t>(std::floor((2.0 * i + 1.0) / (2.0 * K) * U));
          v[i] = u[std::min(idx, u.size() - 1)];
        }
        for (int i = 1; i < K; ++i)
          if (!(v[i] > v[i - 1])) {
            // K close to the number of distinct values: take them in order.
            for (int k = 0; k < K; ++k)
              v[k] = u[static_cast<std::size_t>(std::llround(static_cast<double>(k) * (U - 1) / std::max(1, K - 1)))];
            break;
          }
      }
      return Quantizer::from_values(v);
    }
    case InitStrategy::SamplePP: {
      if (m.is_empirical() && m.size() <= kSeedingSample) return kmeanspp(m.points(), K, stream);
      return kmeanspp(m.sample(kSeedingSample, stream), K, stream);
    }
  }
  throw DomainError("init_quantizer: unknown strategy");
}

double default_tolerance(const Measure& m) {
  if (m.is_empirical()) return 1e-8;
  if (m.dim() == 1) return 1e-10;
  return 1e-8;
}

SolveResult lloyd(const Measure& m, const Quantizer& init, const LloydOptions& opt) {
  const Method method = opt.method ? *opt.method : method_for(m, opt.stream);
  const double tol = opt.tol > 0.0 ? opt.tol : default_tolerance(m);
  const int K = init.K();
  Quantizer x = init;
  SolveResult res{x, 0.0, 0, false, 0.0, {}, "lloyd"};
  for (int it = 0;; ++it) {
    const auto s = cell_statistics(x, m, method);
    res.history.push_back(s.distortion.sum());
    const Eigen::MatrixXd g = 2.0 * (x.points().array().colwise() * s.mass.array() - s.first.array()).matrix();
    res.gradient_norm = g.norm();
    Eigen::MatrixXd next = x.points();
    std::vector<int> dead;
    for (int i = 0; i < K; ++i) {
      if (s.mass(i) > 0.0)
        next.row(i) = s.first.row(i) / s.mass(i);
      else
        dead.push_back(i);
    }
    const double move = dead.empty() ? (next - x.points()).cwiseAbs().maxCoeff() : kInf;
    res.iterations = it;
    if (move <= tol && res.gradient_norm <= tol) {
      res.converged = true;
      break;
    }
    if (it >= opt.max_iter) break;
    if (!dead.empty()) next = relocate_dead(m, method, std::move(next), dead);
    try {
      x = Quantizer(std::move(next));
    } catch (const InvalidQuantizer&) {
      // Two centroids collapsed numerically; keep the last valid grid.
      break;
    }
  }
  res.quantizer = x;
  res.distortion = distortion(x, m, method).value;
  return res;
}

SolveResult newton_1d(const Measure& m, const Quantizer& init, double tol, int max_iter) {
  if (!is_exact_1d(m)) throw UnsupportedOperation("newton_1d needs a 1D analytic measure");
  if (init.dim() != 1) throw DomainError("newton_1d needs a 1D grid");
  const Method exact = method::Exact1d{};
  const int K = init.K();
  Quantizer x = init;
  SolveResult res{x, 0.0, 0, false, 0.0, {}, "newton"};
  double D = distortion(x, m, exact).value;
  for (int it = 0;; ++it) {
    res.history.push_back(D);
    const auto s = cell_statistics(x, m, exact);
    std::vector<double> g(K), step;
    for (int i = 0; i < K; ++i) g[i] = 2.0 * (x.points()(i, 0) * s.mass(i) - s.first(i, 0));
    double gn = 0.0;
    for (double v : g) gn += v * v;
    res.gradient_norm = std::sqrt(gn);
    res.iterations = it;
    if (res.gradient_norm <= tol) {
      res.converged = true;
      break;
    }
    if (it >= max_iter) break;

    const auto H = hessian_1d(x, m);
    std::vector<double> rhs(K);
    for (int i = 0; i < K; ++i) rhs[i] = -g[i];
    bool accepted = false;
    if (thomas(H, rhs, step)) {
      double slope = 0.0;
      for (int i = 0; i < K; ++i) slope += g[i] * step[i];
      if (slope < 0.0) {
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(D);
        for (double t = 1.0; t > 1e-12; t *= 0.5) {
          std::vector<double> cand(K);
          bool sorted = true;
          for (int i = 0; i < K; ++i) {
            cand[i] = x.points()(i, 0) + t * step[i];
            if (i > 0 && !(cand[i] > cand[i - 1])) sorted = false;
          }
          if (!sorted) continue;
          Quantizer q = Quantizer::from_values(cand);
          const double Dq = distortion(q, m, exact).value;
          if (Dq <= D + slack) {
            x = std::move(q);
            D = Dq;
            accepted = true;
            break;
          }
        }
      }
    }
    if (!accepted) {
      // Singular or non-descent direction: one Lloyd step instead.
      LloydOptions lo;
      lo.max_iter = 1;
      lo.tol = tol;
      lo.method = exact;
      const auto l = lloyd(m, x, lo);
      if (l.quantizer.points() == x.points()) break;
      x = l.quantizer;
      D = l.distortion;
    }
  }
  res.quantizer = x;
  res.distortion = distortion(x, m, exact).value;
  return res;
}

SolveResult clvq(const Measure& m, const Quantizer& init, std::size_t steps, const ClvqSchedule& schedule,
                 Stream stream, double tol) {
  if (init.dim() != m.dim()) throw DomainError("clvq: dimension mismatch");
  Eigen::MatrixXd x = init.points();
  const auto d = x.cols();
  std::vector<double> xi(static_cast<std::size_t>(d));
  for (std::size_t t = 1; t <= steps; ++t) {
    m.draw(stream, xi.data());
    const auto nn = nearest(x, xi.data());
    const double g = schedule.gamma(t);
    for (Eigen::Index c = 0; c < d; ++c) x(nn.index, c) -= g * (x(nn.index, c) - xi[c]);
  }
  Quantizer q(std::move(x));
  const Method method = method_for(m, stream.split(0xc1));
  SolveResult res{q, distortion(q, m, method).value, static_cast<int>(std::min<std::size_t>(steps, 2147483647)),
                  false, gradient(q, m, method).norm(), {}, "clvq"};
  res.converged = res.gradient_norm <= tol;
  return res;
}

SolveResult solve(const Measure& m, int K, const SolverConfig& cfg, Stream& stream) {
  const Quantizer x0 = init_quantizer(m, K, cfg.init, stream, cfg.given ? &*cfg.given : nullptr);
  switch (cfg.kind) {
    case SolverKind::Newton:
      return newton_1d(m, x0, cfg.tol > 0.0 ? cfg.tol : 1e-10, cfg.max_iter);
    case SolverKind::Clvq:
      return clvq(m, x0, cfg.clvq_steps, cfg.schedule, stream.split(0xc0), cfg.tol > 0.0 ? cfg.tol : 1e-3);
    default: {
      LloydOptions lo;
      lo.tol = cfg.tol;
      lo.max_iter = cfg.max_iter;
      lo.stream = stream.split(0x11);
      return lloyd(m, x0, lo);
    }
  }
}

BestOfResult best_of(const Measure& m, int K, int restarts, const SolverConfig& cfg, const Stream& stream) {
  if (restarts < 1) throw DomainError("best_of: restarts must be at least 1");
  std::vector<std::optional<SolveResult>> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), cfg.workers, [&](std::size_t r) {
    SolverConfig c = cfg;
    if (r > 0) c.init = InitStrategy::SamplePP;
    Stream s = stream.split(r);
    runs[r] = solve(m, K, c, s);
  });
  BestOfResult out{*runs[0], 0.0, 0.0, 0, {}};
  for (int r = 0; r < restarts; ++r) {
    out.restart_distortions.push_back(runs[r]->distortion);
    if (runs[r]->distortion < out.best.distortion) {
      out.best = *runs[r];
      out.best_restart = r;
    }
  }
  out.e_star_hat = std::sqrt(std::max(0.0, out.best.distortion));
  out.rho_hat = out.best.quantizer.max_norm();
  return out;
}

}  // namespace vqrate
