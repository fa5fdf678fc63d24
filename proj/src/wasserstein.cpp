#include "vqrate/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqrate/errors.hpp"
#include "vqrate/quadrature.hpp"

namespace vqrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_p(int p) {
  if (p != 1 && p != 2) throw DomainError("Wasserstein order must be 1 or 2");
}

double finish(long double acc, int p) {
  const double v = std::max(0.0, static_cast<double>(acc));
  return p == 2 ? std::sqrt(v) : v;
}

// integral of |x - xi|^p over (lo, hi] against the 1D measure m
double cell_cost(const Measure& m, double x, double lo, double hi, int p) {
  if (!(lo < hi)) return 0.0;
  if (p == 2) {
    const CellMoments c = m.cell_moments(lo, hi);
    return std::max(0.0, c.second - 2.0 * x * c.first + x * x * c.mass);
  }
  double v = 0.0;
  if (x > lo) {
    const CellMoments c = m.cell_moments(lo, std::min(x, hi));
    v += x * c.mass - c.first;
  }
  if (x < hi) {
    const CellMoments c = m.cell_moments(std::max(x, lo), hi);
    v += c.first - x * c.mass;
  }
  return std::max(0.0, v);
}

TransportResult empirical_empirical(const std::vector<double>& x, const std::vector<double>& y, int p) {
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  long double acc = 0.0L;
  std::size_t i = 0, j = 0;
  double u = 0.0;
  while (i < x.size() && j < y.size()) {
    const double ui = static_cast<double>(i + 1) / n;
    const double uj = static_cast<double>(j + 1) / m;
    const double next = std::min(ui, uj);
    const double r = std::abs(x[i] - y[j]);
    acc += static_cast<long double>(next - u) * (p == 2 ? r * r : r);
    u = next;
    // i/n == j/m is decided on integers to keep the merge exact
    const auto lhs = static_cast<unsigned long long>(i + 1) * y.size();
    const auto rhs = static_cast<unsigned long long>(j + 1) * x.size();
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return {finish(acc, p), p, "quantile1d", 0.0};
}

TransportResult empirical_analytic(const std::vector<double>& x, const Measure& g, int p) {
  const std::size_t n = x.size();
  long double acc = 0.0L;
  double lo = -kInf;
  for (std::size_t k = 0; k < n; ++k) {
    const double hi = k + 1 == n ? kInf : g.quantile(static_cast<double>(k + 1) / static_cast<double>(n));
    acc += cell_cost(g, x[k], lo, hi, p);
    lo = hi;
  }
  return {finish(acc, p), p, "quantile1d", 0.0};
}

TransportResult analytic_analytic(const Measure& a, const Measure& b, int p) {
  constexpr double eps = kTailQuantile;
  std::vector<double> breaks{eps};
  for (double t = 1e-10; t < 0.3; t *= 100.0) breaks.push_back(t);
  breaks.push_back(0.5);
  for (double t = 1e-2; t >= 1e-10; t /= 100.0) breaks.push_back(1.0 - t);
  breaks.push_back(1.0 - eps);
  QuadratureOptions opt;
  opt.abs_tol = 1e-16;
  opt.rel_tol = 1e-12;
  const auto r = integrate_pieces(
      [&](double u) {
        const double d = std::abs(a.quantile(u) - b.quantile(u));
        return p == 2 ? d * d : d;
      },
      breaks, opt);
  // Left-out tails: |Qa - Qb|^p at the cut times the 2 eps of mass, doubled.
  const double da = std::abs(a.quantile(eps) - b.quantile(eps));
  const double db = std::abs(a.quantile(1.0 - eps) - b.quantile(1.0 - eps));
  const double tail = 4.0 * eps * std::max(std::pow(da, p), std::pow(db, p));
  const double value = std::max(0.0, r.value);
  TransportResult t{p == 2 ? std::sqrt(value) : value, p, "quantile1d", 0.0};
  const double err = r.error_estimate + tail;
  t.error_bound = p == 2 ? (t.distance > 0.0 ? err / (2.0 * t.distance) : std::sqrt(err)) : err;
  return t;
}

const std::vector<double>& atoms_of(const Measure& m) { return m.sorted_atoms(); }

}  // namespace

TransportResult w_p_1d(const Measure& a, const Measure& b, int p) {
  check_p(p);
  if (a.dim() != 1 || b.dim() != 1) throw UnsupportedOperation("w_p_1d needs 1D measures");
  if (a.is_empirical() && b.is_empirical()) return empirical_empirical(atoms_of(a), atoms_of(b), p);
  if (a.is_empirical()) return empirical_analytic(atoms_of(a), b, p);
  if (b.is_empirical()) return empirical_analytic(atoms_of(b), a, p);
  return analytic_analytic(a, b, p);
}

TransportResult w_p_sorted(const Measure& a, const Measure& b, int p) {
  check_p(p);
  if (!a.is_empirical() || !b.is_empirical() || a.dim() != 1 || b.dim() != 1)
    throw UnsupportedOperation("w_p_sorted needs two 1D empirical measures");
  if (a.size() != b.size()) throw DomainError("w_p_sorted: sizes differ");
  const auto& x = atoms_of(a);
  const auto& y = atoms_of(b);
  long double acc = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::abs(x[i] - y[i]);
    acc += p == 2 ? r * r : r;
  }
  return {finish(acc / static_cast<long double>(x.size()), p), p, "sorted", 0.0};
}

double min_cost_assignment(const Eigen::MatrixXd& cost, std::vector<int>* assignment) {
  const auto n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DomainError("min_cost_assignment: cost matrix must be square");
  // 1-based potentials u (rows), v (columns); match[j] = row assigned to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> rows(n);
  for (int j = 1; j <= n; ++j) rows[match[j] - 1] = j - 1;
  long double total = 0.0L;
  for (int i = 0; i < n; ++i) total += cost(i, rows[i]);
  if (assignment) *assignment = std::move(rows);
  return static_cast<double>(total);
}

TransportResult w2_assignment(const Measure& a, const Measure& b) {
  if (!a.is_empirical() || !b.is_empirical()) throw UnsupportedOperation("w2_assignment needs two empirical measures");
  if (a.dim() != b.dim()) throw DomainError("w2_assignment: dimensions differ");
  if (a.size() != b.size()) throw DomainError("w2_assignment: sizes differ");
  if (a.size() > kAssignmentLimit) throw SizeLimitError("w2_assignment: n exceeds 512");
  const auto& X = a.points();
  const auto& Y = b.points();
  const auto n = X.rows();
  Eigen::MatrixXd C(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) C(i, j) = (X.row(i) - Y.row(j)).squaredNorm();
  const double cost = min_cost_assignment(C);
  return {std::sqrt(std::max(0.0, cost / static_cast<double>(n))), 2, "assignment", 0.0};
}

TransportResult w2_gaussian(const Measure& a, const Measure& b) {
  if (!a.is_gaussian() || !b.is_gaussian()) throw UnsupportedOperation("w2_gaussian needs two Gaussian measures");
  if (a.dim() != b.dim()) throw DomainError("w2_gaussian: dimensions differ");
  const Eigen::VectorXd m1 = a.mean(), m2 = b.mean();
  const Eigen::MatrixXd S1 = a.covariance(), S2 = b.covariance();
  auto sqrtm = [](const Eigen::MatrixXd& S) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw DomainError("w2_gaussian: eigendecomposition failed");
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return Eigen::MatrixXd(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
  };
  const Eigen::MatrixXd R1 = sqrtm(S1);
  Eigen::MatrixXd M = R1 * S2 * R1;
  M = 0.5 * (M + M.transpose());
  const double tr = (S1 + S2 - 2.0 * sqrtm(M)).trace();
  const double w2 = (m1 - m2).squaredNorm() + std::max(0.0, tr);
  return {std::sqrt(std::max(0.0, w2)), 2, "gaussian-closed-form", 0.0};
}

TransportResult w2_surrogate(const Measure& empirical, const Measure& analytic, Stream stream) {
  if (!empirical.is_empirical() || !analytic.is_analytic())
    throw UnsupportedOperation("w2_surrogate needs an empirical and an analytic measure");
  if (empirical.size() > kAssignmentLimit) throw SizeLimitError("w2_surrogate: n exceeds 512");
  const Measure ref = Measure::empirical(analytic.sample(empirical.size(), stream));
  auto t = w2_assignment(empirical, ref);
  t.method = "assignment-surrogate";
  return t;
}

}  // namespace vqrate
