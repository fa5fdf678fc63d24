#include "vqrate/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqrate/errors.hpp"
#include "vqrate/quadrature.hpp"
#include "vqrate/voronoi2d.hpp"

namespace vqrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_1d_analytic(const Measure& m) {
  if (m.dim() != 1 || !m.is_analytic()) throw UnsupportedOperation("hessian_1d needs a 1D analytic measure");
}

}  // namespace

Eigen::MatrixXd TridiagonalMatrix::dense() const {
  const int K = size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(K, K);
  for (int i = 0; i < K; ++i) h(i, i) = diag[i];
  for (int i = 0; i + 1 < K; ++i) h(i, i + 1) = h(i + 1, i) = off[i];
  return h;
}

std::vector<double> TridiagonalMatrix::row_sums() const {
  std::vector<double> r(diag);
  for (std::size_t i = 0; i < off.size(); ++i) {
    r[i] += off[i];
    r[i + 1] += off[i];
  }
  return r;
}

TridiagonalMatrix hessian_1d(const Quantizer& x, const Measure& m) {
  require_1d_analytic(m);
  if (x.dim() != 1) throw DomainError("hessian_1d needs a 1D grid");
  const int K = x.K();
  const auto& p = x.points();
  const auto cuts = x.cut_points();
  TridiagonalMatrix t;
  t.diag.resize(K);
  t.off.resize(K - 1);
  std::vector<double> B(K - 1);
  for (int i = 0; i + 1 < K; ++i) B[i] = 0.5 * (p(i + 1, 0) - p(i, 0)) * m.pdf(cuts[i]);
  for (int i = 0; i < K; ++i) {
    const double lo = i == 0 ? -kInf : cuts[i - 1];
    const double hi = i == K - 1 ? kInf : cuts[i];
    double d = 2.0 * m.cell_moments(lo, hi).mass;
    if (i > 0) d -= B[i - 1];
    if (i + 1 < K) d -= B[i];
    t.diag[i] = d;
  }
  for (int i = 0; i + 1 < K; ++i) t.off[i] = -B[i];
  return t;
}

TridiagonalMatrix hessian_1d(const std::vector<double>& grid, const Measure& m) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidQuantizer("hessian_1d: grid must be strictly increasing");
  return hessian_1d(Quantizer::from_values(grid), m);
}

Hessian2d hessian_2d_boundary(const Quantizer& x, const Measure& m, std::optional<double> truncation) {
  if (x.dim() != 2 || m.dim() != 2) throw UnsupportedOperation("hessian_2d_boundary needs d = 2");
  if (!m.is_analytic()) throw UnsupportedOperation("hessian_2d_boundary needs an analytic measure");
  const double scale = std::max(1.0, x.max_norm());
  if (x.min_separation() < 1e-8 * scale) throw InvalidQuantizer("hessian_2d_boundary: near-coincident centers");
  const int K = x.K();

  Hessian2d out;
  if (truncation) {
    if (!(*truncation > 0.0)) throw DomainError("truncation radius must be positive");
    const Eigen::Vector2d c = m.mean();
    out.window_lo = c.array() - *truncation;
    out.window_hi = c.array() + *truncation;
  } else {
    const auto [lo, hi] = m.effective_box();
    out.window_lo = lo;
    out.window_hi = hi;
  }
  const auto cells = geom::voronoi_cells(x.points(), out.window_lo, out.window_hi);
  const auto facets = geom::voronoi_facets(x.points(), out.window_lo, out.window_hi);

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * K, 2 * K);
  Eigen::VectorXd buf(2);
  for (int i = 0; i < K; ++i) {
    auto f = [&](const geom::Point& q, Eigen::Ref<Eigen::VectorXd> v) {
      buf = q;
      v(0) = m.pdf(buf);
    };
    const double mass = geom::integrate(cells[static_cast<std::size_t>(i)], f, 1, 1e-14)(0);
    H.block<2, 2>(2 * i, 2 * i) += 2.0 * mass * Eigen::Matrix2d::Identity();
  }

  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  for (const auto& fc : facets) {
    const Eigen::Vector2d xi = x.points().row(fc.i).transpose();
    const Eigen::Vector2d xj = x.points().row(fc.j).transpose();
    const double delta = (xj - xi).norm();
    const Eigen::Vector2d e = (xj - xi) / delta;
    const Eigen::Vector2d u(-e.y(), e.x());
    const Eigen::Vector2d mid = 0.5 * (xi + xj);
    const double sa = (fc.a - mid).dot(u);
    const double sb = (fc.b - mid).dot(u);
    const double lo = std::min(sa, sb), hi = std::max(sa, sb);
    // Along the facet xi = mid + s u and the density depends on s only.
    double M[3];
    for (int k = 0; k < 3; ++k) {
      M[k] = integrate(
                 [&](double s) {
                   buf = mid + s * u;
                   return std::pow(s, k) * m.pdf(buf);
                 },
                 lo, hi, opt)
                 .value;
    }
    const Eigen::Matrix2d ee = e * e.transpose();
    const Eigen::Matrix2d uu = u * u.transpose();
    const Eigen::Matrix2d eu = e * u.transpose();
    // (x_i - xi)(x_j - xi)^T integrated over the facet, weighted by f / delta.
    const Eigen::Matrix2d cross_ij =
        (-0.25 * delta * delta * M[0] * ee + 0.5 * delta * M[1] * (eu - eu.transpose()) + M[2] * uu) / delta;
    // (x_i - xi)(x_i - xi)^T and (x_j - xi)(x_j - xi)^T, same weighting.
    const Eigen::Matrix2d self_i =
        (0.25 * delta * delta * M[0] * ee + 0.5 * delta * M[1] * (eu + eu.transpose()) + M[2] * uu) / delta;
    const Eigen::Matrix2d self_j =
        (0.25 * delta * delta * M[0] * ee - 0.5 * delta * M[1] * (eu + eu.transpose()) + M[2] * uu) / delta;
    H.block<2, 2>(2 * fc.i, 2 * fc.j) += 2.0 * cross_ij;
    H.block<2, 2>(2 * fc.j, 2 * fc.i) += 2.0 * cross_ij.transpose();
    H.block<2, 2>(2 * fc.i, 2 * fc.i) -= 2.0 * self_i;
    H.block<2, 2>(2 * fc.j, 2 * fc.j) -= 2.0 * self_j;
    out.crosses_boundary = out.crosses_boundary || fc.touches_window;
  }
  out.matrix = 0.5 * (H + H.transpose());
  return out;
}

Eigen::MatrixXd fd_hessian(const Quantizer& x, const Measure& m, double step, const Method& method) {
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("fd_hessian: step must be positive");
  if (x.K() > 1 && !(2.0 * step < x.min_separation()))
    throw DomainError("fd_hessian: step too large for the grid separation");
  const int K = x.K();
  const int d = x.dim();
  const int n = K * d;
  const Eigen::MatrixXd base = x.points();
  auto D = [&](int a, double ha, int b, double hb) {
    Eigen::MatrixXd p = base;
    if (a >= 0) p(a / d, a % d) += ha;
    if (b >= 0) p(b / d, b % d) += hb;
    return distortion(Quantizer(std::move(p)), m, method).value;
  };
  const double d0 = D(-1, 0, -1, 0);
  Eigen::MatrixXd H(n, n);
  for (int a = 0; a < n; ++a) {
    H(a, a) = (D(a, step, -1, 0) - 2.0 * d0 + D(a, -step, -1, 0)) / (step * step);
    for (int b = a + 1; b < n; ++b) {
      const double v = (D(a, step, b, step) - D(a, step, b, -step) - D(a, -step, b, step) + D(a, -step, b, -step)) /
                       (4.0 * step * step);
      H(a, b) = H(b, a) = v;
    }
  }
  return H;
}

Eigen::MatrixXd fd_hessian(const Quantizer& x, const Measure& m, double step) {
  return fd_hessian(x, m, step, default_method(m));
}

int eigenvalues_below(const TridiagonalMatrix& t, double shift) {
  const int K = t.size();
  double scale = 0.0;
  for (double v : t.diag) scale = std::max(scale, std::abs(v));
  for (double v : t.off) scale = std::max(scale, std::abs(v));
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, scale * scale);
  int count = 0;
  double q = 1.0;
  for (int i = 0; i < K; ++i) {
    q = t.diag[i] - shift - (i > 0 ? t.off[i - 1] * t.off[i - 1] / q : 0.0);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

PdCertificate pd_certificate(const TridiagonalMatrix& t) {
  const int K = t.size();
  if (K < 1 || static_cast<int>(t.off.size()) != K - 1) throw DomainError("pd_certificate: malformed tridiagonal matrix");
  PdCertificate c;
  c.leading_minors.resize(K);
  double fm2 = 1.0, fm1 = t.diag[0];
  c.leading_minors[0] = fm1;
  for (int k = 1; k < K; ++k) {
    const double fk = t.diag[k] * fm1 - t.off[k - 1] * t.off[k - 1] * fm2;
    c.leading_minors[k] = fk;
    fm2 = fm1;
    fm1 = fk;
  }
  c.positive_definite = std::all_of(c.leading_minors.begin(), c.leading_minors.end(), [](double v) { return v > 0.0; });
  c.row_excess = t.row_sums();

  // Gershgorin enclosure, then bisection on the Sturm count.
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < K; ++i) {
    const double r = (i > 0 ? std::abs(t.off[i - 1]) : 0.0) + (i + 1 < K ? std::abs(t.off[i]) : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
  }
  const double width = std::max(hi - lo, std::numeric_limits<double>::min());
  lo -= 1e-14 * width;
  hi += 1e-14 * width;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) break;
    if (eigenvalues_below(t, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  c.lambda_star = lo;
  return c;
}

double lambda_star_for_bound(const TridiagonalMatrix& t) { return pd_certificate(t).lambda_star - kLambdaMargin; }

std::vector<double> row_excess_integrals(const Quantizer& x, const Measure& m) {
  require_1d_analytic(m);
  const int K = x.K();
  const auto cuts = x.cut_points();
  const auto [slo, shi] = m.effective_support();
  QuadratureOptions opt;
  opt.abs_tol = 1e-15;
  opt.rel_tol = 1e-13;
  std::vector<double> L(K);
  for (int i = 0; i < K; ++i) {
    const double a = i == 0 ? slo : std::max(slo, cuts[i - 1]);
    const double b = i == K - 1 ? shi : std::min(shi, cuts[i]);
    const double mass = integrate([&](double s) { return m.pdf(s); }, a, b, opt).value;
    double v = mass * mass;
    if (i > 0) {
      const double c = cuts[i - 1];
      v -= m.pdf(c) * integrate([&](double s) { return (s - c) * m.pdf(s); }, a, b, opt).value;
    }
    if (i + 1 < K) {
      const double c = cuts[i];
      v += m.pdf(c) * integrate([&](double s) { return (s - c) * m.pdf(s); }, a, b, opt).value;
    }
    L[i] = 2.0 * v / mass;
  }
  return L;
}

}  // namespace vqrate
