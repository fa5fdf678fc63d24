#include "vqrate/voronoi2d.hpp"

#include <cmath>
#include <limits>

#include "vqrate/quadrature.hpp"

namespace vqrate::geom {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

struct TriangleRule {
  std::vector<double> u, v, w;  // Duffy square nodes and weights on [0,1]^2
};

const TriangleRule& triangle_rule() {
  static const TriangleRule rule = [] {
    const auto gl = make_gauss_legendre(12);
    TriangleRule r;
    for (std::size_t a = 0; a < gl.nodes.size(); ++a)
      for (std::size_t b = 0; b < gl.nodes.size(); ++b) {
        const double u = 0.5 * (gl.nodes[a] + 1.0);
        const double v = 0.5 * (gl.nodes[b] + 1.0);
        r.u.push_back(u);
        r.v.push_back(v);
        r.w.push_back(0.25 * gl.weights[a] * gl.weights[b] * u);
      }
    return r;
  }();
  return rule;
}

void triangle_panel(const Point& a, const Point& b, const Point& c, const Integrand& f,
                    Eigen::Ref<Eigen::VectorXd> out, Eigen::VectorXd& scratch) {
  const auto& rule = triangle_rule();
  const double jac = std::abs(cross(b - a, c - b));
  out.setZero();
  for (std::size_t k = 0; k < rule.w.size(); ++k) {
    const Point p = a + rule.u[k] * ((b - a) + rule.v[k] * (c - b));
    f(p, scratch);
    out += (rule.w[k] * jac) * scratch;
  }
}

Eigen::VectorXd adapt_triangle(const Point& a, const Point& b, const Point& c, const Integrand& f,
                               const Eigen::VectorXd& whole, double tol, int depth, Eigen::VectorXd& scratch) {
  const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
  const Point tri[4][3] = {{a, ab, ca}, {ab, b, bc}, {ca, bc, c}, {ab, bc, ca}};
  Eigen::MatrixXd parts(whole.size(), 4);
  for (int t = 0; t < 4; ++t) triangle_panel(tri[t][0], tri[t][1], tri[t][2], f, parts.col(t), scratch);
  const Eigen::VectorXd refined = parts.rowwise().sum();
  if (depth <= 0 || (refined - whole).cwiseAbs().maxCoeff() <= tol) return refined;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(whole.size());
  for (int t = 0; t < 4; ++t)
    total += adapt_triangle(tri[t][0], tri[t][1], tri[t][2], f, parts.col(t), 0.25 * tol, depth - 1, scratch);
  return total;
}

}  // namespace

double Polygon::area() const {
  double s = 0.0;
  for (std::size_t k = 0; k < vertices.size(); ++k)
    s += cross(vertices[k], vertices[(k + 1) % vertices.size()]);
  return 0.5 * s;
}

Polygon box_polygon(const Point& lo, const Point& hi) {
  return Polygon{{Point(lo.x(), lo.y()), Point(hi.x(), lo.y()), Point(hi.x(), hi.y()), Point(lo.x(), hi.y())}};
}

Polygon clip(const Polygon& poly, const Point& normal, double offset) {
  Polygon out;
  const auto n = poly.vertices.size();
  if (n == 0) return out;
  for (std::size_t k = 0; k < n; ++k) {
    const Point& p = poly.vertices[k];
    const Point& q = poly.vertices[(k + 1) % n];
    const double sp = normal.dot(p) - offset;
    const double sq = normal.dot(q) - offset;
    if (sp <= 0.0) out.vertices.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
      const double t = sp / (sp - sq);
      out.vertices.push_back(p + t * (q - p));
    }
  }
  if (out.vertices.size() < 3) out.vertices.clear();
  return out;
}

std::vector<Polygon> voronoi_cells(const Eigen::MatrixXd& centers, const Point& lo, const Point& hi) {
  const auto K = centers.rows();
  std::vector<Polygon> cells;
  cells.reserve(static_cast<std::size_t>(K));
  for (Eigen::Index i = 0; i < K; ++i) {
    Polygon cell = box_polygon(lo, hi);
    const Point xi = centers.row(i).transpose();
    for (Eigen::Index k = 0; k < K && !cell.empty(); ++k) {
      if (k == i) continue;
      const Point xk = centers.row(k).transpose();
      cell = clip(cell, xk - xi, 0.5 * (xk.squaredNorm() - xi.squaredNorm()));
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<Facet> voronoi_facets(const Eigen::MatrixXd& centers, const Point& lo, const Point& hi) {
  std::vector<Facet> facets;
  const auto K = centers.rows();
  const double span = (hi - lo).norm();
  for (Eigen::Index i = 0; i < K; ++i) {
    const Point xi = centers.row(i).transpose();
    for (Eigen::Index j = i + 1; j < K; ++j) {
      const Point xj = centers.row(j).transpose();
      const Point e = (xj - xi).normalized();
      const Point u(-e.y(), e.x());
      const Point m = 0.5 * (xi + xj);
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      bool min_by_window = false, max_by_window = false;
      auto constrain = [&](const Point& n, double c, bool window) {
        // n . (m + t u) <= c
        const double nu = n.dot(u);
        const double rhs = c - n.dot(m);
        if (std::abs(nu) <= 1e-300) {
          if (rhs < 0.0) tmax = tmin - 1.0;  // parallel and excluded
          return;
        }
        const double t = rhs / nu;
        if (nu > 0.0 && t < tmax) {
          tmax = t;
          max_by_window = window;
        } else if (nu < 0.0 && t > tmin) {
          tmin = t;
          min_by_window = window;
        }
      };
      for (int axis = 0; axis < 2; ++axis) {
        Point n = Point::Zero();
        n(axis) = 1.0;
        constrain(n, hi(axis), true);
        constrain(-n, -lo(axis), true);
      }
      for (Eigen::Index k = 0; k < K; ++k) {
        if (k == i || k == j) continue;
        const Point xk = centers.row(k).transpose();
        constrain(xk - xi, 0.5 * (xk.squaredNorm() - xi.squaredNorm()), false);
      }
      if (!(tmax - tmin > 1e-14 * span)) continue;
      Facet f;
      f.i = static_cast<int>(i);
      f.j = static_cast<int>(j);
      f.a = m + tmin * u;
      f.b = m + tmax * u;
      f.touches_window = min_by_window || max_by_window;
      facets.push_back(f);
    }
  }
  return facets;
}

Eigen::VectorXd integrate(const Polygon& poly, const Integrand& f, int components, double abs_tol, int max_depth) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(components);
  if (poly.empty()) return total;
  Eigen::VectorXd scratch(components), whole(components);
  const auto& v = poly.vertices;
  const double area = std::abs(poly.area());
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    const double tri_area = 0.5 * std::abs(cross(v[k] - v[0], v[k + 1] - v[0]));
    if (tri_area <= 0.0) continue;
    triangle_panel(v[0], v[k], v[k + 1], f, whole, scratch);
    const double tol = area > 0.0 ? abs_tol * tri_area / area : abs_tol;
    total += adapt_triangle(v[0], v[k], v[k + 1], f, whole, tol, max_depth, scratch);
  }
  return total;
}

}  // namespace vqrate::geom
