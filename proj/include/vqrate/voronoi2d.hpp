#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace vqrate::geom {

using Point = Eigen::Vector2d;

// Convex polygon, vertices counter-clockwise.
struct Polygon {
  std::vector<Point> vertices;
  double area() const;
  bool empty() const { return vertices.size() < 3; }
};

Polygon box_polygon(const Point& lo, const Point& hi);

// Keeps the part of `poly` with normal . p <= offset (Sutherland-Hodgman).
Polygon clip(const Polygon& poly, const Point& normal, double offset);

// Voronoi cell of each center intersected with the box [lo, hi].
// Ties between centers go to the lower index only up to measure zero.
std::vector<Polygon> voronoi_cells(const Eigen::MatrixXd& centers, const Point& lo, const Point& hi);

// Shared edge of cells i < j inside the window.
struct Facet {
  int i = 0;
  int j = 0;
  Point a, b;
  // An end point was cut by the window rather than by a third center.
  bool touches_window = false;
};

std::vector<Facet> voronoi_facets(const Eigen::MatrixXd& centers, const Point& lo, const Point& hi);

// Vector-valued integral of f over a convex polygon by fan triangulation,
// a Duffy-collapsed tensor Gauss-Legendre rule and adaptive 4-way splits.
using Integrand = std::function<void(const Point&, Eigen::Ref<Eigen::VectorXd>)>;
Eigen::VectorXd integrate(const Polygon& poly, const Integrand& f, int components, double abs_tol,
                          int max_depth = 8);

}  // namespace vqrate::geom
