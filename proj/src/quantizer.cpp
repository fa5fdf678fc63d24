#include "vqrate/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vqrate/errors.hpp"
#include "vqrate/voronoi2d.hpp"

namespace vqrate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_pairing(const Quantizer& x, const Measure& m, const Method& method) {
  if (x.dim() != m.dim()) throw DomainError("quantizer and measure dimensions differ");
  std::visit(overloaded{[&](const method::Exact1d&) {
                          if (m.dim() != 1 || !m.is_analytic())
                            throw UnsupportedOperation("exact1d needs a 1D analytic measure");
                        },
                        [&](const method::EmpiricalSum&) {
                          if (!m.is_empirical()) throw UnsupportedOperation("empirical method needs an empirical measure");
                        },
                        [&](const method::MonteCarlo& mc) {
                          if (!m.is_analytic()) throw UnsupportedOperation("montecarlo needs an analytic measure");
                          if (mc.samples < 2) throw DomainError("montecarlo needs at least 2 samples");
                        },
                        [&](const method::Cubature2d&) {
                          if (m.dim() != 2 || !m.is_analytic())
                            throw UnsupportedOperation("cubature2d needs a 2D analytic measure");
                        }},
             method);
}

CellStatistics exact_1d_stats(const Quantizer& x, const Measure& m) {
  const int K = x.K();
  CellStatistics s;
  s.mass.resize(K);
  s.first.resize(K, 1);
  s.distortion.resize(K);
  const auto cuts = x.cut_points();
  for (int i = 0; i < K; ++i) {
    const double a = i == 0 ? -kInf : cuts[i - 1];
    const double b = i == K - 1 ? kInf : cuts[i];
    const CellMoments c = m.cell_moments(a, b);
    const double xi = x.points()(i, 0);
    s.mass(i) = c.mass;
    s.first(i, 0) = c.first;
    s.distortion(i) = std::max(0.0, c.second - 2.0 * xi * c.first + xi * xi * c.mass);
  }
  return s;
}

CellStatistics empirical_stats(const Quantizer& x, const Measure& m) {
  const int K = x.K();
  const int d = x.dim();
  CellStatistics s;
  s.mass = Eigen::VectorXd::Zero(K);
  s.first = Eigen::MatrixXd::Zero(K, d);
  s.distortion = Eigen::VectorXd::Zero(K);
  const auto& P = m.points();
  const auto n = P.rows();
  if (d == 1) {
    // Sorted walk: atoms in (c_{i-1}, c_i] belong to cell i.
    const auto& atoms = m.sorted_atoms();
    const auto cuts = x.cut_points();
    std::size_t k = 0;
    for (int i = 0; i < K; ++i) {
      const double b = i == K - 1 ? kInf : cuts[i];
      const double xi = x.points()(i, 0);
      long double cnt = 0, s1 = 0, s2 = 0;
      for (; k < atoms.size() && atoms[k] <= b; ++k) {
        cnt += 1;
        s1 += atoms[k];
        const long double r = static_cast<long double>(atoms[k]) - xi;
        s2 += r * r;
      }
      s.mass(i) = static_cast<double>(cnt / n);
      s.first(i, 0) = static_cast<double>(s1 / n);
      s.distortion(i) = static_cast<double>(s2 / n);
    }
    return s;
  }
  std::vector<long double> mass(K, 0.0L), dist(K, 0.0L), first(static_cast<std::size_t>(K) * d, 0.0L);
  Eigen::VectorXd row(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    row = P.row(r).transpose();
    const auto nn = nearest(x.points(), row.data());
    mass[nn.index] += 1;
    dist[nn.index] += nn.sq_distance;
    for (int c = 0; c < d; ++c) first[static_cast<std::size_t>(nn.index) * d + c] += row(c);
  }
  for (int i = 0; i < K; ++i) {
    s.mass(i) = static_cast<double>(mass[i] / n);
    s.distortion(i) = static_cast<double>(dist[i] / n);
    for (int c = 0; c < d; ++c) s.first(i, c) = static_cast<double>(first[static_cast<std::size_t>(i) * d + c] / n);
  }
  return s;
}

CellStatistics monte_carlo_stats(const Quantizer& x, const Measure& m, const method::MonteCarlo& mc,
                                 double* std_error) {
  const int K = x.K();
  const int d = x.dim();
  Stream stream = mc.stream;
  std::vector<long double> mass(K, 0.0L), dist(K, 0.0L), first(static_cast<std::size_t>(K) * d, 0.0L);
  long double sum = 0.0L, sum2 = 0.0L;
  std::vector<double> buf(d);
  for (std::size_t r = 0; r < mc.samples; ++r) {
    m.draw(stream, buf.data());
    const auto nn = nearest(x.points(), buf.data());
    mass[nn.index] += 1;
    dist[nn.index] += nn.sq_distance;
    sum += nn.sq_distance;
    sum2 += static_cast<long double>(nn.sq_distance) * nn.sq_distance;
    for (int c = 0; c < d; ++c) first[static_cast<std::size_t>(nn.index) * d + c] += buf[c];
  }
  const long double N = static_cast<long double>(mc.samples);
  CellStatistics s;
  s.samples = mc.samples;
  s.mass.resize(K);
  s.first.resize(K, d);
  s.distortion.resize(K);
  for (int i = 0; i < K; ++i) {
    s.mass(i) = static_cast<double>(mass[i] / N);
    s.distortion(i) = static_cast<double>(dist[i] / N);
    for (int c = 0; c < d; ++c) s.first(i, c) = static_cast<double>(first[static_cast<std::size_t>(i) * d + c] / N);
  }
  if (std_error) {
    const long double mean = sum / N;
    const long double var = std::max(0.0L, (sum2 / N - mean * mean) * N / (N - 1));
    *std_error = static_cast<double>(std::sqrt(var / N));
  }
  return s;
}

CellStatistics cubature_stats(const Quantizer& x, const Measure& m, const method::Cubature2d& cub) {
  const int K = x.K();
  const auto [lo, hi] = m.effective_box();
  const auto cells = geom::voronoi_cells(x.points(), lo, hi);
  CellStatistics s;
  s.mass.resize(K);
  s.first.resize(K, 2);
  s.distortion.resize(K);
  Eigen::VectorXd p(2);
  for (int i = 0; i < K; ++i) {
    const geom::Point xi = x.points().row(i).transpose();
    auto f = [&](const geom::Point& q, Eigen::Ref<Eigen::VectorXd> out) {
      p = q;
      const double w = m.pdf(p);
      out(0) = w;
      out(1) = w * q.x();
      out(2) = w * q.y();
      out(3) = w * (q - xi).squaredNorm();
    };
    const Eigen::VectorXd v = geom::integrate(cells[static_cast<std::size_t>(i)], f, 4, cub.abs_tol);
    s.mass(i) = v(0);
    s.first(i, 0) = v(1);
    s.first(i, 1) = v(2);
    s.distortion(i) = v(3);
  }
  return s;
}

}  // namespace

Quantizer::Quantizer(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) throw InvalidQuantizer("quantizer needs K >= 1 points");
  if (!points_.allFinite()) throw InvalidQuantizer("quantizer has non-finite coordinates");
  const auto K = points_.rows();
  if (points_.cols() == 1) {
    std::sort(points_.data(), points_.data() + K);
    for (Eigen::Index i = 1; i < K; ++i)
      if (points_(i, 0) == points_(i - 1, 0)) throw InvalidQuantizer("quantizer has duplicate points");
    return;
  }
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = i + 1; j < K; ++j)
      if (points_.row(i) == points_.row(j)) throw InvalidQuantizer("quantizer has duplicate points");
}

Quantizer Quantizer::from_values(const std::vector<double>& values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
  return Quantizer(std::move(m));
}

std::vector<double> Quantizer::values() const {
  if (dim() != 1) throw UnsupportedOperation("values() needs a 1D quantizer");
  return {points_.data(), points_.data() + points_.rows()};
}

std::vector<double> Quantizer::cut_points() const {
  if (dim() != 1) throw UnsupportedOperation("cut_points() needs a 1D quantizer");
  std::vector<double> c;
  for (Eigen::Index i = 0; i + 1 < points_.rows(); ++i) c.push_back(0.5 * (points_(i, 0) + points_(i + 1, 0)));
  return c;
}

double Quantizer::min_separation() const {
  double best = kInf;
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points_.rows(); ++j) best = std::min(best, (points_.row(i) - points_.row(j)).norm());
  return best;
}

double Quantizer::max_norm() const { return points_.rowwise().norm().maxCoeff(); }

Nearest nearest(const Eigen::MatrixXd& centers, const double* xi) {
  Nearest best{0, kInf};
  const auto d = centers.cols();
  for (Eigen::Index i = 0; i < centers.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const double r = xi[c] - centers(i, c);
      s += r * r;
    }
    if (s < best.sq_distance) best = {static_cast<int>(i), s};
  }
  return best;
}

Nearest nearest(const Quantizer& x, const Eigen::Ref<const Eigen::VectorXd>& xi) {
  if (xi.size() != x.dim()) throw DomainError("nearest: point dimension mismatch");
  const Eigen::VectorXd p = xi;
  return nearest(x.points(), p.data());
}

Method default_method(const Measure& m) {
  if (m.is_empirical()) return method::EmpiricalSum{};
  if (m.dim() == 1) return method::Exact1d{};
  return method::MonteCarlo{};
}

std::string method_name(const Method& method) {
  return std::visit(overloaded{[](const method::Exact1d&) { return std::string("exact1d"); },
                               [](const method::EmpiricalSum&) { return std::string("empirical"); },
                               [](const method::MonteCarlo&) { return std::string("montecarlo"); },
                               [](const method::Cubature2d&) { return std::string("cubature2d"); }},
                    method);
}

double DistortionEstimate::error() const { return std::sqrt(std::max(0.0, value)); }

CellStatistics cell_statistics(const Quantizer& x, const Measure& m, const Method& method) {
  check_pairing(x, m, method);
  return std::visit(overloaded{[&](const method::Exact1d&) { return exact_1d_stats(x, m); },
                               [&](const method::EmpiricalSum&) {
                                 if (x.dim() == 1) {
                                   // prefix sums over the sorted atoms
                                   CellStatistics s;
                                   const int K = x.K();
                                   s.mass.resize(K);
                                   s.first.resize(K, 1);
                                   s.distortion.resize(K);
                                   const auto cuts = x.cut_points();
                                   for (int i = 0; i < K; ++i) {
                                     const double a = i == 0 ? -kInf : cuts[i - 1];
                                     const double b = i == K - 1 ? kInf : cuts[i];
                                     const CellMoments c = m.cell_moments(a, b);
                                     const double xi = x.points()(i, 0);
                                     s.mass(i) = c.mass;
                                     s.first(i, 0) = c.first;
                                     s.distortion(i) = std::max(0.0, c.second - 2.0 * xi * c.first + xi * xi * c.mass);
                                   }
                                   return s;
                                 }
                                 return empirical_stats(x, m);
                               },
                               [&](const method::MonteCarlo& mc) { return monte_carlo_stats(x, m, mc, nullptr); },
                               [&](const method::Cubature2d& c) { return cubature_stats(x, m, c); }},
                    method);
}

DistortionEstimate distortion(const Quantizer& x, const Measure& m, const Method& method) {
  check_pairing(x, m, method);
  DistortionEstimate est;
  if (const auto* mc = std::get_if<method::MonteCarlo>(&method)) {
    est.value = monte_carlo_stats(x, m, *mc, &est.std_error).distortion.sum();
    return est;
  }
  if (std::holds_alternative<method::EmpiricalSum>(method)) {
    est.value = empirical_stats(x, m).distortion.sum();
    return est;
  }
  est.value = cell_statistics(x, m, method).distortion.sum();
  return est;
}

DistortionEstimate distortion(const Quantizer& x, const Measure& m) { return distortion(x, m, default_method(m)); }

Eigen::MatrixXd gradient(const Quantizer& x, const Measure& m, const Method& method) {
  const auto s = cell_statistics(x, m, method);
  return 2.0 * (x.points().array().colwise() * s.mass.array() - s.first.array()).matrix();
}

Eigen::MatrixXd gradient(const Quantizer& x, const Measure& m) { return gradient(x, m, default_method(m)); }

VoronoiWeights voronoi_weights(const Quantizer& x, const Measure& m, const Method& method) {
  const auto s = cell_statistics(x, m, method);
  VoronoiWeights w;
  w.weights = s.mass;
  w.method = method_name(method);
  w.samples = s.samples;
  return w;
}

VoronoiWeights voronoi_weights(const Quantizer& x, const Measure& m) {
  return voronoi_weights(x, m, default_method(m));
}

}  // namespace vqrate
