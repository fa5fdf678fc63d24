#include <gtest/gtest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/quantizer.hpp"
#include "vqrate/solvers.hpp"
#include "vqrate/wasserstein.hpp"

using namespace vqrate;

namespace {

Quantizer random_grid(Stream& s, int K, double lo, double hi) {
  std::vector<double> v(K);
  for (auto& x : v) x = lo + (hi - lo) * s.uniform();
  return Quantizer::from_values(v);
}

Quantizer grid2(std::initializer_list<double> xy) {
  std::vector<double> v(xy);
  Eigen::MatrixXd m(v.size() / 2, 2);
  for (std::size_t i = 0; i < v.size() / 2; ++i) m.row(i) << v[2 * i], v[2 * i + 1];
  return Quantizer(m);
}

}  // namespace

TEST(Quantizer, ValidatesAndSorts) {
  const auto q = Quantizer::from_values({0.7, -1.0, 0.2});
  EXPECT_EQ(q.values(), (std::vector<double>{-1.0, 0.2, 0.7}));
  EXPECT_NEAR(q.cut_points()[0], -0.4, 1e-16);
  EXPECT_NEAR(q.cut_points()[1], 0.45, 1e-16);
  EXPECT_THROW(Quantizer::from_values({0.1, 0.1}), InvalidQuantizer);
  EXPECT_THROW(Quantizer::from_values({}), InvalidQuantizer);
  EXPECT_THROW(Quantizer::from_values({0.0, std::nan("")}), InvalidQuantizer);
  EXPECT_THROW(grid2({0, 0, 0, 0}), InvalidQuantizer);
}

TEST(Quantizer, NearestExamples) {
  const auto q = Quantizer::from_values({0, 1});
  auto r = nearest(q, Eigen::VectorXd::Constant(1, 0.9));
  EXPECT_EQ(r.index, 1);
  EXPECT_NEAR(r.sq_distance, 0.01, 1e-15);
  r = nearest(q, Eigen::VectorXd::Constant(1, 0.5));
  EXPECT_EQ(r.index, 0);
  EXPECT_DOUBLE_EQ(r.sq_distance, 0.25);
  r = nearest(grid2({0, 0, 3, 4}), Eigen::Vector2d(3, 4));
  EXPECT_EQ(r.index, 1);
  EXPECT_EQ(r.sq_distance, 0.0);
}

TEST(Quantizer, DistortionExamples) {
  const auto e01 = Measure::empirical(std::vector<double>{0, 1});
  EXPECT_EQ(distortion(Quantizer::from_values({0, 1}), e01).value, 0.0);
  EXPECT_DOUBLE_EQ(distortion(Quantizer::from_values({0.5}), e01).value, 0.25);
  EXPECT_NEAR(distortion(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1)).value, 1.0 / 48.0, 1e-16);
  EXPECT_NEAR(distortion(Quantizer::from_values({-1, 1}), Measure::gaussian(0, 1)).value, oracle::kGaussDistortionPm1,
              1e-15);
  EXPECT_NEAR(distortion(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1)).error(),
              std::sqrt(1.0 / 48.0), 1e-15);
}

TEST(Quantizer, GradientExamples) {
  const auto g = gradient(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1));
  EXPECT_NEAR(g.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  const auto e = gradient(Quantizer::from_values({0}), Measure::empirical(std::vector<double>{0, 2}));
  EXPECT_DOUBLE_EQ(e(0, 0), -2.0);
  const auto n = gradient(Quantizer::from_values({0}), Measure::gaussian(0, 1));
  EXPECT_NEAR(n(0, 0), 0.0, 1e-15);
}

TEST(Quantizer, VoronoiWeightExamples) {
  const auto u = voronoi_weights(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1));
  EXPECT_NEAR(u.weights(0), 0.5, 1e-15);
  EXPECT_EQ(u.method, "exact1d");
  const auto e = voronoi_weights(Quantizer::from_values({0, 2}), Measure::empirical(std::vector<double>{0, 1, 2}));
  EXPECT_DOUBLE_EQ(e.weights(0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(e.weights(1), 1.0 / 3.0);
  EXPECT_EQ(e.method, "empirical");
  const auto g = voronoi_weights(Quantizer::from_values({-1, 1}), Measure::gaussian(0, 1), method::Exact1d{});
  EXPECT_NEAR(g.weights(0), 0.5, 1e-15);
  EXPECT_NEAR(g.weights(1), 0.5, 1e-15);
}

TEST(Quantizer, EmpiricalNdTieGoesToLowestIndex) {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 1, 0, 2, 0;
  const auto w = voronoi_weights(grid2({0, 0, 2, 0}), Measure::empirical(pts));
  EXPECT_DOUBLE_EQ(w.weights(0), 2.0 / 3.0);
}

TEST(Quantizer, MethodPairingIsChecked) {
  const auto u = Measure::uniform(0, 1);
  const auto e = Measure::empirical(std::vector<double>{0, 1});
  const auto q = Quantizer::from_values({0.2, 0.6});
  EXPECT_THROW(distortion(q, u, method::EmpiricalSum{}), UnsupportedOperation);
  EXPECT_THROW(distortion(q, e, method::Exact1d{}), UnsupportedOperation);
  EXPECT_THROW(distortion(q, e, method::MonteCarlo{}), UnsupportedOperation);
  const auto g2 = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  EXPECT_THROW(distortion(grid2({0, 0, 1, 1}), g2, method::Exact1d{}), UnsupportedOperation);
  EXPECT_THROW(distortion(q, g2), DomainError);
}

TEST(Quantizer, WeightsSumToOne) {
  Stream s(4);
  const auto m = Measure::laplace(0, 1);
  const auto w = voronoi_weights(random_grid(s, 7, -3, 3), m);
  EXPECT_NEAR(w.weights.sum(), 1.0, 1e-12);
  const auto g2 = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  const auto mc = voronoi_weights(grid2({0, 0, 1, 0, 0, 1}), g2);
  EXPECT_EQ(mc.method, "montecarlo");
  EXPECT_EQ(mc.samples, 100000u);
  EXPECT_NEAR(mc.weights.sum(), 1.0, 1e-9);
  const auto cub = voronoi_weights(grid2({0, 0, 1, 0, 0, 1}), g2, method::Cubature2d{});
  EXPECT_NEAR(cub.weights.sum(), 1.0, 1e-11);
  EXPECT_LT((cub.weights - mc.weights).cwiseAbs().maxCoeff(), 0.01);
}

TEST(QuantizerProperty, MonteCarloDistortionConverges) {
  method::MonteCarlo mc;
  mc.samples = 1000000;
  mc.stream = Stream(77);
  const auto d = distortion(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1), mc);
  ASSERT_GT(d.std_error, 0.0);
  // std_error is sigma_hat / sqrt(N)
  EXPECT_LE(std::abs(d.value - 1.0 / 48.0), 4.0 * d.std_error);
}

TEST(QuantizerProperty, GradientMatchesFiniteDifferences) {
  const std::vector<Measure> laws = {Measure::uniform(0, 1), Measure::gaussian(0, 1), Measure::laplace(0, 1),
                                      Measure::exponential(1.5)};
  Stream s(303);
  int checked = 0;
  for (int r = 0; r < 50; ++r) {
    const auto& m = laws[r % laws.size()];
    const auto [lo, hi] = m.effective_support();
    const double a = std::max(lo, -3.0), b = std::min(hi, 3.0);
    const int K = 1 + r % 6;
    const Quantizer x = random_grid(s, K, a, b);
    if (K > 1 && x.min_separation() < 1e-3) continue;
    const Eigen::MatrixXd g = gradient(x, m);
    const double h = 1e-5;
    for (int i = 0; i < K; ++i) {
      auto vp = x.values(), vm = x.values();
      vp[i] += h;
      vm[i] -= h;
      const double fd = (distortion(Quantizer::from_values(vp), m).value -
                         distortion(Quantizer::from_values(vm), m).value) / (2 * h);
      const double scale = std::max(std::abs(g(i, 0)), 1e-3);
      EXPECT_LE(std::abs(fd - g(i, 0)) / scale, 1e-6) << m.kind_name() << " r=" << r << " i=" << i;
    }
    ++checked;
  }
  EXPECT_GE(checked, 45);
}

TEST(QuantizerProperty, ErrorIsLipschitzInW2) {
  Stream s(404);
  const std::vector<std::pair<Measure, Measure>> pairs = {
      {Measure::gaussian(0, 1), Measure::gaussian(0.3, 1.2)},
      {Measure::uniform(0, 1), Measure::uniform(0.1, 1.3)},
      {Measure::gaussian(0, 1), Measure::laplace(0, 1)},
      {Measure::exponential(1), Measure::gaussian(1, 1)},
  };
  for (const auto& [mu, nu] : pairs) {
    const double w = w_p_1d(mu, nu, 2).distance;
    for (int r = 0; r < 50; ++r) {
      const Quantizer x = random_grid(s, 1 + r % 5, -2, 2);
      const double em = distortion(x, mu).error();
      const double en = distortion(x, nu).error();
      EXPECT_LE(std::abs(em - en), w + 1e-9);
    }
  }
  // empirical pair
  Stream t(5);
  const auto a = Measure::empirical(Measure::gaussian(0, 1).sample(300, t));
  const auto b = Measure::empirical(Measure::laplace(0.2, 1).sample(200, t));
  const double w = w_p_1d(a, b, 2).distance;
  for (int r = 0; r < 50; ++r) {
    const Quantizer x = random_grid(s, 1 + r % 5, -2, 2);
    EXPECT_LE(std::abs(distortion(x, a).error() - distortion(x, b).error()), w + 1e-9);
  }
}

TEST(QuantizerProperty, EmpiricalCellStatisticsAgreeWithDirectSum) {
  Stream s(9);
  const auto m = Measure::empirical(Measure::gaussian(0, 1).sample(1000, s));
  const auto x = random_grid(s, 6, -2, 2);
  const auto st = cell_statistics(x, m, method::EmpiricalSum{});
  EXPECT_NEAR(st.distortion.sum(), distortion(x, m).value, 1e-12);
  EXPECT_NEAR(st.mass.sum(), 1.0, 1e-15);
}

TEST(QuantizerProperty, CubatureAgreesWithMonteCarloIn2d) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.2, 0.2, 0.7;
  const auto g = Measure::gaussian_nd(Eigen::Vector2d(0.1, -0.2), cov);
  const auto x = grid2({-0.5, 0.1, 0.7, 0.4, 0.2, -0.9});
  method::MonteCarlo mc;
  mc.samples = 400000;
  const auto a = distortion(x, g, mc);
  const auto b = distortion(x, g, method::Cubature2d{});
  EXPECT_LE(std::abs(a.value - b.value), 5.0 * a.std_error);
  const auto box = Measure::uniform_box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  // one center: distortion is the trace of the covariance plus the shift
  const auto one = distortion(grid2({0.5, 0.5}), box, method::Cubature2d{});
  EXPECT_NEAR(one.value, 2.0 / 12.0, 1e-12);
}
