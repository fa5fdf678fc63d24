#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracle_values.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/wasserstein.hpp"

using namespace vqrate;

namespace {

Measure cloud(Stream& s, std::size_t n, int d, double shift = 0.0) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = shift + s.normal();
  return Measure::empirical(x);
}

// Brute force over all permutations, small n only.
double brute_w2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  std::vector<int> p(a.rows());
  std::iota(p.begin(), p.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < a.rows(); ++i) c += (a.row(i) - b.row(p[i])).squaredNorm();
    best = std::min(best, c);
  } while (std::next_permutation(p.begin(), p.end()));
  return std::sqrt(best / a.rows());
}

}  // namespace

TEST(Wp1d, Examples) {
  const auto g = Measure::gaussian(0, 1);
  EXPECT_NEAR(w_p_1d(g, g).distance, 0.0, 1e-12);
  EXPECT_NEAR(w_p_1d(g, Measure::gaussian(1.7, 1)).distance, 1.7, 1e-8);
  EXPECT_NEAR(w_p_1d(g, Measure::gaussian(-0.4, 1), 1).distance, 0.4, 1e-8);
  EXPECT_NEAR(w_p_1d(Measure::empirical(std::vector<double>{0, 1}), Measure::uniform(0, 1)).distance,
              oracle::kSqrt1Over12, 1e-14);
  EXPECT_NEAR(w_p_1d(g, Measure::laplace(0, 1.0 / std::sqrt(2.0))).distance, oracle::kW2GaussLaplace, 1e-8);
  EXPECT_THROW(w_p_1d(Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity()), g),
               UnsupportedOperation);
  EXPECT_THROW(w_p_1d(g, g, 3), DomainError);
}

TEST(Wp1d, EmpiricalVsEmpiricalUnequalSizes) {
  // {0,1} vs {0,0.5,1}: quantiles differ on (1/3,1/2] by 0.5 and on (1/2,2/3] by 0.5
  const auto a = Measure::empirical(std::vector<double>{0, 1});
  const auto b = Measure::empirical(std::vector<double>{0, 0.5, 1});
  EXPECT_NEAR(w_p_1d(a, b, 1).distance, 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(w_p_1d(a, b, 2).distance, std::sqrt(0.25 / 3.0), 1e-15);
}

TEST(WpSorted, Examples) {
  Stream s(1);
  const auto a = cloud(s, 50, 1);
  EXPECT_EQ(w_p_sorted(a, a).distance, 0.0);
  const auto x = Measure::empirical(std::vector<double>{0, 1});
  const auto y = Measure::empirical(std::vector<double>{1, 2});
  EXPECT_DOUBLE_EQ(w_p_sorted(x, y).distance, 1.0);
  for (int p : {1, 2}) {
    const auto b = cloud(s, 50, 1, 0.3);
    EXPECT_NEAR(w_p_sorted(a, b, p).distance, w_p_1d(a, b, p).distance, 1e-12);
  }
  EXPECT_THROW(w_p_sorted(a, x), DomainError);
}

TEST(Assignment, Examples) {
  const auto x = Measure::empirical(std::vector<double>{0.3});
  const auto y = Measure::empirical(std::vector<double>{-1.2});
  EXPECT_NEAR(w2_assignment(x, y).distance, 1.5, 1e-15);
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0, 0, 1, 0;
  b << 0, 1, 1, 1;
  EXPECT_NEAR(w2_assignment(Measure::empirical(a), Measure::empirical(b)).distance, 1.0, 1e-15);
  Stream s(2);
  const auto big1 = cloud(s, 513, 1), big2 = cloud(s, 513, 1);
  EXPECT_THROW(w2_assignment(big1, big2), SizeLimitError);
  EXPECT_THROW(w2_assignment(cloud(s, 3, 1), cloud(s, 4, 1)), DomainError);
}

TEST(Assignment, MatchesBruteForce) {
  Stream s(3);
  for (int r = 0; r < 30; ++r) {
    const auto a = cloud(s, 6, 2), b = cloud(s, 6, 2, 0.5);
    EXPECT_NEAR(w2_assignment(a, b).distance, brute_w2(a.points(), b.points()), 1e-12);
  }
}

TEST(Assignment, EqualsSortedCouplingIn1d) {
  Stream s(4);
  for (int r = 0; r < 100; ++r) {
    const auto a = cloud(s, 64, 1), b = cloud(s, 64, 1, 0.2);
    EXPECT_NEAR(w2_assignment(a, b).distance, w_p_sorted(a, b).distance, 1e-9);
  }
}

TEST(Gaussian, Examples) {
  const auto g = Measure::gaussian(0, 1);
  EXPECT_NEAR(w2_gaussian(g, g).distance, 0.0, 1e-12);
  EXPECT_NEAR(w2_gaussian(g, Measure::gaussian(0, 2)).distance, 1.0, 1e-14);
  EXPECT_NEAR(w_p_1d(g, Measure::gaussian(0, 2)).distance, 1.0, 1e-8);
  const auto a = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  const auto b = Measure::gaussian_nd(Eigen::Vector2d(3, 4), Eigen::Matrix2d::Identity());
  EXPECT_NEAR(w2_gaussian(a, b).distance, 5.0, 1e-14);
  EXPECT_THROW(w2_gaussian(g, Measure::uniform(0, 1)), UnsupportedOperation);
}

TEST(Gaussian, CommutingCovariances) {
  // diagonal covariances: W2^2 = sum (sqrt a_i - sqrt b_i)^2
  Eigen::MatrixXd A = Eigen::Vector3d(1, 4, 9).asDiagonal(), B = Eigen::Vector3d(4, 1, 16).asDiagonal();
  const auto a = Measure::gaussian_nd(Eigen::Vector3d::Zero(), A);
  const auto b = Measure::gaussian_nd(Eigen::Vector3d(1, 0, 0), B);
  EXPECT_NEAR(w2_gaussian(a, b).distance, std::sqrt(1.0 + 1 + 1 + 1), 1e-12);
}

TEST(Gaussian, AgreesWithQuantileQuadrature) {
  Stream s(5);
  for (int r = 0; r < 20; ++r) {
    const auto a = Measure::gaussian(-2 + 4 * s.uniform(), 0.2 + 2 * s.uniform());
    const auto b = Measure::gaussian(-2 + 4 * s.uniform(), 0.2 + 2 * s.uniform());
    EXPECT_NEAR(w2_gaussian(a, b).distance, w_p_1d(a, b).distance, 1e-6);
  }
}

TEST(WassersteinProperty, MetricAxioms) {
  Stream s(6);
  for (int d : {1, 2}) {
    for (int r = 0; r < 100; ++r) {
      const auto a = cloud(s, 12, d), b = cloud(s, 12, d, 0.4), c = cloud(s, 12, d, -0.3);
      auto w = [&](const Measure& x, const Measure& y) {
        return d == 1 ? w_p_1d(x, y).distance : w2_assignment(x, y).distance;
      };
      EXPECT_EQ(w(a, b), w(b, a));
      EXPECT_NEAR(w(a, a), 0.0, 1e-12);
      EXPECT_LE(w(a, c), w(a, b) + w(b, c) + 1e-9);
    }
  }
  // permuted atoms are the same measure
  Eigen::MatrixXd p(3, 2), q(3, 2);
  p << 0, 0, 1, 2, 3, 1;
  q << 3, 1, 0, 0, 1, 2;
  EXPECT_NEAR(w2_assignment(Measure::empirical(p), Measure::empirical(q)).distance, 0.0, 1e-15);
}

TEST(WassersteinProperty, MonotoneInOrder) {
  Stream s(7);
  for (int r = 0; r < 50; ++r) {
    const auto a = cloud(s, 40, 1), b = cloud(s, 25, 1, s.uniform());
    EXPECT_LE(w_p_1d(a, b, 1).distance, w_p_1d(a, b, 2).distance + 1e-9);
    const auto g = Measure::laplace(s.uniform(), 1);
    EXPECT_LE(w_p_1d(a, g, 1).distance, w_p_1d(a, g, 2).distance + 1e-9);
  }
}

TEST(WassersteinProperty, EmpiricalConvergence) {
  const auto u = Measure::uniform(0, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100u, 1000u, 10000u}) {
    std::vector<double> w;
    for (int seed = 0; seed < 21; ++seed) {
      Stream s(500 + seed);
      w.push_back(w_p_1d(Measure::empirical(u.sample(n, s)), u).distance);
    }
    std::nth_element(w.begin(), w.begin() + 10, w.end());
    EXPECT_LT(w[10], prev);
    prev = w[10];
  }
}

TEST(Surrogate, SameSizeReferenceSample) {
  const auto g = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  Stream s(8);
  const auto e = Measure::empirical(g.sample(100, s));
  const auto t = w2_surrogate(e, g, Stream(9));
  EXPECT_EQ(t.method, "assignment-surrogate");
  EXPECT_GT(t.distance, 0.0);
  EXPECT_EQ(t.distance, w2_surrogate(e, g, Stream(9)).distance);
}
