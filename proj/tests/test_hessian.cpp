#include <gtest/gtest.h>

#include <cmath>

#include "oracle_values.hpp"
#include "vqrate/errors.hpp"
#include "vqrate/hessian.hpp"
#include "vqrate/solvers.hpp"

using namespace vqrate;

namespace {

Quantizer uniform_opt(int K) {
  std::vector<double> v(K);
  for (int i = 0; i < K; ++i) v[i] = (2.0 * i + 1.0) / (2.0 * K);
  return Quantizer::from_values(v);
}

double rel_err(const Eigen::MatrixXd& H, const Eigen::MatrixXd& F) {
  return (H - F).cwiseAbs().maxCoeff() / F.cwiseAbs().maxCoeff();
}

Quantizer gaussian_opt(int K) {
  const auto m = Measure::gaussian(0, 1);
  Stream s(1);
  return newton_1d(m, init_quantizer(m, K, InitStrategy::Quantile, s)).quantizer;
}

}  // namespace

TEST(Hessian1d, UniformK2MatchesClosedForm) {
  const auto T = hessian_1d(uniform_opt(2), Measure::uniform(0, 1));
  EXPECT_NEAR(T.diag[0], 0.75, 1e-15);
  EXPECT_NEAR(T.diag[1], 0.75, 1e-15);
  EXPECT_NEAR(T.off[0], -0.25, 1e-15);
}

TEST(Hessian1d, SinglePointIsTwo) {
  for (const auto& m : {Measure::gaussian(0, 1), Measure::laplace(1, 2), Measure::uniform(-1, 4)}) {
    const auto T = hessian_1d(Quantizer::from_values({0.3}), m);
    ASSERT_EQ(T.size(), 1);
    EXPECT_DOUBLE_EQ(T.diag[0], 2.0);
    EXPECT_TRUE(T.off.empty());
  }
}

TEST(Hessian1d, GaussianPm1ClosedFormAndFd) {
  const auto m = Measure::gaussian(0, 1);
  const auto x = Quantizer::from_values({-1, 1});
  const auto T = hessian_1d(x, m);
  // A_i = 1, B_12 = (2/2) phi(0)
  EXPECT_NEAR(T.diag[0], 1.0 - oracle::kInvSqrt2Pi, 1e-15);
  EXPECT_NEAR(T.off[0], -oracle::kInvSqrt2Pi, 1e-15);
  EXPECT_LE(rel_err(T.dense(), fd_hessian(x, m, 1e-4)), 1e-6);
}

TEST(Hessian1d, RejectsBadGrids) {
  EXPECT_THROW(hessian_1d(std::vector<double>{0.5, 0.2}, Measure::uniform(0, 1)), InvalidQuantizer);
  EXPECT_THROW(hessian_1d(std::vector<double>{0.2, 0.2}, Measure::uniform(0, 1)), InvalidQuantizer);
  EXPECT_THROW(hessian_1d(Quantizer::from_values({0, 1}), Measure::empirical(std::vector<double>{0, 1})),
               UnsupportedOperation);
}

TEST(FdHessian, QuadraticAtK1AndUniformK2) {
  const auto F = fd_hessian(Quantizer::from_values({0.1}), Measure::gaussian(0, 1), 1e-3);
  EXPECT_NEAR(F(0, 0), 2.0, 1e-8);
  const auto G = fd_hessian(Quantizer::from_values({0.25, 0.75}), Measure::uniform(0, 1), 1e-4);
  Eigen::Matrix2d expect;
  expect << 0.75, -0.25, -0.25, 0.75;
  EXPECT_LE((G - expect).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(fd_hessian(Quantizer::from_values({0.1}), Measure::gaussian(0, 1), 0.0), DomainError);
  EXPECT_THROW(fd_hessian(Quantizer::from_values({0.0, 0.1}), Measure::gaussian(0, 1), 0.1), DomainError);
}

TEST(FdHessian, SecondOrderConvergence) {
  // Laplace has a curvature change at the kink; pick a smooth Gaussian case.
  const auto m = Measure::gaussian(0, 1);
  const auto x = Quantizer::from_values({-1.1, 0.2, 1.3});
  const Eigen::MatrixXd H = hessian_1d(x, m).dense();
  const double e1 = (fd_hessian(x, m, 0.04) - H).cwiseAbs().maxCoeff();
  const double e2 = (fd_hessian(x, m, 0.02) - H).cwiseAbs().maxCoeff();
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(HessianProperty, ExactAgreesWithFdOnRandomGrids) {
  Stream s(88);
  const std::vector<Measure> laws = {Measure::gaussian(0, 1), Measure::gaussian(1, 2), Measure::exponential(1.0)};
  int done = 0;
  while (done < 20) {
    const auto& m = laws[done % laws.size()];
    const int K = 2 + done % 5;
    std::vector<double> v(K);
    const auto mu = m.mean()(0);
    const double sd = std::sqrt(m.covariance()(0, 0));
    for (auto& e : v) e = mu + sd * (-2 + 4 * s.uniform());
    const auto x = Quantizer::from_values(v);
    if (x.min_separation() < 0.05) continue;
    EXPECT_LE(rel_err(hessian_1d(x, m).dense(), fd_hessian(x, m, 1e-4)), 1e-6);
    ++done;
  }
}

TEST(Certificate, UniformK2) {
  const auto c = pd_certificate(hessian_1d(uniform_opt(2), Measure::uniform(0, 1)));
  EXPECT_TRUE(c.positive_definite);
  EXPECT_NEAR(c.leading_minors[0], 0.75, 1e-15);
  EXPECT_NEAR(c.leading_minors[1], 0.5, 1e-15);
  EXPECT_NEAR(c.lambda_star, 0.5, 1e-10);
  EXPECT_LE(c.lambda_star, 0.5);
  EXPECT_NEAR(c.row_excess[0], 0.5, 1e-15);
}

TEST(Certificate, SingularMatrix) {
  TridiagonalMatrix t{{1.0, 1.0}, {-1.0}};
  const auto c = pd_certificate(t);
  EXPECT_FALSE(c.positive_definite);
  EXPECT_EQ(c.leading_minors[1], 0.0);
  EXPECT_LE(c.lambda_star, 0.0);
}

TEST(Certificate, IndefiniteAndSturmCount) {
  TridiagonalMatrix t{{2.0, -1.0, 3.0}, {0.5, 0.5}};
  const auto c = pd_certificate(t);
  EXPECT_FALSE(c.positive_definite);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.dense());
  EXPECT_NEAR(c.lambda_star, es.eigenvalues()(0), 1e-10);
  EXPECT_EQ(eigenvalues_below(t, 0.0), 1);
  EXPECT_EQ(eigenvalues_below(t, 10.0), 3);
}

TEST(Certificate, AgreesWithEigenOnRandomMatrices) {
  Stream s(12);
  for (int r = 0; r < 100; ++r) {
    const int n = 1 + r % 9;
    TridiagonalMatrix t;
    for (int i = 0; i < n; ++i) t.diag.push_back(-1 + 4 * s.uniform());
    for (int i = 0; i + 1 < n; ++i) t.off.push_back(-1 + 2 * s.uniform());
    const auto c = pd_certificate(t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.dense());
    const double lmin = es.eigenvalues()(0);
    EXPECT_NEAR(c.lambda_star, lmin, 1e-10);
    EXPECT_LE(c.lambda_star, lmin + 1e-13);
    if (std::abs(lmin) > 1e-12) {
      EXPECT_EQ(c.positive_definite, lmin > 0);
      EXPECT_EQ(c.positive_definite, c.lambda_star > 0);
      bool minors_pos = true;
      for (double f : c.leading_minors) minors_pos = minors_pos && f > 0;
      EXPECT_EQ(minors_pos, c.positive_definite);
    }
  }
}

TEST(HessianProperty, UniformMinorsClosedForm) {
  for (int K = 1; K <= 10; ++K) {
    const auto c = pd_certificate(hessian_1d(uniform_opt(K), Measure::uniform(0, 1)));
    std::vector<double> f(K + 1, 1.0);  // f[0] = 1
    for (int k = 1; k <= K; ++k) {
      f[k] = (2.0 * k + 1.0) / (std::pow(2.0, k) * std::pow(static_cast<double>(K), k));
      if (k == K) f[k] += f[K - 1] / (2.0 * K);
    }
    for (int k = 1; k <= K; ++k) EXPECT_NEAR(c.leading_minors[k - 1], f[k], 1e-12) << "K=" << K << " k=" << k;
    EXPECT_TRUE(c.positive_definite);
  }
}

TEST(HessianProperty, GershgorinRouteAtOptima) {
  for (int K = 1; K <= 8; ++K) {
    for (const auto& [x, m] : {std::pair{uniform_opt(K), Measure::uniform(0, 1)},
                               std::pair{gaussian_opt(K), Measure::gaussian(0, 1)}}) {
      const auto c = pd_certificate(hessian_1d(x, m));
      bool all_pos = true;
      for (double L : c.row_excess) all_pos = all_pos && L > 0;
      if (all_pos) {
        EXPECT_GT(c.lambda_star, 0.0) << m.kind_name() << " K=" << K;
        EXPECT_TRUE(c.positive_definite);
      }
      // uniform interior rows sum to exactly zero; PD comes from the minors there
      for (double L : c.row_excess) EXPECT_GE(L, -1e-12);
    }
  }
}

TEST(HessianProperty, LogConcaveCriterion) {
  for (int K = 2; K <= 6; ++K) {
    const auto c = pd_certificate(hessian_1d(gaussian_opt(K), Measure::gaussian(0, 1)));
    for (double L : c.row_excess) EXPECT_GT(L, 0.0) << "K=" << K;
    EXPECT_TRUE(c.positive_definite);
    EXPECT_GT(c.lambda_star, 0.0);
  }
}

TEST(HessianProperty, RowSumsMatchCellIntegrals) {
  for (int K = 2; K <= 6; ++K) {
    const auto m = Measure::gaussian(0, 1);
    const auto x = gaussian_opt(K);
    const auto rows = hessian_1d(x, m).row_sums();
    const auto L = row_excess_integrals(x, m);
    for (int i = 0; i < K; ++i) EXPECT_NEAR(rows[i], L[i], 1e-8) << "K=" << K << " i=" << i;
  }
}

TEST(HessianProperty, LambdaForBoundHasMargin) {
  const auto T = hessian_1d(uniform_opt(2), Measure::uniform(0, 1));
  EXPECT_NEAR(lambda_star_for_bound(T), 0.5 - kLambdaMargin, 1e-10);
}

TEST(Hessian2d, SinglePointIsTwoIdentity) {
  Eigen::MatrixXd p(1, 2);
  p << 0.3, -0.2;
  const auto g = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  const auto H = hessian_2d_boundary(Quantizer(p), g);
  // mu(V_1) is the mass of the truncation window, 1 - O(1e-12)
  EXPECT_LE((H.matrix - 2.0 * Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Hessian2d, SymmetricAndMatchesFd) {
  const auto g = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  Eigen::MatrixXd p(3, 2);
  p << -0.8, -0.3, 0.9, -0.4, 0.1, 0.85;
  const Quantizer x(p);
  const auto H = hessian_2d_boundary(x, g);
  EXPECT_LE((H.matrix - H.matrix.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  const auto F = fd_hessian(x, g, 1e-3, method::Cubature2d{1e-12});
  EXPECT_LE(rel_err(H.matrix, F), 1e-3);
  EXPECT_TRUE(H.crosses_boundary);  // unbounded facets end on the window
}

TEST(Hessian2d, UniformBoxFlagsBoundaryCrossing) {
  const auto box = Measure::uniform_box(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  Eigen::MatrixXd p(2, 2);
  p << 0.25, 0.5, 0.75, 0.5;
  const auto H = hessian_2d_boundary(Quantizer(p), box);
  EXPECT_TRUE(H.crosses_boundary);
  const auto F = fd_hessian(Quantizer(p), box, 1e-3, method::Cubature2d{1e-12});
  EXPECT_LE(rel_err(H.matrix, F), 1e-3);
}

TEST(Hessian2d, RejectsDegenerateInputs) {
  const auto g = Measure::gaussian_nd(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
  Eigen::MatrixXd p(2, 2);
  p << 0, 0, 1e-10, 0;
  EXPECT_THROW(hessian_2d_boundary(Quantizer(p), g), InvalidQuantizer);
  EXPECT_THROW(hessian_2d_boundary(Quantizer::from_values({0, 1}), Measure::gaussian(0, 1)), UnsupportedOperation);
  const auto g3 = Measure::gaussian_nd(Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity());
  EXPECT_THROW(hessian_2d_boundary(Quantizer(Eigen::MatrixXd::Identity(3, 3)), g3), UnsupportedOperation);
}
