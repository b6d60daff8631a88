#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "phasefb/precoding.hpp"
#include "phasefb/reconstruction.hpp"

using namespace phasefb;

namespace {

MatrixXcd random_channels(int n, int k, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixXcd h(n, k);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = cd(g(rng), g(rng));
  return h;
}

std::vector<VectorXcd> columns(const MatrixXcd& h) {
  std::vector<VectorXcd> c;
  for (Eigen::Index k = 0; k < h.cols(); ++k) c.push_back(h.col(k));
  return c;
}

PrecodingProblem robust_problem(int n, int k, std::mt19937_64& rng, double sigma2 = 0.1) {
  const MatrixXcd h = random_channels(n, k, rng);
  std::vector<MatrixXcd> phi;
  for (int i = 0; i < k; ++i) {
    const MatrixXcd e = random_channels(n, 2, rng);
    phi.push_back(0.05 * e * e.adjoint());
  }
  return make_problem(columns(h), phi, std::vector<double>(k, sigma2), 1.0);
}

PrecoderStack random_stack(int n, int k, std::mt19937_64& rng) {
  PrecoderStack f = PrecoderStack::from_matrix(random_channels(n, k, rng));
  f.normalize();
  return f;
}

}  // namespace

TEST(Blocks, SingleUserBIsNoiseOnly) {
  const PrecodingProblem pp = make_problem({VectorXcd::Ones(3)}, {}, {2.0}, 4.0);
  const RatioPair ab = build_a_b(pp, 0);
  EXPECT_LT((ab.b.dense() - 0.5 * MatrixXcd::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LT((ab.a.dense() - (MatrixXcd::Ones(3, 3) + 0.5 * MatrixXcd::Identity(3, 3))).norm(), 1e-15);
}

TEST(Blocks, DifferenceIsOwnSignal) {
  std::mt19937_64 rng(1);
  const PrecodingProblem pp = robust_problem(4, 3, rng);
  const PrecoderStack f = random_stack(4, 3, rng);
  for (int k = 0; k < 3; ++k) {
    const RatioPair ab = build_a_b(pp, k);
    const double own = f.block(k).dot(pp.signal_covariance(k) * f.block(k)).real();
    EXPECT_NEAR(ab.a.quadratic(f.f) - ab.b.quadratic(f.f), own, 1e-12);
    EXPECT_GE(own, 0.0);
    EXPECT_LT((ab.a.apply(f.f) - ab.a.dense() * f.f).norm(), 1e-12);
    EXPECT_LT((ab.b.apply(f.f) - ab.b.dense() * f.f).norm(), 1e-12);
  }
}

TEST(Blocks, HandEvaluatedRatio) {
  // N=2, K=2, hhat_1 = e1, hhat_2 = e2, Phi = 0, f uniform (every entry 1/2).
  const PrecodingProblem pp =
      make_problem({VectorXcd::Unit(2, 0), VectorXcd::Unit(2, 1)}, {}, {1.0, 1.0}, 1.0);
  PrecoderStack f{VectorXcd::Constant(4, 0.5), 2};
  // f^H A_1 f = |f_1(0)|^2 + |f_2(0)|^2 + ||f||^2 = 1.5, f^H B_1 f = 1.25.
  EXPECT_NEAR(gamma(f, pp), (1.5 / 1.25) * (1.5 / 1.25), 1e-14);
}

TEST(LowerBound, SingleUserValue) {
  VectorXcd h(4);
  h << cd(1, 0), cd(0, 1), cd(-1, 0), cd(0, -1);
  const PrecodingProblem pp = make_problem({h}, {}, {1.0}, 1.0);
  PrecoderStack f{h / 2.0, 1};
  EXPECT_NEAR(sum_se_lower_bound(f, pp), std::log2(5.0), 1e-12);
  EXPECT_NEAR(log2_gamma(f, pp), std::log2(5.0), 1e-12);
  EXPECT_NEAR(gamma(f, pp), 5.0, 1e-12);
}

TEST(LowerBound, OrthogonalPrecoderGivesZero) {
  const PrecodingProblem pp =
      make_problem({VectorXcd::Unit(3, 0), VectorXcd::Unit(3, 1)}, {}, {1.0, 1.0}, 1.0);
  PrecoderStack f{VectorXcd::Zero(6), 2};
  f.f[2] = 1.0;
  f.f[5] = 1.0;
  f.normalize();
  EXPECT_NEAR(sum_se_lower_bound(f, pp), 0.0, 1e-15);
  EXPECT_NEAR(gamma(f, pp), 1.0, 1e-15);
}

TEST(LowerBound, NoiseDominatedGoesToZero) {
  std::mt19937_64 rng(2);
  const PrecodingProblem loud = robust_problem(4, 2, rng, 1e12);
  const PrecoderStack f = random_stack(4, 2, rng);
  EXPECT_LT(sum_se_lower_bound(f, loud), 1e-9);
}

TEST(LowerBound, EqualsLogGammaAndIsScaleFree) {
  std::mt19937_64 rng(3);
  const PrecodingProblem pp = robust_problem(6, 3, rng);
  PrecoderStack f = random_stack(6, 3, rng);
  const double v = sum_se_lower_bound(f, pp);
  EXPECT_NEAR(v, log2_gamma(f, pp), 1e-12);
  f.f *= 7.0;
  EXPECT_NEAR(sum_se_lower_bound(f, pp), v, 1e-12);
}

TEST(Zf, NullsInterference) {
  std::mt19937_64 rng(4);
  const MatrixXcd h = random_channels(8, 4, rng);
  const PrecoderStack f = zf_precoder(h);
  EXPECT_NEAR(f.f.norm(), 1.0, 1e-14);
  const MatrixXcd g = h.adjoint() * f.as_matrix();
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      if (i != k) EXPECT_LT(std::abs(g(i, k)), 1e-12);
    }
    EXPECT_NEAR(f.block(i).norm(), 0.5, 1e-14);
  }
}

TEST(Zf, OrthonormalAndSingleUser) {
  const MatrixXcd q = MatrixXcd::Identity(5, 2);
  const PrecoderStack f = zf_precoder(q);
  EXPECT_NEAR(std::abs(f.block(0).dot(q.col(0))), f.block(0).norm(), 1e-14);
  VectorXcd h(3);
  h << cd(1, 2), cd(0, -1), cd(3, 0);
  const PrecoderStack m = zf_precoder(h);
  EXPECT_NEAR(std::abs(m.f.dot(h)), h.norm(), 1e-12);
}

TEST(Zf, ZeroColumnGivesZeroBlock) {
  MatrixXcd h = MatrixXcd::Zero(4, 2);
  h(0, 0) = 1.0;
  const PrecoderStack f = zf_precoder(h);
  EXPECT_EQ(f.block(1).norm(), 0.0);
  EXPECT_NEAR(f.f.norm(), 1.0, 1e-15);
}

TEST(Gpip, SingleUserSinglePathIsSteeringDirection) {
  const ArrayGeometry g{16, 0.015, 0.03, 0.025};
  PathSet ps;
  ps.paths.push_back({0.45, 0.8, 0.0, 0.0, 1.2});
  const auto rc = reconstruct_mmse(ps, make_feedback_plan(ps, {1}, g), g);
  const PrecodingProblem pp = make_problem({rc.estimate}, {rc.error_cov}, {0.01}, 1.0);
  const GpipResult r = gpip_solve(pp);
  const VectorXcd a = array_response(0.45, g.lambda_dl, g) / 4.0;
  EXPECT_GT(std::abs(a.dot(r.precoder.f)) / r.precoder.f.norm(), 1.0 - 1e-6);
  EXPECT_LT(stationarity_residual(PrecoderStack{a, 1}, pp), 1e-8);
}

TEST(Gpip, OrthogonalUsersAlign) {
  const PrecodingProblem pp = make_problem({2.0 * VectorXcd::Unit(4, 0), 2.0 * VectorXcd::Unit(4, 2)}, {},
                                           {1e-4, 1e-4}, 1.0);
  const GpipResult r = gpip_solve(pp);
  EXPECT_GT(std::abs(r.precoder.block(0)[0]) / r.precoder.block(0).norm(), 1.0 - 1e-6);
  EXPECT_GT(std::abs(r.precoder.block(1)[2]) / r.precoder.block(1).norm(), 1.0 - 1e-6);
  EXPECT_GE(log2_gamma(r.precoder, pp), log2_gamma(zf_precoder(pp.estimate_matrix()), pp) - 1e-12);
}

TEST(Gpip, KeepBestAndHistory) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const PrecodingProblem pp = robust_problem(8, 4, rng);
    const GpipResult r = gpip_solve(pp);
    ASSERT_EQ(r.log2_gamma_history.size(), static_cast<std::size_t>(r.iterations) + 1);
    EXPECT_GE(log2_gamma(r.precoder, pp), r.log2_gamma_history.front());
    double best = -INFINITY;
    for (double v : r.log2_gamma_history) best = std::max(best, v);
    EXPECT_NEAR(log2_gamma(r.precoder, pp), best, 1e-12);
  }
}

TEST(Gpip, ConvergesToStationaryPoint) {
  std::mt19937_64 rng(6);
  GpipConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iter = 3000;
  for (int trial = 0; trial < 5; ++trial) {
    const PrecodingProblem pp = robust_problem(16, 4, rng);
    const GpipResult r = gpip_solve(pp, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(stationarity_residual(r.precoder, pp), 1e-3);
  }
  const PrecodingProblem pp = robust_problem(16, 4, rng);
  EXPECT_GT(stationarity_residual(random_stack(16, 4, rng), pp), 1e-2);
}

TEST(Gpip, ExplicitStartAndValidation) {
  std::mt19937_64 rng(7);
  const PrecodingProblem pp = robust_problem(6, 2, rng);
  const PrecoderStack f0 = random_stack(6, 2, rng);
  const GpipResult r = gpip_solve(pp, {}, f0);
  EXPECT_GE(log2_gamma(r.precoder, pp), log2_gamma(f0, pp));
  EXPECT_THROW(gpip_solve(pp, {0.0, 10, true}), std::invalid_argument);
  EXPECT_THROW(gpip_solve(pp, {}, PrecoderStack{VectorXcd::Zero(12), 2}), std::invalid_argument);
  EXPECT_THROW(gpip_solve(pp, {}, PrecoderStack{VectorXcd::Ones(5), 1}), std::invalid_argument);
}

TEST(Gpip, SingularDenominatorIsReported) {
  // Two users on the same rank-one channel with negligible noise: every
  // Bbar block is rank one plus a 1e-300 ridge.
  const PrecodingProblem pp =
      make_problem({VectorXcd::Unit(3, 0), VectorXcd::Unit(3, 0)}, {}, {1e-300, 1e-300}, 1.0);
  EXPECT_THROW(gpip_solve(pp), SolverError);
}

TEST(Gpip, ZeroEstimateUsesCovarianceDirection) {
  const ArrayGeometry g{8, 0.015, 0.03, 0.025};
  PathSet ps;
  ps.paths.push_back({0.3, 1.0, 0.0, 0.0, 0.0});
  const auto rc = reconstruct_mmse(ps, make_feedback_plan(ps, {0}, g), g);
  const PrecodingProblem pp =
      make_problem({rc.estimate, VectorXcd::Unit(8, 1)}, {rc.error_cov, MatrixXcd::Zero(8, 8)}, {0.1, 0.1}, 1.0);
  const PrecoderStack f0 = gpip_initial_point(pp);
  EXPECT_GT(f0.block(0).norm(), 0.0);
  EXPECT_NO_THROW(gpip_solve(pp));
}

TEST(Wmmse, SingleUserMatchedFilter) {
  VectorXcd h(4);
  h << cd(1, 1), cd(0, 2), cd(-1, 0), cd(0.5, 0.5);
  const PrecodingProblem pp = make_problem({h}, {}, {0.5}, 2.0);
  const WmmseResult r = wmmse_precoder(h, pp);
  EXPECT_NEAR(true_sum_se(r.precoder, h, pp), std::log2(1.0 + h.squaredNorm() * 2.0 / 0.5), 1e-9);
}

TEST(Wmmse, BeatsZfAndIsMonotone) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXcd h = random_channels(8, 2, rng);
    const PrecodingProblem pp = make_problem(columns(h), {}, {1.0, 1.0}, 1.0);
    const WmmseResult r = wmmse_precoder(h, pp);
    EXPECT_GE(true_sum_se(r.precoder, h, pp), true_sum_se(zf_precoder(h), h, pp) - 1e-12);
    for (std::size_t i = 1; i < r.sum_se_history.size(); ++i) {
      EXPECT_GE(r.sum_se_history[i], r.sum_se_history[i - 1] - 1e-9);
    }
  }
}

TEST(TrueSe, MatchesBoundWithPerfectCsi) {
  std::mt19937_64 rng(9);
  const MatrixXcd h = random_channels(6, 3, rng);
  const PrecodingProblem pp = make_problem(columns(h), {}, {0.3, 0.3, 0.3}, 2.0);
  const PrecoderStack f = random_stack(6, 3, rng);
  EXPECT_NEAR(true_sum_se(f, h, pp), sum_se_lower_bound(f, pp), 1e-12);
}

TEST(TrueSe, ZfSinr) {
  std::mt19937_64 rng(10);
  const MatrixXcd h = random_channels(6, 3, rng);
  const PrecodingProblem pp = make_problem(columns(h), {}, {0.3, 0.3, 0.3}, 2.0);
  const PrecoderStack f = zf_precoder(h);
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) expected += std::log2(1.0 + std::norm(h.col(k).dot(f.block(k))) * 2.0 / 0.3);
  EXPECT_NEAR(true_sum_se(f, h, pp), expected, 1e-12);
  EXPECT_EQ(true_sum_se(PrecoderStack{VectorXcd::Zero(18), 3}, h, pp), 0.0);
}
