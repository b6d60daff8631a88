#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "phasefb/bit_allocation.hpp"

using namespace phasefb;

namespace {

constexpr double kPiD = kPi<double>;

// Independent evaluation of the compensation factor.
double eta_oracle(int b) {
  if (b == 0) return 0.0;
  const double m = std::pow(2.0, b);
  return m / kPiD * std::sin(kPiD / m);
}

}  // namespace

TEST(Eta, Values) {
  EXPECT_NEAR(eta(1), 0.6366197723675814, 1e-12);
  EXPECT_NEAR(eta(2), 0.9003163161571061, 1e-12);
  EXPECT_EQ(eta(0), 0.0);
  for (int b = 0; b <= 40; ++b) EXPECT_NEAR(eta(b), eta_oracle(b), 1e-14);
  EXPECT_GT(eta(16), 1.0 - 1e-8);
  EXPECT_NEAR(eta<float>(1), 2.0f / kPi<float>, 1e-6f);
}

TEST(Nmmse, Values) {
  EXPECT_EQ(nmmse(0), 1.0);
  EXPECT_NEAR(nmmse(1), 1.0 - 4.0 / (kPiD * kPiD), 1e-12);
  EXPECT_NEAR(nmmse(1), 0.59472, 1e-5);
  EXPECT_NEAR(nmmse(3), 1.0 - std::pow(eta_oracle(3), 2), 1e-14);
  EXPECT_NEAR(nmmse(3), 0.05035, 1e-5);
}

TEST(NmmsePl, Interpolation) {
  EXPECT_EQ(nmmse_pl(2.0), nmmse(2));
  EXPECT_NEAR(nmmse_pl(0.5), 0.5 * (nmmse(0) + nmmse(1)), 1e-15);
  EXPECT_NEAR(nmmse_pl(0.5), 0.79736, 1e-5);
  EXPECT_NEAR(nmmse_pl(1.25), 0.75 * nmmse(1) + 0.25 * nmmse(2), 1e-15);
  EXPECT_NEAR(nmmse_pl(1.25), 0.49340, 1e-5);
  EXPECT_THROW(nmmse_pl(-0.1), std::invalid_argument);
  EXPECT_THROW(nmmse_pl(std::nan("")), std::invalid_argument);
}

TEST(NmmsePl, EqualFirstMarginals) {
  const double d0 = nmmse(0) - nmmse(1);
  const double d1 = nmmse(1) - nmmse(2);
  EXPECT_NEAR(d0, 4.0 / (kPiD * kPiD), 1e-12);
  EXPECT_NEAR(d1, 4.0 / (kPiD * kPiD), 1e-12);
}

TEST(Greedy, ReferenceInstance) {
  const Allocation a = allocate_greedy({{1.0, 0.25, 0.0625}, 3});
  EXPECT_EQ(a.bits, (std::vector<int>{3, 0, 0}));
  EXPECT_NEAR(a.objective, nmmse(3) + 0.25 + 0.0625, 1e-12);
  EXPECT_NEAR(a.objective, 0.36285, 1e-5);
}

TEST(Greedy, TieBreaksToLowestIndex) {
  const Allocation a = allocate_greedy({{1.0, 1.0}, 2});
  EXPECT_EQ(a.bits, (std::vector<int>{2, 0}));
  EXPECT_NEAR(a.objective, allocation_objective({1.0, 1.0}, {1, 1}), 1e-12);
}

TEST(Greedy, ZeroBudget) {
  const Allocation a = allocate_greedy({{0.5, 0.3, 0.2}, 0});
  EXPECT_EQ(a.bits, (std::vector<int>{0, 0, 0}));
  EXPECT_NEAR(a.objective, 1.0, 1e-15);
}

TEST(Greedy, SpendsWholeBudget) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> w(0.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    AllocationProblem p{{w(rng), w(rng), w(rng), w(rng), w(rng)}, static_cast<int>(rng() % 40)};
    const Allocation a = allocate_greedy(p);
    int total = 0;
    for (int b : a.bits) total += b;
    EXPECT_EQ(total, p.budget);
  }
}

TEST(Bruteforce, MatchesGreedyAndSinglePath) {
  EXPECT_NEAR(allocate_bruteforce({{1.0, 0.25, 0.0625}, 3}).objective, 0.36285, 1e-5);
  EXPECT_EQ(allocate_bruteforce({{0.7}, 9}).bits, (std::vector<int>{9}));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> logw(-4.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    AllocationProblem p;
    const int l = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < l; ++j) p.weights.push_back(std::pow(10.0, logw(rng)));
    p.budget = static_cast<int>(rng() % 13);
    EXPECT_NEAR(allocate_greedy(p).objective, allocate_bruteforce(p).objective, 1e-12);
  }
}

TEST(Bruteforce, GuardsAgainstHugeSearch) {
  EXPECT_EQ(composition_count(3, 3), 10u);
  EXPECT_EQ(composition_count(0, 4), 1u);
  AllocationProblem p{std::vector<double>(12, 1.0), 60};
  EXPECT_THROW(allocate_bruteforce(p), std::invalid_argument);
}

TEST(Uniform, RemainderToLowestIndices) {
  const Allocation a = allocate_uniform({{0.1, 0.2, 0.3}, 7});
  EXPECT_EQ(a.bits, (std::vector<int>{3, 2, 2}));
}

TEST(Uniform, NeverBeatsGreedy) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logw(-3.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    AllocationProblem p{{std::pow(10.0, logw(rng)), std::pow(10.0, logw(rng)), std::pow(10.0, logw(rng))},
                        static_cast<int>(rng() % 25)};
    EXPECT_LE(allocate_greedy(p).objective, allocate_uniform(p).objective + 1e-15);
  }
}

TEST(Validation, RejectsBadProblems) {
  EXPECT_THROW(allocate_greedy({{}, 3}), std::invalid_argument);
  EXPECT_THROW(allocate_greedy({{1.0, -0.1}, 3}), std::invalid_argument);
  EXPECT_THROW(allocate_greedy({{1.0}, -1}), std::invalid_argument);
  EXPECT_THROW(allocate_greedy({{std::nan("")}, 1}), std::invalid_argument);
}

TEST(TheoreticalMse, Values) {
  EXPECT_NEAR(theoretical_weighted_mse(Eigen::VectorXd::Constant(1, 1.0), {1}, 4),
              4.0 * (1.0 - 4.0 / (kPiD * kPiD)), 1e-12);
  EXPECT_NEAR(theoretical_weighted_mse(Eigen::VectorXd::Constant(1, 1.0), {1}, 4), 2.37888, 1e-4);
  EXPECT_NEAR(theoretical_weighted_mse(Eigen::VectorXd::Constant(2, 1.0), {0, 0}, 8), 16.0, 1e-15);
  EXPECT_LT(theoretical_weighted_mse(Eigen::VectorXd::Constant(2, 1.0), {40, 40}, 8), 1e-20);
}
