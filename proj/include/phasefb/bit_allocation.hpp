#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phasefb/phase_feedback.hpp"
#include "phasefb/types.hpp"

namespace phasefb {

/// Phase-error compensation factor E[exp(j delta)] = (2^B / pi) sin(pi / 2^B).
template <typename Real = double>
Real eta(int bits) {
  check_bits(bits);
  if (bits == 0) return Real(0);
  const Real x = std::ldexp(kPi<Real>, -bits);
  return std::sin(x) / x;
}

/// Normalized MMSE of one path, 1 - eta(B)^2.
template <typename Real = double>
Real nmmse(int bits) {
  const Real e = eta<Real>(bits);
  return Real(1) - e * e;
}

/// Piecewise-linear interpolation of nmmse between integer bit counts.
template <typename Real = double>
Real nmmse_pl(Real x) {
  if (!(x >= Real(0)) || !std::isfinite(x)) throw std::invalid_argument("nmmse_pl: x must be >= 0");
  if (x > Real(kMaxBits - 1)) throw std::invalid_argument("nmmse_pl: x too large");
  const Real lo = std::floor(x);
  const int i = static_cast<int>(lo);
  const Real t = x - lo;
  if (t == Real(0)) return nmmse<Real>(i);
  return (Real(1) - t) * nmmse<Real>(i) + t * nmmse<Real>(i + 1);
}

struct AllocationProblem {
  std::vector<double> weights;  ///< beta_l^2
  int budget = 0;

  void validate() const;
};

struct Allocation {
  std::vector<int> bits;
  double objective = 0.0;
};

/// Sum_l w_l * nmmse(B_l).
double allocation_objective(const std::vector<double>& weights, const std::vector<int>& bits);

/// Marginal analysis: one bit at a time to the path with the largest
/// weighted decrease in nmmse, lowest index on ties.
Allocation allocate_greedy(const AllocationProblem& p);

/// Exhaustive search over all compositions of the budget.
Allocation allocate_bruteforce(const AllocationProblem& p);

/// Equal split; the remainder goes to the lowest path indices.
Allocation allocate_uniform(const AllocationProblem& p);

/// Number of compositions of `budget` into `parts` nonnegative parts,
/// saturating at UINT64_MAX.
std::uint64_t composition_count(int budget, int parts);

inline constexpr std::uint64_t kBruteforceLimit = 10'000'000;

/// Sum_l N beta_l^2 (1 - eta(B_l)^2).
double theoretical_weighted_mse(const Eigen::VectorXd& betas, const std::vector<int>& bits,
                                int num_antennas);

}  // namespace phasefb
