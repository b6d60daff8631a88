#include "phasefb/bit_allocation.hpp"

#include <algorithm>
#include <limits>

namespace phasefb {

void AllocationProblem::validate() const {
  if (weights.empty()) throw std::invalid_argument("AllocationProblem: at least one weight required");
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("AllocationProblem: weights must be finite and nonnegative");
    }
  }
  if (budget < 0) throw std::invalid_argument("AllocationProblem: budget must be nonnegative");
}

double allocation_objective(const std::vector<double>& weights, const std::vector<int>& bits) {
  if (weights.size() != bits.size()) {
    throw std::invalid_argument("allocation_objective: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) sum += weights[l] * nmmse(bits[l]);
  return sum;
}

Allocation allocate_greedy(const AllocationProblem& p) {
  p.validate();
  const std::size_t n = p.weights.size();
  Allocation out;
  out.bits.assign(n, 0);

  // Marginals that agree to a few ulps are ties (f(0)-f(1) == f(1)-f(2)
  // analytically but not always in floating point).
  constexpr double kTieTol = 1e-12;
  for (int step = 0; step < p.budget; ++step) {
    std::size_t best = n;
    double best_gain = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (out.bits[l] >= kMaxBits) continue;
      const double gain = p.weights[l] * (nmmse(out.bits[l]) - nmmse(out.bits[l] + 1));
      if (best == n || gain > best_gain + kTieTol * std::abs(best_gain)) {
        best_gain = gain;
        best = l;
      }
    }
    if (best == n) {
      throw std::invalid_argument("allocate_greedy: budget exceeds per-path bit cap");
    }
    ++out.bits[best];
  }
  out.objective = allocation_objective(p.weights, out.bits);
  return out;
}

std::uint64_t composition_count(int budget, int parts) {
  if (parts < 1 || budget < 0) return 0;
  // C(budget + parts - 1, parts - 1) built incrementally; each partial
  // product is itself a binomial coefficient so the division is exact.
  const std::uint64_t k = static_cast<std::uint64_t>(parts - 1);
  const std::uint64_t total = static_cast<std::uint64_t>(budget) + k;
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = total - k + i;
    if (c > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    c = c * num / i;
  }
  return c;
}

namespace {

void enumerate(const std::vector<double>& w, std::vector<int>& bits, std::size_t pos, int left,
               Allocation& best) {
  if (pos + 1 == w.size()) {
    bits[pos] = left;
    const double obj = allocation_objective(w, bits);
    if (obj < best.objective) {
      best.objective = obj;
      best.bits = bits;
    }
    return;
  }
  for (int b = 0; b <= left; ++b) {
    bits[pos] = b;
    enumerate(w, bits, pos + 1, left - b, best);
  }
}

}  // namespace

Allocation allocate_bruteforce(const AllocationProblem& p) {
  p.validate();
  const int parts = static_cast<int>(p.weights.size());
  if (composition_count(p.budget, parts) > kBruteforceLimit) {
    throw std::invalid_argument("allocate_bruteforce: enumeration exceeds 1e7 compositions");
  }
  if (p.budget > kMaxBits) throw std::invalid_argument("allocate_bruteforce: budget too large");
  Allocation best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<int> bits(p.weights.size(), 0);
  enumerate(p.weights, bits, 0, p.budget, best);
  return best;
}

Allocation allocate_uniform(const AllocationProblem& p) {
  p.validate();
  const int n = static_cast<int>(p.weights.size());
  Allocation out;
  out.bits.assign(n, p.budget / n);
  for (int l = 0; l < p.budget % n; ++l) ++out.bits[l];
  for (int b : out.bits) check_bits(b);
  out.objective = allocation_objective(p.weights, out.bits);
  return out;
}

double theoretical_weighted_mse(const Eigen::VectorXd& betas, const std::vector<int>& bits,
                                int num_antennas) {
  if (static_cast<std::size_t>(betas.size()) != bits.size()) {
    throw std::invalid_argument("theoretical_weighted_mse: size mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index l = 0; l < betas.size(); ++l) {
    sum += num_antennas * betas[l] * betas[l] * nmmse(bits[l]);
  }
  return sum;
}

}  // namespace phasefb
