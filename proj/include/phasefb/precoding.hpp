#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "phasefb/types.hpp"

namespace phasefb {

/// Per-user CSI as seen by the transmitter.
struct UserCsi {
  VectorXcd hhat;
  MatrixXcd phi;
  double sigma2 = 1.0;
};

/// Robust sum-rate problem: K users, N antennas, total power P.
struct PrecodingProblem {
  std::vector<UserCsi> users;
  double power = 1.0;

  int num_users() const { return static_cast<int>(users.size()); }
  int num_antennas() const { return users.empty() ? 0 : static_cast<int>(users.front().hhat.size()); }
  /// hhat_k hhat_k^H + Phi_k
  MatrixXcd signal_covariance(int k) const;
  /// sigma_k^2 / P
  double noise_shift(int k) const { return users[k].sigma2 / power; }
  /// N x K matrix of estimated channels.
  MatrixXcd estimate_matrix() const;

  void validate() const;
};

/// Builds a problem with the given covariances; pass an empty vector of
/// covariances for Phi = 0.
PrecodingProblem make_problem(const std::vector<VectorXcd>& hhat, const std::vector<MatrixXcd>& phi,
                              const std::vector<double>& sigma2, double power);

/// Concatenated precoders f = [f_1; ...; f_K].
struct PrecoderStack {
  VectorXcd f;
  int num_users = 0;

  int num_antennas() const { return num_users == 0 ? 0 : static_cast<int>(f.size()) / num_users; }
  auto block(int k) { return f.segment(static_cast<Eigen::Index>(k) * num_antennas(), num_antennas()); }
  auto block(int k) const {
    return f.segment(static_cast<Eigen::Index>(k) * num_antennas(), num_antennas());
  }
  /// N x K matrix whose columns are the per-user precoders.
  MatrixXcd as_matrix() const;
  static PrecoderStack from_matrix(const MatrixXcd& columns);
  void normalize();
};

/// I_K (x) R + shift I_{NK}, with block `removed` (if any) losing its R term.
/// A_k has no removed block; B_k removes block k. Applied block-wise.
struct KroneckerBlockMatrix {
  MatrixXcd r;
  double shift = 0.0;
  int num_blocks = 0;
  int removed = -1;

  VectorXcd apply(const VectorXcd& f) const;
  double quadratic(const VectorXcd& f) const;
  MatrixXcd dense() const;
};

struct RatioPair {
  KroneckerBlockMatrix a;
  KroneckerBlockMatrix b;
};

RatioPair build_a_b(const PrecodingProblem& pp, int k);

/// Products of Rayleigh quotients, prod_k (f^H A_k f) / (f^H B_k f).
double gamma(const PrecoderStack& f, const PrecodingProblem& pp);
double log2_gamma(const PrecoderStack& f, const PrecodingProblem& pp);

/// Sum_k log2(1 + f_k^H R_k f_k / (sum_{i != k} f_i^H R_k f_i + ||f||^2 sigma_k^2 / P)).
/// Scale invariant; equals log2(gamma). Zero for an all-zero stack.
double sum_se_lower_bound(const PrecoderStack& f, const PrecodingProblem& pp);

struct GpipConfig {
  double epsilon = 1e-4;
  int max_iter = 50;
  bool keep_best = true;

  void validate() const;
};

struct GpipResult {
  PrecoderStack precoder;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log2_gamma_history;  ///< entry 0 is the initial point
};

/// Thrown when a block of the B-bar solve is not numerically positive definite.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

/// Zero-forcing on the estimated channels, falling back to the dominant
/// eigenvector of R_k for users whose estimate vanishes so that every
/// block of the returned stack is nonzero.
PrecoderStack gpip_initial_point(const PrecodingProblem& pp);

/// Generalized power iteration f <- Bbar(f)^{-1} Abar(f) f, normalized.
GpipResult gpip_solve(const PrecodingProblem& pp, const GpipConfig& cfg = {},
                      const std::optional<PrecoderStack>& f0 = std::nullopt);

/// ||Abar f - gamma Bbar f|| / ||Abar f||.
double stationarity_residual(const PrecoderStack& f, const PrecodingProblem& pp);

/// Columns of H (H^H H)^+ , each scaled to unit norm, then the stack is
/// normalized to ||f|| = 1. Users with an all-zero column get a zero block.
PrecoderStack zf_precoder(const MatrixXcd& h);

struct WmmseResult {
  PrecoderStack precoder;
  int iterations = 0;
  std::vector<double> sum_se_history;  ///< entry 0 is the ZF starting point
};

/// WMMSE alternating optimization on the true channels under the total
/// power constraint, started from ZF. Uses sigma_k^2 and P from `pp`.
WmmseResult wmmse_precoder(const MatrixXcd& h_true, const PrecodingProblem& pp, int max_iters = 100,
                           double tol = 1e-4);

/// Achieved sum rate on the true channels (columns of `h_true`).
double true_sum_se(const PrecoderStack& f, const MatrixXcd& h_true, const PrecodingProblem& pp);

}  // namespace phasefb
