#pragma once

#include <iosfwd>
#include <vector>

#include "phasefb/bit_allocation.hpp"
#include "phasefb/channel_model.hpp"
#include "phasefb/config.hpp"
#include "phasefb/phase_feedback.hpp"

namespace phasefb {

/// DL channel estimate with its error covariance.
struct ReconstructedChannel {
  VectorXcd estimate;
  MatrixXcd error_cov;
  ReconstructionMode mode = ReconstructionMode::kMmse;
};

/// hhat = sum_l eta(B_l) beta_l exp(j q_l) a(theta_l, lambda_dl). Passing
/// perturbed geometry gives the estimated-parameter variant; the
/// covariance then uses the estimated gains and angles as well.
ReconstructedChannel reconstruct_mmse(const PathSet& ps, const FeedbackPlan& fp,
                                      const ArrayGeometry& geom);

/// hhat = sum_l beta_l a(theta_l, lambda_dl) with unit phase. The
/// covariance is sum_l beta_l^2 a a^H when `full_cov`, else zero.
ReconstructedChannel reconstruct_no_feedback(const PathSet& ps, const ArrayGeometry& geom,
                                             bool full_cov = true);

/// DFT codebook baseline; zero covariance.
ReconstructedChannel reconstruct_dft(const VectorXcd& h_true, int bits);

/// Phi = sum_l beta_l^2 (1 - eta(B_l)^2) a(theta_l) a(theta_l)^H.
MatrixXcd error_covariance(const PathSet& ps, const std::vector<int>& bits,
                           const ArrayGeometry& geom);

struct OuterProductError {
  MatrixXcd delta;
  double normalized_norm = 0.0;  ///< ||Delta||_F^2 / N^2
};

/// Delta = h h^H - (hhat hhat^H + Phi).
OuterProductError outer_product_error(const VectorXcd& h_true, const ReconstructedChannel& rc);

/// Large-array limit of ||Delta||_F^2 / N^2 conditional on the realized
/// feedback errors:
///   sum_{l < l'} 2 (1 + (eta eta')^2) (beta beta')^2
///                - 4 eta eta' (beta beta')^2 cos(delta_l - delta_l').
double asymptotic_delta_norm(const Eigen::VectorXd& betas, const std::vector<int>& bits,
                             const std::vector<double>& deltas);

/// Writes a complex matrix row-major, each entry as two columns `re,im`.
void write_matrix_csv(std::ostream& out, const MatrixXcd& m);

}  // namespace phasefb
