#include "phasefb/reconstruction.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

namespace phasefb {

MatrixXcd error_covariance(const PathSet& ps, const std::vector<int>& bits,
                           const ArrayGeometry& geom) {
  if (bits.size() != ps.paths.size()) {
    throw std::invalid_argument("error_covariance: one bit count per path required");
  }
  const int n = geom.num_antennas;
  MatrixXcd phi = MatrixXcd::Zero(n, n);
  for (std::size_t l = 0; l < bits.size(); ++l) {
    const auto& p = ps.paths[l];
    const double scale = p.beta * p.beta * nmmse(bits[l]);
    if (scale == 0.0) continue;
    const VectorXcd a = array_response(p.theta, geom.lambda_dl, geom);
    phi.noalias() += scale * a * a.adjoint();
  }
  return phi;
}

ReconstructedChannel reconstruct_mmse(const PathSet& ps, const FeedbackPlan& fp,
                                      const ArrayGeometry& geom) {
  if (fp.size() != ps.size() || fp.phases.size() != fp.bits.size()) {
    throw std::invalid_argument("reconstruct_mmse: feedback plan does not match the path set");
  }
  ReconstructedChannel rc;
  rc.mode = ReconstructionMode::kMmse;
  rc.estimate = VectorXcd::Zero(geom.num_antennas);
  for (int l = 0; l < ps.size(); ++l) {
    const auto& p = ps.paths[l];
    const double w = eta(fp.bits[l]) * p.beta;
    if (w == 0.0) continue;
    rc.estimate += std::polar(w, fp.phases[l].q) * array_response(p.theta, geom.lambda_dl, geom);
  }
  rc.error_cov = error_covariance(ps, fp.bits, geom);
  return rc;
}

ReconstructedChannel reconstruct_no_feedback(const PathSet& ps, const ArrayGeometry& geom,
                                             bool full_cov) {
  ReconstructedChannel rc;
  rc.mode = ReconstructionMode::kNoFeedback;
  rc.estimate = VectorXcd::Zero(geom.num_antennas);
  for (const auto& p : ps.paths) {
    rc.estimate += p.beta * array_response(p.theta, geom.lambda_dl, geom);
  }
  if (full_cov) {
    rc.error_cov = error_covariance(ps, std::vector<int>(ps.paths.size(), 0), geom);
  } else {
    rc.error_cov = MatrixXcd::Zero(geom.num_antennas, geom.num_antennas);
  }
  return rc;
}

ReconstructedChannel reconstruct_dft(const VectorXcd& h_true, int bits) {
  ReconstructedChannel rc;
  rc.mode = ReconstructionMode::kDftBaseline;
  rc.estimate = dft_codebook_feedback(h_true, bits).reconstructed;
  rc.error_cov = MatrixXcd::Zero(h_true.size(), h_true.size());
  return rc;
}

OuterProductError outer_product_error(const VectorXcd& h_true, const ReconstructedChannel& rc) {
  if (h_true.size() != rc.estimate.size() || rc.error_cov.rows() != h_true.size()) {
    throw std::invalid_argument("outer_product_error: dimension mismatch");
  }
  OuterProductError out;
  out.delta = h_true * h_true.adjoint() - rc.estimate * rc.estimate.adjoint() - rc.error_cov;
  const double n = static_cast<double>(h_true.size());
  out.normalized_norm = out.delta.squaredNorm() / (n * n);
  return out;
}

double asymptotic_delta_norm(const Eigen::VectorXd& betas, const std::vector<int>& bits,
                             const std::vector<double>& deltas) {
  const auto n = static_cast<std::size_t>(betas.size());
  if (bits.size() != n || deltas.size() != n) {
    throw std::invalid_argument("asymptotic_delta_norm: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t m = l + 1; m < n; ++m) {
      const double ee = eta(bits[l]) * eta(bits[m]);
      const double bb = betas[l] * betas[l] * betas[m] * betas[m];
      sum += 2.0 * (1.0 + ee * ee) * bb - 4.0 * ee * bb * std::cos(deltas[l] - deltas[m]);
    }
  }
  return sum;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void write_matrix_csv(std::ostream& out, const MatrixXcd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ',';
      put(out, m(r, c).real());
      out << ',';
      put(out, m(r, c).imag());
    }
    out << '\n';
  }
}

}  // namespace phasefb
