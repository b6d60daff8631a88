#include "phasefb/phase_feedback.hpp"

#include <numeric>

#include <unsupported/Eigen/FFT>

namespace phasefb {

int FeedbackPlan::total_bits() const { return std::accumulate(bits.begin(), bits.end(), 0); }

FeedbackPlan make_feedback_plan(const std::vector<double>& true_phases,
                                const std::vector<int>& bits) {
  if (true_phases.size() != bits.size()) {
    throw std::invalid_argument("make_feedback_plan: one bit count per path required");
  }
  FeedbackPlan plan;
  plan.bits = bits;
  plan.phases.reserve(bits.size());
  for (std::size_t l = 0; l < bits.size(); ++l) {
    plan.phases.push_back(quantize_phase(true_phases[l], bits[l]));
  }
  return plan;
}

FeedbackPlan make_feedback_plan(const PathSet& ps, const std::vector<int>& bits,
                                const ArrayGeometry& geom) {
  std::vector<double> phases;
  phases.reserve(ps.paths.size());
  for (const auto& p : ps.paths) phases.push_back(dl_path_phase(p, geom));
  return make_feedback_plan(phases, bits);
}

VectorXcd dft_codeword(int num_antennas, int bits, std::uint64_t index) {
  if (num_antennas < 1) throw std::invalid_argument("dft_codeword: need at least one antenna");
  if (bits < 0 || bits > kMaxDftBits) throw std::invalid_argument("dft_codeword: bits out of range");
  const std::uint64_t size = std::uint64_t{1} << bits;
  if (index >= size) throw std::invalid_argument("dft_codeword: index out of range");
  VectorXcd c(num_antennas);
  const double scale = 1.0 / std::sqrt(static_cast<double>(num_antennas));
  for (int n = 0; n < num_antennas; ++n) {
    // reduce n*m mod 2^B first so the phase stays accurate for large codebooks
    const std::uint64_t k = (static_cast<std::uint64_t>(n) * index) & (size - 1);
    c[n] = std::polar(scale, kTwoPi<double> * static_cast<double>(k) / static_cast<double>(size));
  }
  return c;
}

DftFeedback dft_codebook_feedback(const VectorXcd& h, int bits) {
  if (h.size() == 0) throw std::invalid_argument("dft_codebook_feedback: empty channel");
  if (bits < 0 || bits > kMaxDftBits) {
    throw std::invalid_argument("dft_codebook_feedback: bits out of range");
  }
  const auto n_ant = static_cast<int>(h.size());
  const std::size_t size = std::size_t{1} << bits;

  // c_m^H h = sum_n h_n exp(-j 2 pi n m / M) / sqrt(N): a length-M DFT of h
  // folded (M < N) or zero padded (M >= N).
  std::vector<cd> folded(size, cd(0.0, 0.0));
  for (int n = 0; n < n_ant; ++n) folded[static_cast<std::size_t>(n) & (size - 1)] += h[n];

  std::uint64_t best = 0;
  if (size > 1) {
    std::vector<cd> spectrum;
    Eigen::FFT<double> fft;
    fft.fwd(spectrum, folded);
    double best_mag = -1.0;
    for (std::size_t m = 0; m < size; ++m) {
      const double mag = std::norm(spectrum[m]);
      if (mag > best_mag) {
        best_mag = mag;
        best = m;
      }
    }
  }

  DftFeedback out;
  out.index = best;
  out.direction = dft_codeword(n_ant, bits, best);
  out.reconstructed = h.norm() * out.direction;
  return out;
}

}  // namespace phasefb
