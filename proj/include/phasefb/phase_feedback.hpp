#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "phasefb/channel_model.hpp"
#include "phasefb/types.hpp"

namespace phasefb {

/// Largest per-path bit count; keeps 2^B exactly representable.
inline constexpr int kMaxBits = 62;

inline void check_bits(int bits) {
  if (bits < 0 || bits > kMaxBits) throw std::invalid_argument("bit count outside [0, 62]");
}

/// Uniform B-bit phase codebook {2 pi j / 2^B : j = 0 .. 2^B - 1}.
template <typename Real>
class PhaseCodebook {
 public:
  explicit PhaseCodebook(int bits) : bits_(bits) { check_bits(bits); }

  int bits() const { return bits_; }
  std::uint64_t size() const { return std::uint64_t{1} << bits_; }
  Real step() const { return std::ldexp(kTwoPi<Real>, -bits_); }
  Real codeword(std::uint64_t index) const { return step() * static_cast<Real>(index); }

 private:
  int bits_;
};

template <typename Real>
struct QuantizedPhase {
  Real q = 0;
  std::uint64_t index = 0;
  Real delta = 0;
};

/// Nearest codeword under circular distance; delta = wrap(angle - q).
template <typename Real>
QuantizedPhase<Real> quantize_phase(Real angle, int bits) {
  if (!std::isfinite(angle)) throw std::invalid_argument("quantize_phase: non-finite angle");
  const PhaseCodebook<Real> book(bits);
  const Real x = wrap_to_two_pi(angle);
  const auto nearest = static_cast<std::uint64_t>(std::llround(x / book.step()));
  QuantizedPhase<Real> out;
  out.index = nearest & (book.size() - 1);
  out.q = book.codeword(out.index);
  out.delta = wrap_to_pi(x - out.q);
  return out;
}

/// Half-width pi / 2^B of the feedback error support.
template <typename Real = double>
Real feedback_error_bound(int bits) {
  check_bits(bits);
  return std::ldexp(kPi<Real>, -bits);
}

/// Per-path bit counts together with the quantized DL phases.
struct FeedbackPlan {
  std::vector<int> bits;
  std::vector<QuantizedPhase<double>> phases;

  int size() const { return static_cast<int>(bits.size()); }
  int total_bits() const;
};

/// Quantizes every path's DL coefficient phase with its allotted bits.
FeedbackPlan make_feedback_plan(const PathSet& ps, const std::vector<int>& bits,
                                const ArrayGeometry& geom);

/// Same as make_feedback_plan but from explicit true phases.
FeedbackPlan make_feedback_plan(const std::vector<double>& true_phases,
                                const std::vector<int>& bits);

struct DftFeedback {
  std::uint64_t index = 0;
  VectorXcd direction;      ///< unit-norm codeword
  VectorXcd reconstructed;  ///< ||h|| * direction
};

/// Codeword m of the 2^B-column DFT codebook: exp(j 2 pi n m / 2^B) / sqrt(N).
/// Oversampled when 2^B >= N, column-subsampled otherwise.
VectorXcd dft_codeword(int num_antennas, int bits, std::uint64_t index);

/// Largest bit budget accepted by dft_codebook_feedback.
inline constexpr int kMaxDftBits = 24;

/// Picks the codeword with the largest |c^H h|; the channel norm is
/// assumed known at the transmitter.
DftFeedback dft_codebook_feedback(const VectorXcd& h, int bits);

}  // namespace phasefb
