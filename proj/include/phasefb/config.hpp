#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasefb {

enum class ReconstructionMode { kMmse, kNoFeedback, kDftBaseline };
enum class PrecoderKind { kGpip, kZf, kWmmse };
enum class AllocatorKind { kGreedy, kUniform, kNone };

/// Structured configuration error naming the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Scenario and sweep parameters. Defaults follow the single-cell setup
/// (10 GHz UL, 12 GHz DL, 500 m ISD, -113 dBm noise) at desk scale.
struct ScenarioConfig {
  std::vector<int> antennas{64};
  int users = 8;
  std::vector<int> paths{3};
  std::vector<int> bits{0, 3, 6, 9, 12, 15, 18, 21};
  /// When positive, the bit budget at each sweep point is bits_per_path * L
  /// and the `bits` grid is ignored.
  int bits_per_path = 0;
  std::vector<double> power_dbm{30.0};
  double noise_dbm = -113.0;

  double ul_freq_ghz = 10.0;
  double dl_freq_ghz = 12.0;
  /// Antenna spacing in meters; zero selects half the UL wavelength.
  double spacing_m = 0.0;

  double isd_m = 500.0;
  double min_distance_m = 10.0;
  double excess_path_m = 100.0;

  double pl_ref_db = -54.0;
  double pl_ref_distance_m = 1.0;
  double pl_exponent = 3.0;
  double decay_ratio = 0.7;

  double aoa_sigma = 0.0;
  double gain_rel_sigma = 0.0;

  ReconstructionMode reconstruction = ReconstructionMode::kMmse;
  PrecoderKind precoder = PrecoderKind::kGpip;
  AllocatorKind allocator = AllocatorKind::kGreedy;
  /// Covariance handed to robust precoding in no-feedback mode: full
  /// per-path uncertainty when true, zero otherwise.
  bool no_feedback_full_cov = true;

  std::vector<std::string> methods{"wmmse_perfect", "gpip_mmse_cov", "gpip_mmse",
                                   "zf_mmse",       "zf_nofb",       "zf_ul"};

  int trials = 200;
  int mc_draws = 1;
  std::uint64_t seed = 1;
  int workers = 1;

  double gpip_epsilon = 1e-4;
  int gpip_max_iter = 50;
  int wmmse_iters = 100;

  double lambda_ul() const;
  double lambda_dl() const;
  double spacing() const;
  double noise_watts() const;

  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated. Keys absent from the input keep their defaults, and each
/// defaulted key is reported on `log` when it is non-null.
ScenarioConfig parse_config(std::istream& in, std::ostream* log = nullptr);
ScenarioConfig load_config(const std::string& path, std::ostream* log = nullptr);

/// Switches to the larger (N, K) used for publication-size runs.
void apply_paper_scale(ScenarioConfig& cfg);

std::string to_string(ReconstructionMode m);
std::string to_string(PrecoderKind p);
std::string to_string(AllocatorKind a);

}  // namespace phasefb
