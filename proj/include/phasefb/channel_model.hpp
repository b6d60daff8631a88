#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "phasefb/config.hpp"
#include "phasefb/types.hpp"

namespace phasefb {

/// Uniform linear array seen at the base station.
struct ArrayGeometry {
  int num_antennas = 1;
  double spacing = 0.0;
  double lambda_ul = 0.0;
  double lambda_dl = 0.0;

  void validate() const;
  static ArrayGeometry from_config(const ScenarioConfig& cfg, int num_antennas);
};

/// One propagation path. AoA, gain and distance are shared by both bands;
/// the reflection phases are drawn independently per band.
struct ChannelPath {
  double theta = 0.0;
  double beta = 0.0;
  double distance = 0.0;
  double phi_ul = 0.0;
  double phi_dl = 0.0;
};

struct PathSet {
  std::vector<ChannelPath> paths;

  int size() const { return static_cast<int>(paths.size()); }
  Eigen::VectorXd betas() const;
  Eigen::VectorXd squared_betas() const;
};

struct EstimationNoise {
  double aoa_sigma = 0.0;
  double gain_rel_sigma = 0.0;
};

/// a(theta, lambda): element n is exp(-j 2pi/lambda n d sin(theta)).
template <typename Real>
CVector<Real> array_response(Real theta, Real lambda, int num_antennas, Real spacing) {
  if (!std::isfinite(theta) || !std::isfinite(lambda) || !std::isfinite(spacing)) {
    throw std::invalid_argument("array_response: non-finite input");
  }
  if (!(lambda > Real(0))) throw std::invalid_argument("array_response: lambda must be positive");
  if (num_antennas < 1) throw std::invalid_argument("array_response: need at least one antenna");
  const Real step = -kTwoPi<Real> / lambda * spacing * std::sin(theta);
  CVector<Real> a(num_antennas);
  for (int n = 0; n < num_antennas; ++n) {
    a[n] = std::polar(Real(1), step * Real(n));
  }
  return a;
}

inline VectorXcd array_response(double theta, double lambda, const ArrayGeometry& geom) {
  return array_response<double>(theta, lambda, geom.num_antennas, geom.spacing);
}

/// Complex path coefficient beta * exp(j(-2pi r / lambda + phi)).
inline cd path_gain(const ChannelPath& p, double lambda, double phi) {
  return std::polar(p.beta, -kTwoPi<double> * p.distance / lambda + phi);
}

/// Phase of the DL path coefficient, in [0, 2pi).
inline double dl_path_phase(const ChannelPath& p, const ArrayGeometry& geom) {
  return wrap_to_two_pi(-kTwoPi<double> * p.distance / geom.lambda_dl + p.phi_dl);
}

VectorXcd dl_channel(const PathSet& ps, const ArrayGeometry& geom);
VectorXcd ul_channel(const PathSet& ps, const ArrayGeometry& geom);

/// Log-distance model PL0 * (d / d0)^(-alpha), linear power gain.
double path_loss(double distance, const ScenarioConfig& cfg);

/// Normalized per-path power weights w_l proportional to ratio^l.
Eigen::VectorXd path_power_profile(int num_paths, double ratio);

/// Draws one user's multipath geometry with `num_paths` paths.
PathSet draw_user(const ScenarioConfig& cfg, int num_paths, std::mt19937_64& rng);

/// Draws `cfg.users` users; AoAs uniform on [-pi/2, pi/2], reflection
/// phases uniform on [0, 2pi), user positions uniform in the cell disc.
std::vector<PathSet> draw_scene(const ScenarioConfig& cfg, int num_paths, std::mt19937_64& rng);

/// Gaussian perturbation of AoAs and relative gains; distances and
/// phases are passed through.
PathSet perturb_estimates(const PathSet& ps, const EstimationNoise& noise, std::mt19937_64& rng);

}  // namespace phasefb
