#include "phasefb/channel_model.hpp"

#include <algorithm>

namespace phasefb {

void ArrayGeometry::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("ArrayGeometry: num_antennas must be >= 1");
  if (!(spacing > 0.0)) throw std::invalid_argument("ArrayGeometry: spacing must be positive");
  if (!(lambda_ul > 0.0) || !(lambda_dl > 0.0)) {
    throw std::invalid_argument("ArrayGeometry: wavelengths must be positive");
  }
}

ArrayGeometry ArrayGeometry::from_config(const ScenarioConfig& cfg, int num_antennas) {
  ArrayGeometry g{num_antennas, cfg.spacing(), cfg.lambda_ul(), cfg.lambda_dl()};
  g.validate();
  return g;
}

Eigen::VectorXd PathSet::betas() const {
  Eigen::VectorXd b(size());
  for (int l = 0; l < size(); ++l) b[l] = paths[l].beta;
  return b;
}

Eigen::VectorXd PathSet::squared_betas() const { return betas().array().square(); }

namespace {

VectorXcd synthesize(const PathSet& ps, const ArrayGeometry& geom, double lambda, bool downlink) {
  VectorXcd h = VectorXcd::Zero(geom.num_antennas);
  for (const auto& p : ps.paths) {
    const cd g = path_gain(p, lambda, downlink ? p.phi_dl : p.phi_ul);
    h += g * array_response(p.theta, lambda, geom);
  }
  return h;
}

}  // namespace

VectorXcd dl_channel(const PathSet& ps, const ArrayGeometry& geom) {
  return synthesize(ps, geom, geom.lambda_dl, true);
}

VectorXcd ul_channel(const PathSet& ps, const ArrayGeometry& geom) {
  return synthesize(ps, geom, geom.lambda_ul, false);
}

double path_loss(double distance, const ScenarioConfig& cfg) {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("path_loss: distance must be positive and finite");
  }
  const double pl0 = std::pow(10.0, cfg.pl_ref_db / 10.0);
  return pl0 * std::pow(distance / cfg.pl_ref_distance_m, -cfg.pl_exponent);
}

Eigen::VectorXd path_power_profile(int num_paths, double ratio) {
  if (num_paths < 1) throw std::invalid_argument("path_power_profile: need at least one path");
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("path_power_profile: ratio must lie in (0, 1]");
  }
  Eigen::VectorXd w(num_paths);
  double p = 1.0;
  for (int l = 0; l < num_paths; ++l, p *= ratio) w[l] = p;
  return w / w.sum();
}

PathSet draw_user(const ScenarioConfig& cfg, int num_paths, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double radius = cfg.isd_m / 2.0;
  const double rmin = std::min(cfg.min_distance_m, radius);
  const double r_user = std::sqrt(rmin * rmin + unit(rng) * (radius * radius - rmin * rmin));

  const Eigen::VectorXd w = path_power_profile(num_paths, cfg.decay_ratio);
  const double pl = path_loss(r_user, cfg);

  PathSet ps;
  ps.paths.reserve(num_paths);
  for (int l = 0; l < num_paths; ++l) {
    ChannelPath p;
    p.theta = (unit(rng) - 0.5) * kPi<double>;
    p.distance = r_user + unit(rng) * cfg.excess_path_m;
    p.phi_ul = unit(rng) * kTwoPi<double>;
    p.phi_dl = unit(rng) * kTwoPi<double>;
    p.beta = std::sqrt(pl * w[l]);
    ps.paths.push_back(p);
  }
  return ps;
}

std::vector<PathSet> draw_scene(const ScenarioConfig& cfg, int num_paths, std::mt19937_64& rng) {
  std::vector<PathSet> scene;
  scene.reserve(cfg.users);
  for (int k = 0; k < cfg.users; ++k) scene.push_back(draw_user(cfg, num_paths, rng));
  return scene;
}

PathSet perturb_estimates(const PathSet& ps, const EstimationNoise& noise, std::mt19937_64& rng) {
  PathSet out = ps;
  if (noise.aoa_sigma <= 0.0 && noise.gain_rel_sigma <= 0.0) return out;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half_pi = kPi<double> / 2.0;
  for (auto& p : out.paths) {
    const double dtheta = noise.aoa_sigma * gauss(rng);
    const double dgain = noise.gain_rel_sigma * gauss(rng);
    p.theta = std::clamp(p.theta + dtheta, -half_pi, half_pi);
    p.beta = std::max(0.0, p.beta * (1.0 + dgain));
  }
  return out;
}

}  // namespace phasefb
