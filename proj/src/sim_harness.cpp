#include "phasefb/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "phasefb/bit_allocation.hpp"
#include "phasefb/channel_model.hpp"
#include "phasefb/phase_feedback.hpp"
#include "phasefb/precoding.hpp"
#include "phasefb/reconstruction.hpp"

namespace phasefb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kSceneStream = 0;
constexpr std::uint64_t kPerturbStream = 1'000'000;
constexpr std::uint64_t kMonteCarloStream = 2'000'000;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::vector<int> budgets_for(const ScenarioConfig& cfg, int paths) {
  if (cfg.bits_per_path > 0) return {cfg.bits_per_path * paths};
  return cfg.bits;
}

std::vector<SweepPoint> points_without_power(const ScenarioConfig& cfg) {
  std::vector<SweepPoint> pts;
  for (int n : cfg.antennas) {
    for (int l : cfg.paths) {
      for (int b : budgets_for(cfg, l)) {
        pts.push_back({n, cfg.users, l, b, cfg.power_dbm.front()});
      }
    }
  }
  return pts;
}

std::vector<int> allocate(AllocatorKind kind, const Eigen::VectorXd& weights, int budget) {
  AllocationProblem p{std::vector<double>(weights.data(), weights.data() + weights.size()), budget};
  switch (kind) {
    case AllocatorKind::kGreedy: return allocate_greedy(p).bits;
    case AllocatorKind::kUniform: return allocate_uniform(p).bits;
    case AllocatorKind::kNone: return std::vector<int>(weights.size(), 0);
  }
  return {};
}

/// Scenes for every path count of the sweep, one stream per path count so
/// that the scene of a trial does not depend on the other sweep axes.
std::vector<std::vector<PathSet>> draw_trial_scenes(const ScenarioConfig& cfg, int trial) {
  std::vector<std::vector<PathSet>> scenes;
  for (int l : cfg.paths) {
    std::mt19937_64 rng(derive_trial_seed(cfg.seed, trial, kSceneStream + l));
    scenes.push_back(draw_scene(cfg, l, rng));
  }
  return scenes;
}

std::size_t path_index(const ScenarioConfig& cfg, int paths) {
  return static_cast<std::size_t>(std::find(cfg.paths.begin(), cfg.paths.end(), paths) -
                                  cfg.paths.begin());
}

std::vector<ExperimentRecord> aggregate(const std::string& experiment,
                                        const std::vector<SweepPoint>& points,
                                        const std::vector<std::string>& metrics,
                                        const std::vector<std::vector<double>>& per_trial) {
  std::vector<ExperimentRecord> out;
  const int trials = static_cast<int>(per_trial.size());
  std::vector<double> samples(trials);
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      for (int t = 0; t < trials; ++t) samples[t] = per_trial[t][p * metrics.size() + m];
      const Summary s = summarize(samples);
      out.push_back({experiment, points[p], metrics[m], s.mean, s.std_error, trials});
    }
  }
  return out;
}

std::vector<VectorXcd> steering_set(const PathSet& ps, const ArrayGeometry& geom) {
  std::vector<VectorXcd> a;
  a.reserve(ps.paths.size());
  for (const auto& p : ps.paths) a.push_back(array_response(p.theta, geom.lambda_dl, geom));
  return a;
}

}  // namespace

std::uint64_t derive_trial_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) + stream);
}

Summary summarize(std::span<const double> samples) {
  Summary s;
  const auto n = samples.size();
  if (n == 0) return s;
  double sum = 0.0;
  for (double x : samples) sum += x;
  s.mean = sum / static_cast<double>(n);
  if (n < 2) return s;
  double ss = 0.0;
  for (double x : samples) ss += (x - s.mean) * (x - s.mean);
  s.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  return s;
}

std::vector<SweepPoint> sweep_points(const ScenarioConfig& cfg) {
  std::vector<SweepPoint> pts;
  for (const auto& base : points_without_power(cfg)) {
    for (double p : cfg.power_dbm) {
      SweepPoint sp = base;
      sp.power_dbm = p;
      pts.push_back(sp);
    }
  }
  return pts;
}

std::vector<std::vector<double>> run_trials(int trials, int workers,
                                            const std::function<std::vector<double>(int)>& fn) {
  std::vector<std::vector<double>> results(trials);
  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, std::max(trials, 1));
  if (n_workers == 1) {
    for (int t = 0; t < trials; ++t) results[t] = fn(t);
    return results;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int t = next++; t < trials; t = next++) {
      try {
        results[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = trials;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<ExperimentRecord> run_mse_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::vector<SweepPoint> points = points_without_power(cfg);
  const std::vector<AllocatorKind> allocators = {AllocatorKind::kGreedy, AllocatorKind::kUniform,
                                                 AllocatorKind::kNone};
  std::vector<std::string> metrics;
  for (const char* kind : {"mse_closed", "mse_mc", "nmse_closed", "nmse_mc"}) {
    for (auto a : allocators) metrics.push_back(std::string(kind) + "_" + to_string(a));
  }
  const std::size_t n_alloc = allocators.size();

  auto trial_fn = [&](int trial) {
    const auto scenes = draw_trial_scenes(cfg, trial);
    std::vector<double> out(points.size() * metrics.size(), 0.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const SweepPoint& pt = points[pi];
      const ArrayGeometry geom = ArrayGeometry::from_config(cfg, pt.antennas);
      const auto& scene = scenes[path_index(cfg, pt.paths)];
      std::mt19937_64 rng(derive_trial_seed(cfg.seed, trial, kMonteCarloStream + pi));
      double* row = out.data() + pi * metrics.size();
      for (const PathSet& ps : scene) {
        const Eigen::VectorXd betas = ps.betas();
        const Eigen::VectorXd weights = ps.squared_betas();
        const double energy = pt.antennas * weights.sum();
        const auto steer = steering_set(ps, geom);
        for (std::size_t ai = 0; ai < n_alloc; ++ai) {
          const std::vector<int> bits = allocate(allocators[ai], weights, pt.bits);
          const double closed = theoretical_weighted_mse(betas, bits, pt.antennas);
          double mc = 0.0;
          for (int d = 0; d < cfg.mc_draws; ++d) {
            VectorXcd err = VectorXcd::Zero(pt.antennas);
            for (int l = 0; l < ps.size(); ++l) {
              const double psi = unit(rng) * kTwoPi<double>;
              const auto qp = quantize_phase(psi, bits[l]);
              err += (std::polar(betas[l], psi) - std::polar(eta(bits[l]) * betas[l], qp.q)) *
                     steer[l];
            }
            mc += err.squaredNorm();
          }
          mc /= cfg.mc_draws;
          row[0 * n_alloc + ai] += closed / cfg.users;
          row[1 * n_alloc + ai] += mc / cfg.users;
          row[2 * n_alloc + ai] += (energy > 0.0 ? closed / energy : 0.0) / cfg.users;
          row[3 * n_alloc + ai] += (energy > 0.0 ? mc / energy : 0.0) / cfg.users;
        }
      }
    }
    return out;
  };
  return aggregate("mse", points, metrics, run_trials(cfg.trials, cfg.workers, trial_fn));
}

std::vector<ExperimentRecord> run_delta_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::vector<SweepPoint> points = points_without_power(cfg);
  const std::vector<std::string> metrics = {"delta_norm", "delta_asymptotic", "delta_norm_rel",
                                            "delta_asymptotic_rel"};
  auto trial_fn = [&](int trial) {
    const auto scenes = draw_trial_scenes(cfg, trial);
    std::vector<double> out(points.size() * metrics.size(), 0.0);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      const SweepPoint& pt = points[pi];
      const ArrayGeometry geom = ArrayGeometry::from_config(cfg, pt.antennas);
      double* row = out.data() + pi * metrics.size();
      for (const PathSet& ps : scenes[path_index(cfg, pt.paths)]) {
        const Eigen::VectorXd weights = ps.squared_betas();
        const std::vector<int> bits = allocate(cfg.allocator, weights, pt.bits);
        const FeedbackPlan fp = make_feedback_plan(ps, bits, geom);
        const ReconstructedChannel rc = reconstruct_mmse(ps, fp, geom);
        const double norm = outer_product_error(dl_channel(ps, geom), rc).normalized_norm;
        std::vector<double> deltas;
        for (const auto& q : fp.phases) deltas.push_back(q.delta);
        const double limit = asymptotic_delta_norm(ps.betas(), bits, deltas);
        const double scale = weights.sum() * weights.sum();
        row[0] += norm / cfg.users;
        row[1] += limit / cfg.users;
        row[2] += (scale > 0.0 ? norm / scale : 0.0) / cfg.users;
        row[3] += (scale > 0.0 ? limit / scale : 0.0) / cfg.users;
      }
    }
    return out;
  };
  return aggregate("delta", points, metrics, run_trials(cfg.trials, cfg.workers, trial_fn));
}

namespace {

bool is_gpip(const std::string& method) { return method.rfind("gpip", 0) == 0; }

/// Per-user CSI needed by every method at one sweep point.
struct DropCsi {
  MatrixXcd h_dl;
  MatrixXcd h_ul;
  std::vector<ReconstructedChannel> mmse;
  std::vector<ReconstructedChannel> estimated;
  std::vector<ReconstructedChannel> no_feedback;
  std::vector<ReconstructedChannel> dft;
};

DropCsi build_drop_csi(const ScenarioConfig& cfg, const std::vector<PathSet>& scene,
                       const std::vector<PathSet>& perturbed, const ArrayGeometry& geom, int budget,
                       bool need_dft) {
  const int k_users = static_cast<int>(scene.size());
  DropCsi csi;
  csi.h_dl.resize(geom.num_antennas, k_users);
  csi.h_ul.resize(geom.num_antennas, k_users);
  for (int k = 0; k < k_users; ++k) {
    const PathSet& ps = scene[k];
    csi.h_dl.col(k) = dl_channel(ps, geom);
    csi.h_ul.col(k) = ul_channel(ps, geom);
    const std::vector<int> bits = allocate(cfg.allocator, ps.squared_betas(), budget);
    const FeedbackPlan fp = make_feedback_plan(ps, bits, geom);
    csi.mmse.push_back(reconstruct_mmse(ps, fp, geom));
    csi.estimated.push_back(reconstruct_mmse(perturbed[k], fp, geom));
    csi.no_feedback.push_back(reconstruct_no_feedback(ps, geom, cfg.no_feedback_full_cov));
    if (need_dft) csi.dft.push_back(reconstruct_dft(csi.h_dl.col(k), budget));
  }
  return csi;
}

PrecodingProblem problem_from(const std::vector<ReconstructedChannel>& rc, bool with_cov,
                              double sigma2, double power) {
  std::vector<VectorXcd> h;
  std::vector<MatrixXcd> phi;
  for (const auto& r : rc) {
    h.push_back(r.estimate);
    if (with_cov) phi.push_back(r.error_cov);
  }
  return make_problem(h, phi, std::vector<double>(rc.size(), sigma2), power);
}

PrecodingProblem perfect_problem(const MatrixXcd& h, double sigma2, double power) {
  std::vector<VectorXcd> cols;
  for (Eigen::Index k = 0; k < h.cols(); ++k) cols.push_back(h.col(k));
  return make_problem(cols, {}, std::vector<double>(cols.size(), sigma2), power);
}

struct MethodOutcome {
  double se_true = 0.0;
  double se_lower_bound = 0.0;
  int iterations = 0;
};

MethodOutcome evaluate_method(const std::string& method, const DropCsi& csi,
                              const ScenarioConfig& cfg, double sigma2, double power) {
  const PrecodingProblem truth = perfect_problem(csi.h_dl, sigma2, power);
  GpipConfig gcfg;
  gcfg.epsilon = cfg.gpip_epsilon;
  gcfg.max_iter = cfg.gpip_max_iter;

  auto run_gpip = [&](const PrecodingProblem& pp) {
    const GpipResult r = gpip_solve(pp, gcfg);
    return MethodOutcome{true_sum_se(r.precoder, csi.h_dl, truth),
                         sum_se_lower_bound(r.precoder, pp), r.iterations};
  };
  auto run_zf = [&](const MatrixXcd& hhat, const PrecodingProblem& pp) {
    const PrecoderStack f = zf_precoder(hhat);
    return MethodOutcome{true_sum_se(f, csi.h_dl, truth), sum_se_lower_bound(f, pp), 0};
  };

  if (method == "wmmse_perfect") {
    const WmmseResult r = wmmse_precoder(csi.h_dl, truth, cfg.wmmse_iters);
    const double se = true_sum_se(r.precoder, csi.h_dl, truth);
    return {se, se, r.iterations};
  }
  if (method == "gpip_perfect") return run_gpip(truth);
  if (method == "gpip_mmse_cov") return run_gpip(problem_from(csi.mmse, true, sigma2, power));
  if (method == "gpip_mmse") return run_gpip(problem_from(csi.mmse, false, sigma2, power));
  if (method == "gpip_est_cov") return run_gpip(problem_from(csi.estimated, true, sigma2, power));
  if (method == "gpip_nofb_cov") {
    return run_gpip(problem_from(csi.no_feedback, true, sigma2, power));
  }
  if (method == "gpip_dft") return run_gpip(problem_from(csi.dft, false, sigma2, power));
  if (method == "zf_mmse") {
    const auto pp = problem_from(csi.mmse, true, sigma2, power);
    return run_zf(pp.estimate_matrix(), pp);
  }
  if (method == "zf_est") {
    const auto pp = problem_from(csi.estimated, true, sigma2, power);
    return run_zf(pp.estimate_matrix(), pp);
  }
  if (method == "zf_nofb") {
    const auto pp = problem_from(csi.no_feedback, false, sigma2, power);
    return run_zf(pp.estimate_matrix(), pp);
  }
  if (method == "zf_dft") {
    const auto pp = problem_from(csi.dft, false, sigma2, power);
    return run_zf(pp.estimate_matrix(), pp);
  }
  if (method == "zf_ul") {
    const auto pp = perfect_problem(csi.h_ul, sigma2, power);
    return run_zf(csi.h_ul, pp);
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

std::vector<std::vector<PathSet>> perturb_scenes(const ScenarioConfig& cfg, int trial,
                                                 const std::vector<std::vector<PathSet>>& scenes) {
  const EstimationNoise noise{cfg.aoa_sigma, cfg.gain_rel_sigma};
  std::vector<std::vector<PathSet>> out;
  for (std::size_t li = 0; li < scenes.size(); ++li) {
    std::mt19937_64 rng(derive_trial_seed(cfg.seed, trial, kPerturbStream + cfg.paths[li]));
    std::vector<PathSet> users;
    for (const auto& ps : scenes[li]) users.push_back(perturb_estimates(ps, noise, rng));
    out.push_back(std::move(users));
  }
  return out;
}

/// Methods whose result does not depend on the feedback budget; evaluated
/// once per (N, L, power) within a trial.
bool bit_independent(const std::string& method) {
  return method == "wmmse_perfect" || method == "gpip_perfect" || method == "zf_ul" ||
         method == "zf_nofb" || method == "gpip_nofb_cov";
}

bool needs_dft(const std::vector<std::string>& methods) {
  return std::any_of(methods.begin(), methods.end(),
                     [](const std::string& m) { return m.find("dft") != std::string::npos; });
}

}  // namespace

std::vector<std::string> se_metric_names(const std::string& method) {
  std::vector<std::string> names = {"se_" + method};
  if (is_gpip(method)) names.push_back("se_lb_" + method);
  return names;
}

std::vector<ExperimentRecord> run_se_experiment(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::vector<SweepPoint> points = sweep_points(cfg);
  std::vector<std::string> metrics;
  for (const auto& m : cfg.methods) {
    for (auto& name : se_metric_names(m)) metrics.push_back(name);
  }
  const double sigma2 = cfg.noise_watts();
  const bool dft = needs_dft(cfg.methods);

  auto trial_fn = [&](int trial) {
    const auto scenes = draw_trial_scenes(cfg, trial);
    const auto perturbed = perturb_scenes(cfg, trial, scenes);
    std::map<std::tuple<std::string, int, int, double>, MethodOutcome> cache;
    std::vector<double> out;
    out.reserve(points.size() * metrics.size());
    for (const SweepPoint& pt : points) {
      const ArrayGeometry geom = ArrayGeometry::from_config(cfg, pt.antennas);
      const std::size_t li = path_index(cfg, pt.paths);
      const DropCsi csi = build_drop_csi(cfg, scenes[li], perturbed[li], geom, pt.bits, dft);
      const double power = dbm_to_watts(pt.power_dbm);
      for (const auto& m : cfg.methods) {
        MethodOutcome r;
        if (bit_independent(m)) {
          const auto key = std::make_tuple(m, pt.antennas, pt.paths, pt.power_dbm);
          auto it = cache.find(key);
          if (it == cache.end()) it = cache.emplace(key, evaluate_method(m, csi, cfg, sigma2, power)).first;
          r = it->second;
        } else {
          r = evaluate_method(m, csi, cfg, sigma2, power);
        }
        out.push_back(r.se_true);
        if (is_gpip(m)) out.push_back(r.se_lower_bound);
      }
    }
    return out;
  };
  return aggregate("se", points, metrics, run_trials(cfg.trials, cfg.workers, trial_fn));
}

std::vector<DropRecord> run_precode(const ScenarioConfig& cfg, PrecoderKind method) {
  cfg.validate();
  const std::vector<SweepPoint> points = sweep_points(cfg);
  const double sigma2 = cfg.noise_watts();
  const bool dft = cfg.reconstruction == ReconstructionMode::kDftBaseline;

  // Each trial yields (se_true, se_lb, iterations) per point.
  auto trial_fn = [&](int trial) {
    const auto scenes = draw_trial_scenes(cfg, trial);
    const auto perturbed = perturb_scenes(cfg, trial, scenes);
    std::vector<double> out;
    for (const SweepPoint& pt : points) {
      const ArrayGeometry geom = ArrayGeometry::from_config(cfg, pt.antennas);
      const std::size_t li = path_index(cfg, pt.paths);
      const DropCsi csi = build_drop_csi(cfg, scenes[li], perturbed[li], geom, pt.bits, dft);
      const double power = dbm_to_watts(pt.power_dbm);
      const bool noisy = cfg.aoa_sigma > 0.0 || cfg.gain_rel_sigma > 0.0;
      std::string name;
      switch (method) {
        case PrecoderKind::kWmmse: name = "wmmse_perfect"; break;
        case PrecoderKind::kGpip:
          switch (cfg.reconstruction) {
            case ReconstructionMode::kMmse: name = noisy ? "gpip_est_cov" : "gpip_mmse_cov"; break;
            case ReconstructionMode::kNoFeedback:
              name = cfg.no_feedback_full_cov ? "gpip_nofb_cov" : "gpip_nofb";
              break;
            case ReconstructionMode::kDftBaseline: name = "gpip_dft"; break;
          }
          break;
        case PrecoderKind::kZf:
          switch (cfg.reconstruction) {
            case ReconstructionMode::kMmse: name = noisy ? "zf_est" : "zf_mmse"; break;
            case ReconstructionMode::kNoFeedback: name = "zf_nofb"; break;
            case ReconstructionMode::kDftBaseline: name = "zf_dft"; break;
          }
          break;
      }
      MethodOutcome r;
      if (name == "gpip_nofb") {
        GpipConfig gcfg{cfg.gpip_epsilon, cfg.gpip_max_iter, true};
        const auto pp = problem_from(csi.no_feedback, false, sigma2, power);
        const GpipResult g = gpip_solve(pp, gcfg);
        r = {true_sum_se(g.precoder, csi.h_dl, perfect_problem(csi.h_dl, sigma2, power)),
             sum_se_lower_bound(g.precoder, pp), g.iterations};
      } else {
        r = evaluate_method(name, csi, cfg, sigma2, power);
      }
      out.push_back(r.se_true);
      out.push_back(r.se_lower_bound);
      out.push_back(r.iterations);
    }
    return out;
  };
  const auto per_trial = run_trials(cfg.trials, cfg.workers, trial_fn);

  std::vector<DropRecord> records;
  for (int t = 0; t < cfg.trials; ++t) {
    for (std::size_t p = 0; p < points.size(); ++p) {
      DropRecord rec;
      rec.drop = t;
      rec.point = points[p];
      rec.method = to_string(method);
      rec.reconstruction = method == PrecoderKind::kWmmse ? "perfect" : to_string(cfg.reconstruction);
      rec.se_true = per_trial[t][3 * p];
      rec.se_lower_bound = per_trial[t][3 * p + 1];
      rec.iterations = static_cast<int>(per_trial[t][3 * p + 2]);
      records.push_back(rec);
    }
  }
  return records;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void emit_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  out << "experiment,antennas,users,paths,bits,power_dbm,metric,mean,stderr,trials\n";
  for (const auto& r : records) {
    out << r.experiment << ',' << r.point.antennas << ',' << r.point.users << ',' << r.point.paths
        << ',' << r.point.bits << ',' << format_double(r.point.power_dbm) << ',' << r.metric << ','
        << format_double(r.mean) << ',' << format_double(r.std_error) << ',' << r.trials << '\n';
  }
}

void emit_csv(const std::vector<DropRecord>& records, std::ostream& out) {
  out << "drop,antennas,users,paths,bits,power_dbm,method,reconstruction,se_true,se_lower_bound,"
         "iterations\n";
  for (const auto& r : records) {
    out << r.drop << ',' << r.point.antennas << ',' << r.point.users << ',' << r.point.paths << ','
        << r.point.bits << ',' << format_double(r.point.power_dbm) << ',' << r.method << ','
        << r.reconstruction << ',' << format_double(r.se_true) << ','
        << format_double(r.se_lower_bound) << ',' << r.iterations << '\n';
  }
}

namespace {

template <typename Records>
void emit_to_file(const Records& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_csv(records, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace

void emit_csv(const std::vector<ExperimentRecord>& records, const std::string& path) {
  emit_to_file(records, path);
}

void emit_csv(const std::vector<DropRecord>& records, const std::string& path) {
  emit_to_file(records, path);
}

}  // namespace phasefb
