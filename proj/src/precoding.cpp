#include "phasefb/precoding.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace phasefb {

MatrixXcd PrecodingProblem::signal_covariance(int k) const {
  const auto& u = users[k];
  return u.hhat * u.hhat.adjoint() + u.phi;
}

MatrixXcd PrecodingProblem::estimate_matrix() const {
  MatrixXcd h(num_antennas(), num_users());
  for (int k = 0; k < num_users(); ++k) h.col(k) = users[k].hhat;
  return h;
}

void PrecodingProblem::validate() const {
  if (users.empty()) throw std::invalid_argument("PrecodingProblem: no users");
  if (!(power > 0.0) || !std::isfinite(power)) {
    throw std::invalid_argument("PrecodingProblem: power must be positive");
  }
  const Eigen::Index n = users.front().hhat.size();
  if (n < 1) throw std::invalid_argument("PrecodingProblem: empty channel");
  for (const auto& u : users) {
    if (u.hhat.size() != n || u.phi.rows() != n || u.phi.cols() != n) {
      throw std::invalid_argument("PrecodingProblem: inconsistent dimensions");
    }
    if (!(u.sigma2 > 0.0)) throw std::invalid_argument("PrecodingProblem: sigma2 must be positive");
  }
}

PrecodingProblem make_problem(const std::vector<VectorXcd>& hhat, const std::vector<MatrixXcd>& phi,
                              const std::vector<double>& sigma2, double power) {
  if (hhat.size() != sigma2.size() || (!phi.empty() && phi.size() != hhat.size())) {
    throw std::invalid_argument("make_problem: per-user inputs differ in length");
  }
  PrecodingProblem pp;
  pp.power = power;
  for (std::size_t k = 0; k < hhat.size(); ++k) {
    UserCsi u;
    u.hhat = hhat[k];
    u.phi = phi.empty() ? MatrixXcd::Zero(hhat[k].size(), hhat[k].size()) : phi[k];
    u.sigma2 = sigma2[k];
    pp.users.push_back(std::move(u));
  }
  pp.validate();
  return pp;
}

MatrixXcd PrecoderStack::as_matrix() const {
  const int n = num_antennas();
  MatrixXcd m(n, num_users);
  for (int k = 0; k < num_users; ++k) m.col(k) = block(k);
  return m;
}

PrecoderStack PrecoderStack::from_matrix(const MatrixXcd& columns) {
  PrecoderStack s;
  s.num_users = static_cast<int>(columns.cols());
  s.f = Eigen::Map<const VectorXcd>(columns.data(), columns.size());
  return s;
}

void PrecoderStack::normalize() {
  const double n = f.norm();
  if (n > 0.0) f /= n;
}

VectorXcd KroneckerBlockMatrix::apply(const VectorXcd& f) const {
  const Eigen::Index n = r.rows();
  VectorXcd out = shift * f;
  for (int j = 0; j < num_blocks; ++j) {
    if (j == removed) continue;
    out.segment(j * n, n).noalias() += r * f.segment(j * n, n);
  }
  return out;
}

double KroneckerBlockMatrix::quadratic(const VectorXcd& f) const {
  return f.dot(apply(f)).real();
}

MatrixXcd KroneckerBlockMatrix::dense() const {
  const Eigen::Index n = r.rows();
  MatrixXcd m = shift * MatrixXcd::Identity(n * num_blocks, n * num_blocks);
  for (int j = 0; j < num_blocks; ++j) {
    if (j != removed) m.block(j * n, j * n, n, n) += r;
  }
  return m;
}

RatioPair build_a_b(const PrecodingProblem& pp, int k) {
  if (k < 0 || k >= pp.num_users()) throw std::out_of_range("build_a_b: user index");
  RatioPair out;
  out.a.r = pp.signal_covariance(k);
  out.a.shift = pp.noise_shift(k);
  out.a.num_blocks = pp.num_users();
  out.b = out.a;
  out.b.removed = k;
  return out;
}

namespace {

struct QuadraticForms {
  Eigen::VectorXd a;  ///< f^H A_k f
  Eigen::VectorXd b;  ///< f^H B_k f
};

QuadraticForms quadratic_forms(const PrecoderStack& f, const PrecodingProblem& pp,
                               const std::vector<MatrixXcd>& cov) {
  const int k_users = pp.num_users();
  const MatrixXcd fm = f.as_matrix();
  const double energy = f.f.squaredNorm();
  QuadraticForms q{Eigen::VectorXd(k_users), Eigen::VectorXd(k_users)};
  for (int k = 0; k < k_users; ++k) {
    const MatrixXcd rf = cov[k] * fm;
    double total = 0.0;
    double own = 0.0;
    for (int i = 0; i < k_users; ++i) {
      const double v = fm.col(i).dot(rf.col(i)).real();
      total += v;
      if (i == k) own = v;
    }
    q.a[k] = total + pp.noise_shift(k) * energy;
    q.b[k] = q.a[k] - own;
  }
  return q;
}

std::vector<MatrixXcd> covariances(const PrecodingProblem& pp) {
  std::vector<MatrixXcd> cov;
  cov.reserve(pp.users.size());
  for (int k = 0; k < pp.num_users(); ++k) cov.push_back(pp.signal_covariance(k));
  return cov;
}

double log2_gamma_from(const QuadraticForms& q) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < q.a.size(); ++k) s += std::log2(q.a[k] / q.b[k]);
  return s;
}

void check_stack(const PrecoderStack& f, const PrecodingProblem& pp) {
  if (f.num_users != pp.num_users() || f.f.size() != pp.num_users() * pp.num_antennas()) {
    throw std::invalid_argument("precoder stack does not match the problem dimensions");
  }
}

/// Block-diagonal pieces of sum_k A_k / a_k and sum_k B_k / b_k:
/// block j of the first is ra + sa I, of the second rb - R_j / b_j + sb I.
struct WeightedSums {
  MatrixXcd ra;
  MatrixXcd rb;
  double sa = 0.0;
  double sb = 0.0;
};

WeightedSums weighted_sums(const QuadraticForms& q, const PrecodingProblem& pp,
                           const std::vector<MatrixXcd>& cov) {
  const int n = pp.num_antennas();
  WeightedSums w{MatrixXcd::Zero(n, n), MatrixXcd::Zero(n, n)};
  for (int k = 0; k < pp.num_users(); ++k) {
    w.ra += cov[k] / q.a[k];
    w.rb += cov[k] / q.b[k];
    w.sa += pp.noise_shift(k) / q.a[k];
    w.sb += pp.noise_shift(k) / q.b[k];
  }
  return w;
}

}  // namespace

double log2_gamma(const PrecoderStack& f, const PrecodingProblem& pp) {
  check_stack(f, pp);
  return log2_gamma_from(quadratic_forms(f, pp, covariances(pp)));
}

double gamma(const PrecoderStack& f, const PrecodingProblem& pp) {
  return std::exp2(log2_gamma(f, pp));
}

double sum_se_lower_bound(const PrecoderStack& f, const PrecodingProblem& pp) {
  check_stack(f, pp);
  const double energy = f.f.squaredNorm();
  double se = 0.0;
  if (energy == 0.0) return se;
  for (int k = 0; k < pp.num_users(); ++k) {
    const MatrixXcd r = pp.signal_covariance(k);
    double signal = 0.0;
    double interference = 0.0;
    for (int i = 0; i < pp.num_users(); ++i) {
      const double v = f.block(i).dot(r * f.block(i)).real();
      (i == k ? signal : interference) += v;
    }
    se += std::log2(1.0 + signal / (interference + pp.noise_shift(k) * energy));
  }
  return se;
}

void GpipConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("GpipConfig: epsilon must be positive");
  if (max_iter < 1) throw std::invalid_argument("GpipConfig: max_iter must be >= 1");
}

PrecoderStack zf_precoder(const MatrixXcd& h) {
  if (h.size() == 0) throw std::invalid_argument("zf_precoder: empty channel matrix");
  const MatrixXcd hh = h.adjoint();
  Eigen::CompleteOrthogonalDecomposition<MatrixXcd> cod(hh);
  MatrixXcd f = cod.pseudoInverse();
  for (Eigen::Index k = 0; k < f.cols(); ++k) {
    const double n = f.col(k).norm();
    if (n > 0.0) f.col(k) /= n;
  }
  PrecoderStack s = PrecoderStack::from_matrix(f);
  s.normalize();
  return s;
}

PrecoderStack gpip_initial_point(const PrecodingProblem& pp) {
  pp.validate();
  const int n = pp.num_antennas();
  const int k_users = pp.num_users();
  MatrixXcd g(n, k_users);
  for (int k = 0; k < k_users; ++k) {
    const auto& u = pp.users[k];
    const double est = u.hhat.squaredNorm();
    const double unc = u.phi.trace().real();
    if (est > 1e-12 * (est + unc) && est > 0.0) {
      g.col(k) = u.hhat;
      continue;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(pp.signal_covariance(k));
    const double top = es.eigenvalues()(n - 1);
    if (top > 0.0) {
      g.col(k) = std::sqrt(top) * es.eigenvectors().col(n - 1);
    } else {
      g.col(k) = VectorXcd::Unit(n, k % n);
    }
  }
  PrecoderStack f = zf_precoder(g);
  for (int k = 0; k < k_users; ++k) {
    if (f.block(k).norm() == 0.0) f.block(k) = g.col(k) / g.col(k).norm();
  }
  f.normalize();
  return f;
}

GpipResult gpip_solve(const PrecodingProblem& pp, const GpipConfig& cfg,
                      const std::optional<PrecoderStack>& f0) {
  pp.validate();
  cfg.validate();
  const int k_users = pp.num_users();
  const std::vector<MatrixXcd> cov = covariances(pp);

  PrecoderStack f = f0 ? *f0 : gpip_initial_point(pp);
  check_stack(f, pp);
  f.normalize();
  if (f.f.squaredNorm() == 0.0) throw std::invalid_argument("gpip_solve: zero initial precoder");

  GpipResult res;
  QuadraticForms q = quadratic_forms(f, pp, cov);
  double current = log2_gamma_from(q);
  if (!std::isfinite(current)) throw std::runtime_error("gpip_solve: non-finite gamma at start");
  res.log2_gamma_history.push_back(current);
  PrecoderStack best = f;
  double best_value = current;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    const WeightedSums w = weighted_sums(q, pp, cov);
    PrecoderStack next = f;
    for (int j = 0; j < k_users; ++j) {
      MatrixXcd m = w.rb - cov[j] / q.b[j];
      m.diagonal().array() += w.sb;
      Eigen::LLT<MatrixXcd> llt(m);
      const double rc = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
      if (llt.info() != Eigen::Success || !(rc > 1e-15)) {
        throw SolverError("gpip_solve: Bbar block " + std::to_string(j) +
                              " is not numerically positive definite (rcond " +
                              std::to_string(rc) + ")",
                          rc);
      }
      const VectorXcd rhs = w.ra * f.block(j) + w.sa * f.block(j);
      next.block(j) = llt.solve(rhs);
    }
    next.normalize();
    f = std::move(next);
    q = quadratic_forms(f, pp, cov);
    const double value = log2_gamma_from(q);
    if (!std::isfinite(value)) throw std::runtime_error("gpip_solve: non-finite gamma");
    res.log2_gamma_history.push_back(value);
    res.iterations = it;
    if (value > best_value) {
      best_value = value;
      best = f;
    }
    const double rel = std::abs(std::exp2(value - current) - 1.0);
    current = value;
    if (rel < cfg.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.precoder = cfg.keep_best ? best : f;
  return res;
}

double stationarity_residual(const PrecoderStack& f, const PrecodingProblem& pp) {
  pp.validate();
  check_stack(f, pp);
  const std::vector<MatrixXcd> cov = covariances(pp);
  const QuadraticForms q = quadratic_forms(f, pp, cov);
  const WeightedSums w = weighted_sums(q, pp, cov);
  // Abar f and gamma Bbar f share the factor prod_k f^H A_k f.
  double num = 0.0;
  double den = 0.0;
  for (int j = 0; j < pp.num_users(); ++j) {
    const auto fj = f.block(j);
    const VectorXcd af = w.ra * fj + w.sa * fj;
    const VectorXcd bf = w.rb * fj - cov[j] * fj / q.b[j] + w.sb * fj;
    num += (af - bf).squaredNorm();
    den += af.squaredNorm();
  }
  return std::sqrt(num / den);
}

double true_sum_se(const PrecoderStack& f, const MatrixXcd& h_true, const PrecodingProblem& pp) {
  const int k_users = static_cast<int>(h_true.cols());
  if (f.num_users != k_users || f.f.size() != h_true.size() || pp.num_users() != k_users) {
    throw std::invalid_argument("true_sum_se: dimension mismatch");
  }
  const double energy = f.f.squaredNorm();
  if (energy == 0.0) return 0.0;
  const MatrixXcd gains = h_true.adjoint() * f.as_matrix();  // (k, i) = h_k^H f_i
  double se = 0.0;
  for (int k = 0; k < k_users; ++k) {
    const double signal = std::norm(gains(k, k));
    const double interference = gains.row(k).squaredNorm() - signal;
    se += std::log2(1.0 + signal / (interference + pp.noise_shift(k) * energy));
  }
  return se;
}

namespace {

/// Smallest mu >= 0 with sum_k ||(J + mu I)^+ m_k||^2 <= power.
MatrixXcd power_constrained_solve(const MatrixXcd& j, const MatrixXcd& m, double power) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(j);
  const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0);
  const MatrixXcd proj = es.eigenvectors().adjoint() * m;
  const Eigen::VectorXd mass = proj.rowwise().squaredNorm();
  const double dmax = d.maxCoeff();
  const double floor = 1e-12 * dmax;

  auto energy = [&](double mu) {
    double e = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      const double denom = d[i] + mu;
      if (denom <= floor) continue;
      e += mass[i] / (denom * denom);
    }
    return e;
  };

  double mu = 0.0;
  if (energy(0.0) > power) {
    double lo = 0.0;
    double hi = std::sqrt(mass.sum() / power);
    while (energy(hi) > power) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (energy(mid) > power ? lo : hi) = mid;
    }
    mu = hi;
  }
  Eigen::VectorXd inv(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double denom = d[i] + mu;
    inv[i] = denom <= floor ? 0.0 : 1.0 / denom;
  }
  return es.eigenvectors() * (inv.asDiagonal() * proj);
}

}  // namespace

WmmseResult wmmse_precoder(const MatrixXcd& h_true, const PrecodingProblem& pp, int max_iters,
                           double tol) {
  const int k_users = static_cast<int>(h_true.cols());
  if (pp.num_users() != k_users) throw std::invalid_argument("wmmse_precoder: user count mismatch");
  if (max_iters < 0) throw std::invalid_argument("wmmse_precoder: negative iteration count");

  WmmseResult res;
  PrecoderStack f = zf_precoder(h_true);
  double current = true_sum_se(f, h_true, pp);
  res.sum_se_history.push_back(current);
  PrecoderStack best = f;
  double best_value = current;

  const double power = pp.power;
  MatrixXcd v = std::sqrt(power) * f.as_matrix();
  for (int it = 1; it <= max_iters; ++it) {
    const MatrixXcd gains = h_true.adjoint() * v;  // (k, i) = h_k^H v_i
    MatrixXcd j = MatrixXcd::Zero(h_true.rows(), h_true.rows());
    MatrixXcd m(h_true.rows(), k_users);
    for (int k = 0; k < k_users; ++k) {
      const double den = gains.row(k).squaredNorm() + pp.users[k].sigma2;
      const cd u = gains(k, k) / den;
      const double w = den / (den - std::norm(gains(k, k)));
      j.noalias() += (w * std::norm(u)) * h_true.col(k) * h_true.col(k).adjoint();
      m.col(k) = (w * u) * h_true.col(k);
    }
    v = power_constrained_solve(j, m, power);
    f = PrecoderStack::from_matrix(v);
    const double value = true_sum_se(f, h_true, pp);
    res.sum_se_history.push_back(value);
    res.iterations = it;
    if (value > best_value) {
      best_value = value;
      best = f;
    }
    const double rel = std::abs(value - current) / std::max(std::abs(current), 1e-300);
    current = value;
    if (rel < tol) break;
  }
  best.normalize();
  res.precoder = best;
  return res;
}

}  // namespace phasefb
