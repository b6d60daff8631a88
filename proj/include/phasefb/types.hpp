#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace phasefb {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cd = std::complex<double>;
using VectorXcd = CVector<double>;
using MatrixXcd = CMatrix<double>;

template <typename Real>
inline constexpr Real kPi = std::numbers::pi_v<Real>;

template <typename Real>
inline constexpr Real kTwoPi = Real(2) * std::numbers::pi_v<Real>;

/// Reduces an angle to [-pi, pi).
template <typename Real>
Real wrap_to_pi(Real angle) {
  Real r = std::fmod(angle + kPi<Real>, kTwoPi<Real>);
  if (r < Real(0)) r += kTwoPi<Real>;
  return r - kPi<Real>;
}

/// Reduces an angle to [0, 2pi).
template <typename Real>
Real wrap_to_two_pi(Real angle) {
  Real r = std::fmod(angle, kTwoPi<Real>);
  if (r < Real(0)) r += kTwoPi<Real>;
  // fmod of a tiny negative value can round up to exactly 2pi
  if (r >= kTwoPi<Real>) r = Real(0);
  return r;
}

}  // namespace phasefb
