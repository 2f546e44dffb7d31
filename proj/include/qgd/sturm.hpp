#pragma once

// Canonical solutions of -f'' + V0 f = E f on an interval with constant V0,
// written as entire functions of mu = E - V0 so no branch of sqrt(E) is ever
// chosen:
//   S(x; mu) = sin(sqrt(mu) x) / sqrt(mu),   S(0) = 0, S'(0) = 1
//   C(x; mu) = cos(sqrt(mu) x),              C(0) = 1, C'(0) = 0
// with the hyperbolic continuation for mu < 0 and a Taylor series near mu x^2 = 0.

#include <Eigen/Dense>

#include <cmath>

namespace qgd::sturm {

template <typename Scalar>
using Transfer = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
using State = Eigen::Matrix<Scalar, 2, 1>;

/// |mu| x^2 below this uses the series branch.
inline constexpr double series_threshold = 1e-4;

namespace detail {

// sum_{n>=0} z^n / (2n+1)!  and  sum_{n>=0} z^n / (2n)!  for small |z|
template <typename Scalar>
Scalar sinc_series(Scalar z) {
  Scalar term(1), sum(1);
  for (int n = 1; n <= 8; ++n) {
    term *= z / Scalar((2 * n) * (2 * n + 1));
    sum += term;
  }
  return sum;
}

template <typename Scalar>
Scalar cos_series(Scalar z) {
  Scalar term(1), sum(1);
  for (int n = 1; n <= 8; ++n) {
    term *= z / Scalar((2 * n - 1) * (2 * n));
    sum += term;
  }
  return sum;
}

} // namespace detail

template <typename Scalar>
Scalar S(Scalar x, Scalar mu) {
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const Scalar z = -mu * x * x;
  if (std::abs(static_cast<double>(z)) < series_threshold) return x * detail::sinc_series(z);
  if (mu > 0) {
    const Scalar k = sqrt(mu);
    return sin(k * x) / k;
  }
  const Scalar kappa = sqrt(-mu);
  return sinh(kappa * x) / kappa;
}

template <typename Scalar>
Scalar C(Scalar x, Scalar mu) {
  using std::cos;
  using std::cosh;
  using std::sqrt;
  const Scalar z = -mu * x * x;
  if (std::abs(static_cast<double>(z)) < series_threshold) return detail::cos_series(z);
  if (mu > 0) return cos(sqrt(mu) * x);
  return cosh(sqrt(-mu) * x);
}

/// Second derivatives, coded directly from the trigonometric forms rather than
/// through the ODE. Used to check representation integrity.
template <typename Scalar>
Scalar S_second(Scalar x, Scalar mu) {
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const Scalar z = -mu * x * x;
  if (std::abs(static_cast<double>(z)) < series_threshold) {
    // d^2/dx^2 sum (-mu)^n x^(2n+1)/(2n+1)! = -mu x * sinc_series(z)
    return -mu * x * detail::sinc_series(z);
  }
  if (mu > 0) {
    const Scalar k = sqrt(mu);
    return -k * sin(k * x);
  }
  const Scalar kappa = sqrt(-mu);
  return kappa * sinh(kappa * x);
}

template <typename Scalar>
Scalar C_second(Scalar x, Scalar mu) {
  using std::cos;
  using std::cosh;
  using std::sqrt;
  const Scalar z = -mu * x * x;
  if (std::abs(static_cast<double>(z)) < series_threshold) return -mu * detail::cos_series(z);
  if (mu > 0) return -mu * cos(sqrt(mu) * x);
  return -mu * cosh(sqrt(-mu) * x);
}

/// Maps (f(0), f'(0)) to (f(x), f'(x)) on an interval of constant potential.
template <typename Scalar>
Transfer<Scalar> interval_transfer(Scalar x, Scalar mu) {
  const Scalar s = S(x, mu);
  const Scalar c = C(x, mu);
  Transfer<Scalar> t;
  t << c, s, -mu * s, c;
  return t;
}

/// Inverse of a unimodular 2x2 transfer matrix.
template <typename Derived>
auto unimodular_inverse(const Eigen::MatrixBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  Transfer<Scalar> inv;
  inv << t(1, 1), -t(0, 1), -t(1, 0), t(0, 0);
  return inv;
}

} // namespace qgd::sturm
