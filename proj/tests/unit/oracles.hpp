#pragma once

// Reference values computed without the library: closed forms and adaptive quadrature.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / boost::math::tgamma(0.5 * N);
}

inline double crit(int N) { return 2.0 * N / (N - 2.0); }

/// sup of int |u|^{2*} over |grad u|_2^2 = 1, from the extremal (1 + r^2)^{-(N-2)/2}
/// by quadrature of both radial integrals.
inline double sobolev_kappa(int N) {
  boost::math::quadrature::exp_sinh<double> q;
  const double w = sphere_area(N), p = crit(N);
  // integrands decay like r^{-N-1}; beyond 1e30 they are zero in double precision
  auto U = [N](double r) { return std::pow(1.0 + r * r, -0.5 * (N - 2)); };
  auto dU = [N](double r) { return -(N - 2) * r * std::pow(1.0 + r * r, -0.5 * N); };
  const double num =
      w * q.integrate([&](double r) { return r > 1e30 ? 0.0 : std::pow(U(r), p) * std::pow(r, N - 1); });
  const double den = w * q.integrate([&](double r) { return r > 1e30 ? 0.0 : dU(r) * dU(r) * std::pow(r, N - 1); });
  return num / std::pow(den, 0.5 * p);
}

/// Same value from the closed-form sharp Sobolev constant.
inline double sobolev_kappa_closed(int N) {
  const double S = std::numbers::pi * N * (N - 2) *
                   std::pow(boost::math::tgamma(0.5 * N) / boost::math::tgamma(static_cast<double>(N)), 2.0 / N);
  return std::pow(S, -0.5 * crit(N));
}

/// Energy of sqrt(2) sech on the line for -u'' + u = u^3.
inline constexpr double soliton_level = 4.0 / 3.0;
inline double soliton(double x) { return std::sqrt(2.0) / std::cosh(x); }

/// First Dirichlet eigenvalue of the unit ball in R^3 and of the interval (-L, L).
inline double ball3_lambda1(double R) { return std::numbers::pi * std::numbers::pi / (R * R); }
inline double interval_lambda1(double L) { return std::pow(std::numbers::pi / (2.0 * L), 2); }

}  // namespace oracle
