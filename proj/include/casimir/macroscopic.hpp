#pragma once

// Macroscopic reference results: retarded particle / half-space energy for a
// static dielectric constant, its many-body decomposition through the
// Clausius-Mossotti relation, and the ideal plate Casimir energy.

#include <cmath>
#include <limits>
#include <stdexcept>

#include "casimir/core.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

inline constexpr double infinite_epsilon = std::numeric_limits<double>::infinity();

struct MacroscopicConfig {
  double epsilon = infinite_epsilon;  // static permittivity of the half-space, >= 1
  double radius = 1.0;
  double distance = 1.0;

  void validate() const {
    if (!(epsilon >= 1.0)) throw std::domain_error("MacroscopicConfig: epsilon must be >= 1");
    if (!(radius > 0.0)) throw std::domain_error("MacroscopicConfig: radius must be > 0");
    if (!(distance > 0.0)) throw std::domain_error("MacroscopicConfig: distance must be > 0");
  }
};

namespace detail {

/// Bracket of the v-integrand of W = -(3/16pi) * integral_1^inf [...] dv, with
/// delta = eps - 1 and S = sqrt(delta + v^2). The reflection ratios are
/// rewritten so both numerators carry delta explicitly:
///   (eps v - S)/(eps v + S) = delta((delta+2) v^2 - 1) / (eps v + S)^2
///   (v - S)/(v + S)         = -delta / (v + S)^2
/// which keeps full relative precision as delta -> 0.
inline double macroscopic_bracket(double v, double delta) {
  const double eps = 1.0 + delta;
  const double S = std::sqrt(delta + v * v);
  const double v2 = v * v, v4 = v2 * v2;
  const double rp_den = eps * v + S;
  const double rs_den = v + S;
  const double rp = delta * ((delta + 2.0) * v2 - 1.0) / (rp_den * rp_den);
  const double rs = -delta / (rs_den * rs_den);
  return (2.0 / v2 - 1.0 / v4) * rp - rs / v4;
}

/// Clausius-Mossotti: eps = (3 + 2x)/(3 - x), i.e. eps - 1 = 3x/(3 - x).
inline double clausius_mossotti_delta(double x) { return 3.0 * x / (3.0 - x); }

}  // namespace detail

inline EnergyResult macroscopic_result(const MacroscopicConfig& cfg, double coefficient, double error,
                                       Regime regime) {
  EnergyResult out;
  out.coefficient = coefficient;
  out.error_estimate = error;
  out.scale = EnergyScale::hbar_c_rho3_over_d4;
  out.scale_value = std::pow(cfg.radius, 3) / std::pow(cfg.distance, 4);
  out.regime = regime;
  return out;
}

/// Total retarded energy of a perfectly conducting particle in front of a
/// half-space with static permittivity epsilon.
inline EnergyResult w_total(const MacroscopicConfig& cfg, const quad::QuadratureSpec& q) {
  cfg.validate();
  if (std::isinf(cfg.epsilon)) {
    // bracket -> 2/v^2, integral 2
    return macroscopic_result(cfg, -3.0 / (8.0 * pi), 0.0, Regime::analytic);
  }
  const double delta = cfg.epsilon - 1.0;
  if (delta == 0.0) return macroscopic_result(cfg, 0.0, 0.0, Regime::analytic);
  auto integrand = [delta](double v) { return detail::macroscopic_bracket(v, delta); };
  const auto res = quad::integrate_semi_infinite(integrand, q, 1.0, 1.0);
  const double pref = 3.0 / (16.0 * pi);
  auto out = macroscopic_result(cfg, -pref * res.value, pref * res.error_estimate, Regime::numeric);
  out.converged = res.converged;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  return out;
}

/// Order-n (n = 1, 2) term of the expansion of W in x = alpha N / eps0,
/// evaluated at the close-packed value x = 3 (reduced polarizability 1):
///   W_n = -(3/16pi) * (3^n / n!) * integral_1^inf d^n/dx^n bracket(v, delta(x))|_0 dv.
/// Derivatives are central differences at h = 1e-3 and 1e-4 combined by one
/// Richardson step, taken pointwise under the integral.
inline EnergyResult many_body_coefficient(int order, const quad::QuadratureSpec& q) {
  if (order != 1 && order != 2) throw std::invalid_argument("many_body_coefficient: order must be 1 or 2");
  constexpr double h1 = 1e-3, h2 = 1e-4;
  auto derivative = [order](double v, double h) {
    const double fp = detail::macroscopic_bracket(v, detail::clausius_mossotti_delta(h));
    const double fm = detail::macroscopic_bracket(v, detail::clausius_mossotti_delta(-h));
    // bracket vanishes at x = 0
    return order == 1 ? (fp - fm) / (2.0 * h) : (fp + fm) / (h * h);
  };
  auto richardson = [&](double v) {
    const double coarse = derivative(v, h1), fine = derivative(v, h2);
    return fine + (fine - coarse) / ((h1 / h2) * (h1 / h2) - 1.0);
  };
  const auto res = quad::integrate_semi_infinite(richardson, q, 1.0, 1.0);
  const auto coarse = quad::integrate_semi_infinite([&](double v) { return derivative(v, h1); }, q, 1.0, 1.0);
  const auto fine = quad::integrate_semi_infinite([&](double v) { return derivative(v, h2); }, q, 1.0, 1.0);

  const double taylor = order == 1 ? 3.0 : 9.0 / 2.0;  // 3^n / n!
  const double pref = -3.0 / (16.0 * pi) * taylor;
  const double fd_spread = std::abs(fine.value - coarse.value);
  // The O(h^2) step error of the finer estimate bounds what Richardson removes.
  const double step_error = fd_spread / ((h1 / h2) * (h1 / h2) - 1.0);
  MacroscopicConfig unit{infinite_epsilon, 1.0, 1.0};
  auto out = macroscopic_result(unit, pref * res.value, std::abs(pref) * (res.error_estimate + step_error),
                                Regime::numeric);
  out.converged = res.converged;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  if (fd_spread > 1e-4 * std::abs(res.value)) out.flags.emplace_back(flag::fd_instability);
  return out;
}

/// -pi^2/720 hbar c / d^3 per unit area.
inline EnergyResult casimir_ideal_per_area(double d) {
  if (!(d > 0.0)) throw std::domain_error("casimir_ideal_per_area: d must be > 0");
  EnergyResult out;
  out.coefficient = -pi * pi / 720.0;
  out.scale = EnergyScale::hbar_c_over_d3;
  out.scale_value = 1.0 / (d * d * d);
  out.regime = Regime::analytic;
  return out;
}

/// Closed-form two- and three-body particle/half-space coefficients.
inline constexpr double exact_w2_cp_coefficient = -69.0 / (160.0 * pi);
inline constexpr double exact_w3_cp_coefficient = 111.0 / (448.0 * pi);

}  // namespace casimir
