#pragma once

// Two perfectly conducting half-spaces z <= 0 and z >= d: two- and
// three-body contributions to the Casimir energy per unit area.

#include <array>
#include <cmath>
#include <stdexcept>

#include "casimir/core.hpp"
#include "casimir/halfspace.hpp"
#include "casimir/kernels.hpp"
#include "casimir/macroscopic.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

struct SlabConfig {
  double gap = 1.0;  // d
  double radius = 1.0;

  void validate() const {
    if (!(gap > 0.0)) throw std::domain_error("SlabConfig: gap must be > 0");
    if (!(radius > 0.0)) throw std::domain_error("SlabConfig: radius must be > 0");
  }
  double density() const { return 3.0 / (4.0 * pi * radius * radius * radius); }
};

enum class SlabMode { analytic, numeric };

namespace detail {
inline EnergyResult slab_result(const SlabConfig& cfg, double coefficient, double error, Regime regime) {
  EnergyResult out;
  out.coefficient = coefficient;
  out.error_estimate = error;
  out.scale = EnergyScale::hbar_c_over_d3;
  out.scale_value = 1.0 / (cfg.gap * cfg.gap * cfg.gap);
  out.regime = regime;
  return out;
}
}  // namespace detail

/// Pairwise sum: analytic -69/(640 pi^2), or numerically. The in-plane
/// integral is done in closed form,
///   integral d^2r U2_ret(sqrt(r^2 + Z^2)) = -(23/4pi) rho^6 * 2pi/(5 Z^5),
/// leaving a 2D integral over z1 <= 0 and z2 >= d.
inline EnergyResult w2_per_area(const SlabConfig& cfg, SlabMode mode, const quad::QuadratureSpec& q) {
  cfg.validate();
  if (mode == SlabMode::analytic) return detail::slab_result(cfg, -69.0 / (640.0 * pi * pi), 0.0, Regime::analytic);
  const double d = cfg.gap;
  const double rho6 = std::pow(cfg.radius, 6);
  const double plane = -(23.0 / (4.0 * pi)) * rho6 * 2.0 * pi / 5.0;  // times Z^-5
  auto integrand = [&](const std::array<double, 2>& u) {
    const auto m1 = quad::map_semi_infinite(u[0], 0.0, d, q.transform);      // -z1
    const auto m2 = quad::map_semi_infinite(u[1], d, d, q.transform);        // z2
    const double Z = m2.x + m1.x;
    const double Z2 = Z * Z;
    return plane / (Z2 * Z2 * Z) * m1.jacobian * m2.jacobian;
  };
  const auto res = quad::integrate_adaptive_nd<2>(integrand, {0.0, 0.0}, {1.0, 1.0}, q);
  const double n2 = cfg.density() * cfg.density();
  const double to_coefficient = n2 * d * d * d;
  auto out = detail::slab_result(cfg, res.value * to_coefficient, res.error_estimate * to_coefficient,
                                 Regime::numeric);
  out.converged = res.converged;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  return out;
}

/// Three-body energy per area from a particle/half-space three-body
/// coefficient C (on hbar c rho^3/z^4): triplets with two particles in one
/// half-space and one in the other, both assignments,
///   W3/A = 2 * integral_d^inf N * C * rho^3 / z^4 dz  ( = C / (2 pi) / d^3 ).
/// Triplets inside a single half-space are never enumerated.
inline EnergyResult w3_per_area(const SlabConfig& cfg, const EnergyResult& w3_cp, const quad::QuadratureSpec& q) {
  cfg.validate();
  if (w3_cp.scale != EnergyScale::hbar_c_rho3_over_d4)
    throw std::invalid_argument("w3_per_area: expected a particle/half-space coefficient");
  const double d = cfg.gap;
  const double rho3 = std::pow(cfg.radius, 3);
  const double n = cfg.density();
  auto integrand = [&](double z) {
    const double z2 = z * z;
    return 2.0 * n * rho3 / (z2 * z2);
  };
  const auto res = quad::integrate_semi_infinite(integrand, q, d, d);
  const double per_unit_c = res.value * d * d * d;  // -> 1/(2 pi)
  auto out = detail::slab_result(cfg, w3_cp.coefficient * per_unit_c,
                                 w3_cp.error_estimate * per_unit_c + std::abs(w3_cp.coefficient) * res.error_estimate * d * d * d,
                                 w3_cp.regime);
  out.converged = res.converged && w3_cp.converged;
  out.flags = w3_cp.flags;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  return out;
}

/// Same, using the closed-form particle/half-space coefficient 111/(448 pi).
inline EnergyResult w3_per_area(const SlabConfig& cfg, const quad::QuadratureSpec& q) {
  EnergyResult exact;
  exact.coefficient = exact_w3_cp_coefficient;
  exact.scale = EnergyScale::hbar_c_rho3_over_d4;
  exact.regime = Regime::analytic;
  return w3_per_area(cfg, exact, q);
}

/// Pairwise share of the ideal Casimir energy, 69*720/(640 pi^4).
inline double pairwise_fraction(const SlabConfig& cfg) {
  cfg.validate();
  const auto w2 = w2_per_area(cfg, SlabMode::analytic, {});
  return w2.coefficient / casimir_ideal_per_area(cfg.gap).coefficient;
}

/// (W2 + W3) / W_ideal.
inline double partial_sum_fraction(const EnergyResult& w2, const EnergyResult& w3, const EnergyResult& ideal) {
  return (w2.coefficient + w3.coefficient) / ideal.coefficient;
}

}  // namespace casimir
