#pragma once

// Two- and three-body dispersion energies between identical metal spheres.
//
// With alpha = 4 pi eps0 rho^3 * alpha_r (alpha_r the reduced polarizability)
// the prefactors of the imaginary-frequency integrals collapse to
//   two-body:   -hbar/(16 pi^3 eps0^2) * (4 pi eps0 rho^3)^2 = -hbar/pi * rho^6
//   three-body:  hbar/(64 pi^4 eps0^3) * (4 pi eps0 rho^3)^3 = +hbar/pi * rho^9
// (see docs/derivations.md).

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "casimir/core.hpp"
#include "casimir/material.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

/// Three particle separations. Collinear (degenerate) triangles are valid.
class Triangle {
 public:
  Triangle(double a, double b, double c) : sides_{a, b, c} {
    if (!(a > 0.0 && b > 0.0 && c > 0.0)) throw std::invalid_argument("Triangle: sides must be > 0");
    const double slack = 1e-12 * (a + b + c);
    if (a > b + c + slack || b > a + c + slack || c > a + b + slack)
      throw std::invalid_argument("Triangle: sides violate the triangle inequality");
  }

  double a() const { return sides_[0]; }
  double b() const { return sides_[1]; }
  double c() const { return sides_[2]; }
  double perimeter() const { return sides_[0] + sides_[1] + sides_[2]; }
  double min_side() const { return std::min({sides_[0], sides_[1], sides_[2]}); }
  double max_side() const { return std::max({sides_[0], sides_[1], sides_[2]}); }

  // Cosines of the angles opposite a, b, c.
  double cos_a() const { return law_of_cosines(sides_[0], sides_[1], sides_[2]); }
  double cos_b() const { return law_of_cosines(sides_[1], sides_[2], sides_[0]); }
  double cos_c() const { return law_of_cosines(sides_[2], sides_[0], sides_[1]); }

 private:
  static double law_of_cosines(double opposite, double p, double q) {
    return std::clamp((p * p + q * q - opposite * opposite) / (2.0 * p * q), -1.0, 1.0);
  }
  std::array<double, 3> sides_;
};

namespace detail {

inline double g2_unchecked(double x) {
  return std::exp(-2.0 * x) * (3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x))));
}

inline double g3_unchecked(double x, double y, double z, double ca, double cb, double cc) {
  auto f = [](double t) { return 1.0 + t + t * t; };
  auto g = [](double t) { return 3.0 + 3.0 * t + t * t; };
  const double fx = f(x), fy = f(y), fz = f(z);
  const double gx = g(x), gy = g(y), gz = g(z);
  const double bracket = 3.0 * fx * fy * fz - gx * fy * fz - fx * gy * fz - fx * fy * gz +
                         fx * gy * gz * ca * ca + gx * fy * gz * cb * cb + gx * gy * fz * cc * cc +
                         gx * gy * gz * ca * cb * cc;
  return std::exp(-(x + y + z)) * bracket;
}

}  // namespace detail

/// e^{-2x}(3 + 6x + 5x^2 + 2x^3 + x^4).
inline double g2(double x) {
  if (!(x >= 0.0)) throw std::domain_error("g2: x must be >= 0");
  return detail::g2_unchecked(x);
}

/// Frequency kernel of the three-body interaction at reduced arguments
/// x = a xi, y = b xi, z = c xi; (ca, cb, cc) are the cosines of the angles
/// opposite a, b, c.
inline double g3(double x, double y, double z, double ca, double cb, double cc) {
  if (!(x >= 0.0 && y >= 0.0 && z >= 0.0)) throw std::domain_error("g3: arguments must be >= 0");
  return detail::g3_unchecked(x, y, z, ca, cb, cc);
}

inline double g3(double x, double y, double z, const Triangle& t) {
  return g3(x, y, z, t.cos_a(), t.cos_b(), t.cos_c());
}

/// Geometric factor f(a, b, c) of the retarded three-body energy
/// U = (4 hbar c rho^9 / pi) f. Cosines are passed in so callers holding
/// coordinates can supply them without the cancellation of the law of
/// cosines at small sides.
inline double retarded_triplet_factor(double a, double b, double c, double ca, double cb, double cc) {
  const double s1 = a + b + c;
  const double s2 = a * a + b * b + c * c;
  const double s3 = a * a * a + b * b * b + c * c * c;
  const double i1 = 1.0 / s1;
  const double r2 = s2 * i1 * i1;           // s2/s1^2
  const double r3 = s3 * i1 * i1 * i1;      // s3/s1^3
  const double f1 = 9.0 - 39.0 * r2 + 22.0 * r3 + 54.0 * r2 * r2 - 65.0 * r2 * r3 + 20.0 * r3 * r3;
  const double f3 = 1.0 + 39.0 * r2 - 17.0 * r3 - 72.0 * r2 * r2 + 75.0 * r2 * r3 - 20.0 * r3 * r3;
  auto f2 = [i1](double p, double q, double r) {
    const double i2 = i1 * i1, i3 = i2 * i1, i4 = i3 * i1, i5 = i4 * i1;
    return 3.0 * (p * p * i2 + 3.0 * p * p * (q + r) * i3 + 4.0 * q * r * (3.0 * p * p - q * r) * i4 -
                  20.0 * p * q * q * r * r * i5);
  };
  const double bracket = f1 + f2(a, b, c) * ca * ca + f2(b, c, a) * cb * cb + f2(c, a, b) * cc * cc +
                         f3 * ca * cb * cc;
  const double abc = a * b * c;
  return bracket / (abc * abc * abc * s1);
}

inline double retarded_triplet_factor(const Triangle& t) {
  return retarded_triplet_factor(t.a(), t.b(), t.c(), t.cos_a(), t.cos_b(), t.cos_c());
}

// ---------------------------------------------------------------------------
// Two-body

/// -(23/4pi) rho^6 / r^7.
inline EnergyResult u2_retarded(double rho, double r) {
  if (!(rho > 0.0)) throw std::domain_error("u2_retarded: rho must be > 0");
  if (!(r > 0.0)) throw std::domain_error("u2_retarded: r must be > 0");
  EnergyResult out;
  out.coefficient = -23.0 / (4.0 * pi);
  out.scale = EnergyScale::hbar_c_rho6_over_r7;
  out.scale_value = std::pow(rho, 6) / std::pow(r, 7);
  out.regime = Regime::retarded;
  if (r < 2.0 * rho) out.flags.emplace_back(flag::overlap);
  return out;
}

/// -(sqrt3/4)(omega_p - 2 sqrt3 Gamma/pi) rho^6 / r^6, first order in Gamma.
inline EnergyResult u2_nonretarded(const DrudeMaterial& m, double r) {
  m.validate();
  if (!(r > 0.0)) throw std::domain_error("u2_nonretarded: r must be > 0");
  const double wp = m.plasma_frequency;
  EnergyResult out;
  out.coefficient = -(std::sqrt(3.0) / 4.0) * (1.0 - 2.0 * std::sqrt(3.0) * m.damping / (pi * wp));
  out.scale = EnergyScale::hbar_omegap_rho6_over_r6;
  out.scale_value = wp * std::pow(m.radius, 6) / std::pow(r, 6);
  out.regime = Regime::nonretarded;
  out.flags.emplace_back(flag::first_order_gamma);
  if (m.series_warning()) out.flags.emplace_back(flag::series_validity);
  if (r > m.plasma_wavelength() / 50.0) out.flags.emplace_back(flag::outside_regime);
  if (r < 2.0 * m.radius) out.flags.emplace_back(flag::overlap);
  return out;
}

namespace detail {
inline double frequency_scale(const Material& m, double length) {
  double s = 1.0 / length;
  if (const auto* d = std::get_if<DrudeMaterial>(&m)) s = std::min(s, d->plasma_frequency / std::sqrt(3.0));
  return s;
}
}  // namespace detail

/// -(1/pi)(rho^6/r^6) * integral_0^inf alpha_r(i xi)^2 g2(xi r) dxi, reported
/// on the retarded scale hbar c rho^6/r^7.
inline EnergyResult u2_full(const Material& m, double r, const quad::QuadratureSpec& q) {
  validate(m);
  if (!(r > 0.0)) throw std::domain_error("u2_full: r must be > 0");
  auto integrand = [&](double xi) {
    const double a = reduced_polarizability(m, xi);
    return a * a * detail::g2_unchecked(xi * r);
  };
  const auto res = quad::integrate_semi_infinite(integrand, q, detail::frequency_scale(m, r));
  const double rho = radius_of(m);
  EnergyResult out;
  out.coefficient = -r / pi * res.value;
  out.error_estimate = r / pi * res.error_estimate;
  out.scale = EnergyScale::hbar_c_rho6_over_r7;
  out.scale_value = std::pow(rho, 6) / std::pow(r, 7);
  out.converged = res.converged;
  out.regime = Regime::full;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  if (r < 2.0 * rho) out.flags.emplace_back(flag::overlap);
  return out;
}

// ---------------------------------------------------------------------------
// Three-body. Coefficients are reported on hbar c rho^9 / L^10 with L the
// mean side, except the non-retarded closed form which keeps its natural
// hbar omega_p rho^9 / (abc)^3 scale.

namespace detail {
inline double mean_side(const Triangle& t) { return t.perimeter() / 3.0; }
}  // namespace detail

/// (4/pi) rho^9 f(a, b, c).
inline EnergyResult u3_retarded(double rho, const Triangle& t) {
  if (!(rho > 0.0)) throw std::domain_error("u3_retarded: rho must be > 0");
  const double L = detail::mean_side(t);
  EnergyResult out;
  out.coefficient = 4.0 / pi * retarded_triplet_factor(t) * std::pow(L, 10);
  out.scale = EnergyScale::hbar_c_rho9_over_l10;
  out.scale_value = std::pow(rho, 9) / std::pow(L, 10);
  out.regime = Regime::retarded;
  return out;
}

/// (3 sqrt3/16)(omega_p - 8 sqrt3 Gamma/(3 pi)) rho^9 (1 + 3 cosA cosB cosC)/(abc)^3.
inline EnergyResult u3_nonretarded(const DrudeMaterial& m, const Triangle& t) {
  m.validate();
  const double wp = m.plasma_frequency;
  const double angular = 1.0 + 3.0 * t.cos_a() * t.cos_b() * t.cos_c();
  const double abc = t.a() * t.b() * t.c();
  EnergyResult out;
  out.coefficient =
      (3.0 * std::sqrt(3.0) / 16.0) * (1.0 - 8.0 * std::sqrt(3.0) * m.damping / (3.0 * pi * wp)) * angular;
  out.scale = EnergyScale::hbar_omegap_rho9_over_abc3;
  out.scale_value = wp * std::pow(m.radius, 9) / (abc * abc * abc);
  out.regime = Regime::nonretarded;
  out.flags.emplace_back(flag::first_order_gamma);
  if (m.series_warning()) out.flags.emplace_back(flag::series_validity);
  if (t.max_side() > m.plasma_wavelength() / 50.0) out.flags.emplace_back(flag::outside_regime);
  return out;
}

/// (1/pi) rho^9/(abc)^3 * integral_0^inf alpha_r(i xi)^3 g3(a xi, b xi, c xi) dxi.
inline EnergyResult u3_full(const Material& m, const Triangle& t, const quad::QuadratureSpec& q) {
  validate(m);
  const double a = t.a(), b = t.b(), c = t.c();
  const double ca = t.cos_a(), cb = t.cos_b(), cc = t.cos_c();
  auto integrand = [&](double xi) {
    const double al = reduced_polarizability(m, xi);
    return al * al * al * detail::g3_unchecked(a * xi, b * xi, c * xi, ca, cb, cc);
  };
  const auto res = quad::integrate_semi_infinite(integrand, q, detail::frequency_scale(m, t.perimeter()));
  const double abc = a * b * c;
  const double L = detail::mean_side(t);
  const double to_coefficient = std::pow(L, 10) / (pi * abc * abc * abc);
  EnergyResult out;
  out.coefficient = res.value * to_coefficient;
  out.error_estimate = res.error_estimate * to_coefficient;
  out.scale = EnergyScale::hbar_c_rho9_over_l10;
  out.scale_value = std::pow(radius_of(m), 9) / std::pow(L, 10);
  out.converged = res.converged;
  out.regime = Regime::full;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  return out;
}

// ---------------------------------------------------------------------------
// Regime selection

enum class RegimeChoice { automatic, nonretarded, retarded, full };

/// `automatic` uses the non-retarded form when every separation is below
/// lambda_p * nonret_fraction, the retarded form when every separation
/// exceeds lambda_p * ret_multiple, and the frequency integral otherwise.
/// Perfect conductors are always retarded.
struct RegimeThresholds {
  double nonret_fraction = 1.0 / 50.0;
  double ret_multiple = 50.0;
};

inline Regime select_regime(const Material& m, double min_sep, double max_sep, RegimeThresholds th = {}) {
  const auto* d = std::get_if<DrudeMaterial>(&m);
  if (d == nullptr) return Regime::retarded;
  const double lp = d->plasma_wavelength();
  if (max_sep < lp * th.nonret_fraction) return Regime::nonretarded;
  if (min_sep > lp * th.ret_multiple) return Regime::retarded;
  return Regime::full;
}

namespace detail {
inline Regime resolve(RegimeChoice choice, const Material& m, double min_sep, double max_sep,
                      RegimeThresholds th) {
  switch (choice) {
    case RegimeChoice::automatic: return select_regime(m, min_sep, max_sep, th);
    case RegimeChoice::nonretarded:
      if (is_perfect_conductor(m))
        throw std::invalid_argument("non-retarded regime is undefined for a perfect conductor");
      return Regime::nonretarded;
    case RegimeChoice::retarded: return Regime::retarded;
    case RegimeChoice::full: return Regime::full;
  }
  return Regime::full;
}
}  // namespace detail

inline EnergyResult pair_energy(const Material& m, double r, RegimeChoice choice, const quad::QuadratureSpec& q,
                                RegimeThresholds th = {}) {
  validate(m);
  switch (detail::resolve(choice, m, r, r, th)) {
    case Regime::nonretarded: return u2_nonretarded(std::get<DrudeMaterial>(m), r);
    case Regime::retarded: return u2_retarded(radius_of(m), r);
    default: return u2_full(m, r, q);
  }
}

inline EnergyResult triplet_energy(const Material& m, const Triangle& t, RegimeChoice choice,
                                   const quad::QuadratureSpec& q, RegimeThresholds th = {}) {
  validate(m);
  switch (detail::resolve(choice, m, t.min_side(), t.max_side(), th)) {
    case Regime::nonretarded: return u3_nonretarded(std::get<DrudeMaterial>(m), t);
    case Regime::retarded: return u3_retarded(radius_of(m), t);
    default: return u3_full(m, t, q);
  }
}

}  // namespace casimir
