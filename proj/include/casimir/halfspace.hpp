#pragma once

// Particle / perfectly conducting half-space: overall two-body and
// three-body Casimir-Polder energies assembled from the pair and triplet
// kernels, plus a brute-force lattice sum for the two-body term.
//
// Geometry: the probe particle C sits at the origin, the half-space fills
// z >= d. Energies are reported on the scale hbar c rho^3 / d^4.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "casimir/core.hpp"
#include "casimir/kernels.hpp"
#include "casimir/material.hpp"
#include "casimir/quadrature.hpp"

namespace casimir {

struct HalfspaceConfig {
  double distance = 1.0;  // d, from C to the surface
  PerfectConductor material{1.0};

  void validate() const {
    if (!(distance > 0.0)) throw std::domain_error("HalfspaceConfig: d must be > 0");
    material.validate();
  }
  double radius() const { return material.radius; }
  /// Close packing of spheres of radius rho: N * (4 pi rho^3 / 3) = 1.
  double density() const { return 3.0 / (4.0 * pi * std::pow(material.radius, 3)); }
  double scale_value() const { return std::pow(material.radius, 3) / std::pow(distance, 4); }
};

namespace detail {
inline EnergyResult halfspace_result(const HalfspaceConfig& cfg, double coefficient, double error, Regime regime) {
  EnergyResult out;
  out.coefficient = coefficient;
  out.error_estimate = error;
  out.scale = EnergyScale::hbar_c_rho3_over_d4;
  out.scale_value = cfg.scale_value();
  out.regime = regime;
  return out;
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Two-body

/// -69/(160 pi).
inline EnergyResult w2_cp_analytic(const HalfspaceConfig& cfg) {
  cfg.validate();
  return detail::halfspace_result(cfg, -69.0 / (160.0 * pi), 0.0, Regime::analytic);
}

/// Integral of N * U2_ret over the half-space in spherical coordinates about
/// C: 0 <= theta < pi/2, r >= d/cos(theta), azimuth done analytically.
inline EnergyResult w2_cp_numeric(const HalfspaceConfig& cfg, const quad::QuadratureSpec& q) {
  cfg.validate();
  const double d = cfg.distance;
  const double rho = cfg.radius();
  const double pair = u2_retarded(rho, 1.0).coefficient * std::pow(rho, 6);  // U2 = pair / r^7
  auto integrand = [&](const std::array<double, 2>& u) {
    const double theta = u[0];
    const auto m = quad::map_semi_infinite(u[1], d / std::cos(theta), d, q.transform);
    const double r = m.x;
    return 2.0 * pi * std::sin(theta) / std::pow(r, 5) * m.jacobian;
  };
  const auto res = quad::integrate_adaptive_nd<2>(integrand, {0.0, 0.0}, {pi / 2.0, 1.0}, q);
  const double to_coefficient = cfg.density() * pair / cfg.scale_value();
  auto out = detail::halfspace_result(cfg, res.value * to_coefficient, res.error_estimate * std::abs(to_coefficient),
                                      Regime::numeric);
  out.converged = res.converged;
  if (!res.converged) out.flags.emplace_back(flag::not_converged);
  return out;
}

/// One lattice site with its volume weight (number of particles it stands for).
struct LatticeSite {
  double x, y, z;
  double weight;
};

/// Sum of weight * U2_ret(|site|) over the given sites (C at the origin).
inline double pair_sum_retarded(std::span<const LatticeSite> sites, double rho) {
  const double pair = u2_retarded(rho, 1.0).coefficient * std::pow(rho, 6);
  double sum = 0.0;
  for (const auto& s : sites) {
    const double r2 = s.x * s.x + s.y * s.y + s.z * s.z;
    sum += s.weight * pair / (r2 * r2 * r2 * std::sqrt(r2));
  }
  return sum;
}

/// Brute-force two-body sum over a simple cubic lattice of spacing
/// `spacing`. Sites sit at the centres of the cubes tiling z >= d, each with
/// weight N * spacing^3; sites farther than `extent` from C are replaced by
/// the exact continuum tail
///   integral_{z>=d, r>R} r^-7 dV = 2 pi (1/(4 R^4) - d/(5 R^5)).
inline EnergyResult lattice_oracle_w2(const HalfspaceConfig& cfg, double spacing, double extent) {
  cfg.validate();
  if (!(spacing > 0.0)) throw std::domain_error("lattice_oracle_w2: spacing must be > 0");
  const double d = cfg.distance;
  if (!(extent > d)) throw std::domain_error("lattice_oracle_w2: extent must exceed d");
  const double rho = cfg.radius();
  const double pair = u2_retarded(rho, 1.0).coefficient * std::pow(rho, 6);
  const double weight = cfg.density() * spacing * spacing * spacing;
  const double R2 = extent * extent;

  // Cell-centred in x and y too, so the four quadrants are mirror images.
  double sum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double z = d + (static_cast<double>(k) + 0.5) * spacing;
    if (z * z > R2) break;
    double layer = 0.0;
    for (std::size_t i = 0;; ++i) {
      const double x = (static_cast<double>(i) + 0.5) * spacing;
      const double xz2 = x * x + z * z;
      if (xz2 > R2) break;
      double row = 0.0;
      for (std::size_t j = 0;; ++j) {
        const double y = (static_cast<double>(j) + 0.5) * spacing;
        const double r2 = xz2 + y * y;
        if (r2 > R2) break;
        row += 1.0 / (r2 * r2 * r2 * std::sqrt(r2));
      }
      layer += row;
    }
    sum += 4.0 * layer;
  }
  const double lattice_energy = weight * pair * sum;
  const double tail_volume_integral =
      2.0 * pi * (1.0 / (4.0 * std::pow(extent, 4)) - d / (5.0 * std::pow(extent, 5)));
  const double tail_energy = cfg.density() * pair * tail_volume_integral;

  auto out = detail::halfspace_result(cfg, (lattice_energy + tail_energy) / cfg.scale_value(), 0.0,
                                      Regime::numeric);
  if (std::abs(tail_energy) > 0.01 * std::abs(lattice_energy)) out.flags.emplace_back(flag::extent_too_small);
  return out;
}

// ---------------------------------------------------------------------------
// Three-body
//
// K(d, lambda) = integral over A, B in z >= d with |AB| >= lambda of
// f(a, b, c) dV_A dV_B, and W3 = (2/pi) rho^9 N^2 K. Differentiating the
// Heaviside boundaries puts one particle (B) on the plane z = d; the two
// symmetric choices give the factor 2:
//
//   dK/dd = -2 * integral_{z_B = d} dS_B * integral_{z_A >= d, |AB| >= lambda} f dV_A.
//
// The production route places A in spherical coordinates about B, so the
// cutoff is the lower limit of the radial variable c = |AB| and A sweeps the
// hemisphere above the plane. B lies at transverse distance s from the axis.
// As c -> 0 the integrand approaches the dipolar term
//   f0 = (7/16)(1 - 3 cos^2 gamma) / (b^7 c^3),   cos gamma = n.B/b,
// whose integral over any hemisphere shell is exactly zero. It is subtracted
// under the window exp(-c/b), leaving a bounded integrand with the same
// value for every lambda >= 0.

namespace detail {

struct BCentredIntegrand {
  double d;
  double cutoff;
  double scale;
  quad::Transform transform;

  // Unweighted f - f0 at B = (s, 0, d), A = B + c n.
  double regularised(double s, double c, double mu, double psi) const {
    const double b2 = s * s + d * d;
    const double b = std::sqrt(b2);
    if (c < 1e-12 * b) return 0.0;
    const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    const double nx = st * std::cos(psi), ny = st * std::sin(psi), nz = mu;
    const double ax = s + c * nx, ay = c * ny, az = d + c * nz;
    const double a = std::sqrt(ax * ax + ay * ay + az * az);
    const double nb = (nx * s + nz * d) / b;  // n.B / b
    const double cos_opp_a = -nb;                                         // at B
    const double cos_opp_b = (nx * ax + ny * ay + nz * az) / a;           // at A
    const double cos_opp_c = (ax * s + az * d) / (a * b);                 // at C
    const double f = retarded_triplet_factor(a, b, c, cos_opp_a, cos_opp_b, cos_opp_c);
    const double b7 = b2 * b2 * b2 * b;
    const double f0 = (7.0 / 16.0) * (1.0 - 3.0 * nb * nb) / (b7 * c * c * c) * std::exp(-c / b);
    return f - f0;
  }

  double operator()(const std::array<double, 4>& u) const {
    const auto ms = quad::map_semi_infinite(u[0], 0.0, scale, transform);
    const auto mc = quad::map_semi_infinite(u[1], cutoff, scale, transform);
    const double s = ms.x, c = mc.x;
    return s * ms.jacobian * c * c * mc.jacobian * regularised(s, c, u[2], u[3]);
  }
};

}  // namespace detail

/// dK/dd at a single cutoff lambda (lambda = 0 allowed: the continuum value).
inline quad::IntegralResult dK_dd_at_cutoff(double d, double lambda, const quad::QuadratureSpec& q) {
  if (!(d > 0.0)) throw std::domain_error("dK_dd: d must be > 0");
  if (!(lambda >= 0.0)) throw std::domain_error("dK_dd: lambda must be >= 0");
  if (q.transform == quad::Transform::none) throw std::invalid_argument("dK_dd: transform must not be NONE");
  const detail::BCentredIntegrand integrand{d, lambda, 1.0, q.transform};
  auto spec = q;
  // the absolute tolerance applies to dK/dd, not to the raw integral
  spec.abs_tol = q.abs_tol / (8.0 * pi);
  auto res = quad::integrate_adaptive_nd<4>(integrand, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, pi}, spec);
  res.value *= -8.0 * pi;
  res.error_estimate *= 8.0 * pi;
  return res;
}

/// Integrand of dK/dd in the chart centred on C: A = (a, theta_A, phi),
/// B = (d / cos theta_B, theta_B, 0). Returns f a^2 b^2 sin(theta_A)
/// tan(theta_B), or 0 inside the excluded ball |AB| < lambda. The full
/// derivative is -2 * 2 pi * integral over theta_A in [0, pi/2),
/// a >= d/cos(theta_A), phi in [0, 2 pi), theta_B in [0, pi/2).
inline double polar_chart_integrand(double d, double lambda, double theta_a, double a, double phi, double theta_b) {
  const double b = d / std::cos(theta_b);
  const double sa = std::sin(theta_a), ca = std::cos(theta_a);
  const double sb = std::sin(theta_b), cb = std::cos(theta_b);
  const double Ax = a * sa * std::cos(phi), Ay = a * sa * std::sin(phi), Az = a * ca;
  const double Bx = b * sb, Bz = b * cb;
  const double dx = Ax - Bx, dy = Ay, dz = Az - Bz;
  const double c = std::sqrt(dx * dx + dy * dy + dz * dz);
  if (c < lambda || c == 0.0) return 0.0;
  // D = A - B. Angle at A (opposite b) is between -A and -D, at B (opposite a)
  // between -B and D, at C (opposite c) between A and B.
  const double cos_at_c = (Ax * Bx + Az * Bz) / (a * b);
  const double cos_at_a = (Ax * dx + Ay * dy + Az * dz) / (a * c);
  const double cos_at_b = -(Bx * dx + Bz * dz) / (b * c);
  const double f = retarded_triplet_factor(a, b, c, cos_at_b, cos_at_a, cos_at_c);
  return f * a * a * b * b * sa * (sb / cb);
}

/// The same derivative as dK_dd_at_cutoff, integrated in the C-centred chart
/// on the unit 4-cube (theta_A, a, phi in [0, pi], theta_B). Requires
/// lambda > 0: without the ball the chart has a non-integrable point.
struct PolarChartUnitCube {
  double d;
  double lambda;
  double scale = 1.0;

  double operator()(const std::array<double, 4>& u) const {
    const double theta_a = u[0] * (pi / 2.0);
    const double t = u[1];
    const double a = d / std::cos(theta_a) + scale * t / (1.0 - t);
    const double ja = scale / ((1.0 - t) * (1.0 - t));
    const double phi = u[2] * pi;
    const double theta_b = u[3] * (pi / 2.0);
    const double jac = (pi / 2.0) * ja * pi * (pi / 2.0);
    return -8.0 * pi * jac * polar_chart_integrand(d, lambda, theta_a, a, phi, theta_b);
  }
};

inline quad::IntegralResult dK_dd_polar(double d, double lambda, const quad::QuadratureSpec& q) {
  if (!(d > 0.0)) throw std::domain_error("dK_dd_polar: d must be > 0");
  if (!(lambda > 0.0)) throw std::domain_error("dK_dd_polar: lambda must be > 0");
  const PolarChartUnitCube integrand{d, lambda};
  return quad::integrate_adaptive_nd<4>(integrand, {0.0, 0.0, 0.0, 0.0}, {1.0, 1.0, 1.0, 1.0}, q);
}

/// dK/dd on the geometric ladder lambda_k = lambda_0 / 2^k, k < levels,
/// extrapolated to lambda -> 0 by Richardson elimination of lambda, lambda^2, ...
struct LadderResult {
  ConvergenceReport table;  // rows: (lambda, dK/dd, error, evals), last row = limit (lambda = 0)
  double limit = 0.0;
  double error = 0.0;       // extrapolation residual + propagated quadrature error
  double residual = 0.0;    // |last diagonal - previous diagonal|
  bool monotone = true;
  bool converged = true;
};

inline LadderResult lambda_ladder(double d, const quad::QuadratureSpec& q, std::size_t levels) {
  if (levels == 0) throw std::invalid_argument("lambda_ladder: levels must be > 0");
  if (!(q.singular_cutoff > 0.0)) throw std::invalid_argument("lambda_ladder: singular_cutoff must be > 0");
  LadderResult out;
  out.table.parameter_name = "lambda";
  std::vector<double> values, errors;
  for (std::size_t k = 0; k < levels; ++k) {
    const double lambda = q.singular_cutoff / std::pow(2.0, static_cast<double>(k));
    const auto r = dK_dd_at_cutoff(d, lambda, q);
    values.push_back(r.value);
    errors.push_back(r.error_estimate);
    out.converged = out.converged && r.converged;
    out.table.rows.push_back({lambda, r.value, r.error_estimate, r.evaluations});
  }
  const auto ex = quad::richardson(values, 2.0, 1, 1);
  // Linear weights of the extrapolant, for propagating the quadrature errors.
  double propagated = 0.0;
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<double> unit(levels, 0.0);
    unit[k] = 1.0;
    propagated += std::abs(quad::richardson(unit, 2.0, 1, 1).value) * errors[k];
  }
  out.limit = ex.value;
  out.residual = ex.residual;
  out.error = ex.residual + propagated;
  // Successive differences must keep one sign and shrink, up to quadrature noise.
  for (std::size_t k = 2; k < levels; ++k) {
    const double d1 = values[k - 1] - values[k - 2];
    const double d2 = values[k] - values[k - 1];
    const double noise = 3.0 * (errors[k] + errors[k - 1] + errors[k - 2]);
    if ((d1 * d2 < 0.0 && std::abs(d2) > noise) || std::abs(d2) > std::abs(d1) + noise) out.monotone = false;
  }
  std::size_t evals = 0;
  for (const auto& row : out.table.rows) evals += row.evals;
  out.table.rows.push_back({0.0, out.limit, out.error, evals});
  out.table.has_limit = true;
  return out;
}

/// dK/dd continuum limit via the lambda ladder.
inline quad::IntegralResult dK_dd(double d, const quad::QuadratureSpec& q, std::size_t levels = 4) {
  const auto ladder = lambda_ladder(d, q, levels);
  quad::IntegralResult out;
  out.value = ladder.limit;
  out.error_estimate = ladder.error;
  out.evaluations = ladder.table.rows.back().evals;
  out.converged = ladder.converged && ladder.monotone;
  return out;
}

/// dK/dd = alpha / d^5, so K(d) = -alpha / (4 d^4) + (d-independent constant).
struct KResult {
  double alpha = 0.0;          // d^5 dK/dd, from the ladder at d = 1
  double k_coefficient = 0.0;  // d^4 K(d) without the self-energy constant = -alpha/4
  double error = 0.0;          // on alpha
  double ladder_residual = 0.0;
  double alpha_direct = 0.0;   // lambda = 0 evaluation of the regularised integrand
  double alpha_direct_error = 0.0;
  bool monotone = true;
  bool converged = true;
  ConvergenceReport extrapolation_table;

  double k_error() const { return error / 4.0; }
  double k_of(double d) const { return k_coefficient / std::pow(d, 4); }
};

inline KResult compute_k(const quad::QuadratureSpec& q, std::size_t levels = 4) {
  constexpr double d_reference = 1.0;
  const auto ladder = lambda_ladder(d_reference, q, levels);
  const auto direct = dK_dd_at_cutoff(d_reference, 0.0, q);
  KResult out;
  out.alpha = ladder.limit;
  out.k_coefficient = -out.alpha / 4.0;
  out.error = ladder.error;
  out.ladder_residual = ladder.residual;
  out.alpha_direct = direct.value;
  out.alpha_direct_error = direct.error_estimate;
  out.monotone = ladder.monotone;
  out.converged = ladder.converged && direct.converged;
  out.extrapolation_table = ladder.table;
  return out;
}

/// K is computed once (at d = 1) and carried to any d by the d^-4 law.
inline KResult k_of_d(double d, const quad::QuadratureSpec& q, std::size_t levels = 4) {
  if (!(d > 0.0)) throw std::domain_error("k_of_d: d must be > 0");
  return compute_k(q, levels);
}

/// W3 = (2/pi) rho^9 N^2 K(d) = (9 / (8 pi^3)) * k_coefficient * rho^3/d^4.
inline EnergyResult w3_cp(const HalfspaceConfig& cfg, const KResult& k) {
  cfg.validate();
  const double rho = cfg.radius();
  const double n = cfg.density();
  const double factor = 2.0 / pi * std::pow(rho, 9) * n * n / std::pow(rho, 3);  // = 9/(8 pi^3)
  auto out = detail::halfspace_result(cfg, factor * k.k_coefficient, factor * k.k_error(), Regime::numeric);
  out.converged = k.converged && k.monotone;
  if (!k.converged) out.flags.emplace_back(flag::not_converged);
  if (!k.monotone) out.flags.emplace_back(flag::ladder_non_monotone);
  return out;
}

inline EnergyResult w3_cp(const HalfspaceConfig& cfg, const quad::QuadratureSpec& q, std::size_t levels = 4) {
  return w3_cp(cfg, compute_k(q, levels));
}

}  // namespace casimir
