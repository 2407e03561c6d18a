#pragma once

// Drude-Sommerfeld response at imaginary frequency and the quasi-static
// polarizability of a metal sphere, in reduced form alpha/(4 pi eps0 rho^3).

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "casimir/core.hpp"

namespace casimir {

struct DrudeMaterial {
  double plasma_frequency;  // omega_p, inverse length
  double damping;           // Gamma, inverse length
  double radius;            // rho

  void validate() const {
    if (!(plasma_frequency > 0.0)) throw std::domain_error("DrudeMaterial: omega_p must be > 0");
    if (!(damping >= 0.0)) throw std::domain_error("DrudeMaterial: gamma must be >= 0");
    if (!(radius > 0.0)) throw std::domain_error("DrudeMaterial: radius must be > 0");
  }
  /// Gamma/omega_p > 0.1: the O(Gamma) non-retarded closed forms are suspect.
  bool series_warning() const { return damping / plasma_frequency > 0.1; }
  double plasma_wavelength() const { return 2.0 * pi / plasma_frequency; }
};

/// omega_p -> infinity limit; reduced polarizability is 1 at every frequency.
struct PerfectConductor {
  double radius;

  void validate() const {
    if (!(radius > 0.0)) throw std::domain_error("PerfectConductor: radius must be > 0");
  }
};

using Material = std::variant<DrudeMaterial, PerfectConductor>;

inline double radius_of(const Material& m) {
  return std::visit([](const auto& x) { return x.radius; }, m);
}
inline void validate(const Material& m) {
  std::visit([](const auto& x) { x.validate(); }, m);
}
inline bool is_perfect_conductor(const Material& m) { return std::holds_alternative<PerfectConductor>(m); }

/// Returned by permittivity_imag_freq where eps(i xi) diverges (xi = 0).
inline constexpr double infinite_permittivity = std::numeric_limits<double>::max();

/// eps(i xi) = 1 + omega_p^2 / (xi^2 + Gamma xi). Saturates to
/// `infinite_permittivity` at xi = 0.
inline double permittivity_imag_freq(const DrudeMaterial& m, double xi) {
  if (!(xi >= 0.0)) throw std::domain_error("permittivity_imag_freq: xi must be >= 0");
  const double denom = xi * xi + m.damping * xi;
  if (denom == 0.0) return infinite_permittivity;
  const double eps = 1.0 + m.plasma_frequency * m.plasma_frequency / denom;
  return std::isfinite(eps) ? eps : infinite_permittivity;
}

/// (eps - 1)/(eps + 2) = omega_p^2 / (3 xi^2 + 3 Gamma xi + omega_p^2).
inline double reduced_polarizability(const DrudeMaterial& m, double xi) {
  if (!(xi >= 0.0)) throw std::domain_error("reduced_polarizability: xi must be >= 0");
  const double wp2 = m.plasma_frequency * m.plasma_frequency;
  return wp2 / (3.0 * xi * xi + 3.0 * m.damping * xi + wp2);
}

inline double reduced_polarizability(const PerfectConductor&, double xi) {
  if (!(xi >= 0.0)) throw std::domain_error("reduced_polarizability: xi must be >= 0");
  return 1.0;
}

inline double reduced_polarizability(const Material& m, double xi) {
  return std::visit([xi](const auto& x) { return reduced_polarizability(x, xi); }, m);
}

// ---------------------------------------------------------------------------
// SI conversion. When physical units are used the reduced length unit is one
// nanometre, so frequencies become omega/c in nm^-1.

namespace units {
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr double metres_per_unit = 1e-9;

inline double from_si_frequency(double omega_per_second) {
  return omega_per_second / speed_of_light * metres_per_unit;
}

namespace detail {
inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Leading number and the (trimmed) unit suffix that follows it.
inline std::pair<double, std::string> split_number(std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{}) throw std::invalid_argument("not a number: '" + t + "'");
  return {v, trim(std::string_view(p, static_cast<std::size_t>(t.data() + t.size() - p)))};
}
}  // namespace detail

/// "2.5" (reduced), "3nm", "1e-9m".
inline double parse_length(std::string_view text) {
  auto [v, unit] = detail::split_number(text);
  if (unit.empty()) return v;
  if (unit == "nm") return v * 1e-9 / metres_per_unit;
  if (unit == "m") return v / metres_per_unit;
  throw std::invalid_argument("unknown length unit '" + unit + "'");
}

/// "0.05" (reduced), "1.38e16 s^-1", "1.38e16/s".
inline double parse_frequency(std::string_view text) {
  auto [v, unit] = detail::split_number(text);
  if (unit.empty()) return v;
  if (unit == "s^-1" || unit == "/s" || unit == "1/s") return from_si_frequency(v);
  throw std::invalid_argument("unknown frequency unit '" + unit + "'");
}
}  // namespace units

/// Gold: omega_p = 1.38e16 s^-1, Gamma = 1.075e14 s^-1, rho = 1 nm.
inline DrudeMaterial gold_preset() {
  return {units::from_si_frequency(1.38e16), units::from_si_frequency(1.075e14), 1.0};
}

/// Parses `name = value` lines (keys: omega_p, gamma, radius,
/// perfect_conductor). '#' starts a comment. Values may carry SI suffixes.
inline Material parse_material_config(std::istream& in) {
  double omega_p = 0.0, gamma = 0.0, radius = 1.0;
  bool perfect = false, have_omega = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = units::detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("material config line " + std::to_string(lineno) + ": expected name = value");
    const std::string key = units::detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = units::detail::trim(std::string_view(t).substr(eq + 1));
    if (key == "omega_p") {
      omega_p = units::parse_frequency(value);
      have_omega = true;
    } else if (key == "gamma") {
      gamma = units::parse_frequency(value);
    } else if (key == "radius") {
      radius = units::parse_length(value);
    } else if (key == "perfect_conductor") {
      if (value == "true" || value == "1" || value == "yes") perfect = true;
      else if (value == "false" || value == "0" || value == "no") perfect = false;
      else throw std::invalid_argument("perfect_conductor must be a boolean, got '" + value + "'");
    } else {
      throw std::invalid_argument("material config: unknown key '" + key + "'");
    }
  }
  Material m = perfect ? Material{PerfectConductor{radius}} : Material{DrudeMaterial{omega_p, gamma, radius}};
  if (!perfect && !have_omega) throw std::invalid_argument("material config: omega_p is required");
  validate(m);
  return m;
}

/// "gold", "perfect", or a path to a config file.
inline Material load_material(const std::string& name_or_path) {
  if (name_or_path == "gold") return gold_preset();
  if (name_or_path == "perfect") return PerfectConductor{1.0};
  std::ifstream in(name_or_path);
  if (!in) throw std::invalid_argument("cannot open material file '" + name_or_path + "'");
  return parse_material_config(in);
}

}  // namespace casimir
