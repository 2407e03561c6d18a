#pragma once

// Shared result types. Everything in this library works in reduced units
// (hbar = c = eps0 = 1): lengths in one arbitrary unit, frequencies in
// inverse lengths.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace casimir {

inline constexpr double pi = std::numbers::pi;

/// Unit-restoration tag of an EnergyResult. The physical energy is
/// coefficient * (the expression named by the tag).
enum class EnergyScale {
  hbar_c_rho6_over_r7,       // two-body, retarded:        hbar c rho^6 / r^7
  hbar_omegap_rho6_over_r6,  // two-body, non-retarded:    hbar omega_p rho^6 / r^6
  hbar_c_rho9_over_l10,      // three-body, retarded:      hbar c rho^9 / L^10, L = mean side
  hbar_omegap_rho9_over_abc3,// three-body, non-retarded:  hbar omega_p rho^9 / (a b c)^3
  hbar_c_rho3_over_d4,       // particle / half-space
  hbar_c_over_d3,            // energy per area, plate / plate
};

struct ScaleInfo {
  std::string_view tag;
  std::string_view text;
  int exponent;  // power of the controlling length
};

constexpr ScaleInfo scale_info(EnergyScale s) {
  switch (s) {
    case EnergyScale::hbar_c_rho6_over_r7: return {"HBAR_C_RHO6_OVER_R7", "hbar*c*rho^6/r^7", -7};
    case EnergyScale::hbar_omegap_rho6_over_r6: return {"HBAR_OMEGAP_RHO6_OVER_R6", "hbar*omega_p*rho^6/r^6", -6};
    case EnergyScale::hbar_c_rho9_over_l10: return {"HBAR_C_RHO9_OVER_L10", "hbar*c*rho^9/L^10", -10};
    case EnergyScale::hbar_omegap_rho9_over_abc3: return {"HBAR_OMEGAP_RHO9_OVER_ABC3", "hbar*omega_p*rho^9/(abc)^3", -9};
    case EnergyScale::hbar_c_rho3_over_d4: return {"HBAR_C_RHO3_OVER_D4", "hbar*c*rho^3/d^4", -4};
    case EnergyScale::hbar_c_over_d3: return {"HBAR_C_OVER_D3", "hbar*c/d^3", -3};
  }
  return {"UNKNOWN", "?", 0};
}

enum class Regime { nonretarded, retarded, full, analytic, numeric };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::nonretarded: return "nonret";
    case Regime::retarded: return "ret";
    case Regime::full: return "full";
    case Regime::analytic: return "analytic";
    case Regime::numeric: return "numeric";
  }
  return "?";
}

/// A dimensionless coefficient together with the scale that restores units.
/// `scale_value` is the scale expression evaluated (in reduced units) for the
/// geometry the result was computed for, so energy() is the reduced-unit energy.
struct EnergyResult {
  double coefficient = 0.0;
  EnergyScale scale = EnergyScale::hbar_c_rho3_over_d4;
  double scale_value = 1.0;
  double error_estimate = 0.0;  // on the coefficient
  bool converged = true;
  Regime regime = Regime::analytic;
  std::vector<std::string> flags;

  double energy() const { return coefficient * scale_value; }
  double energy_error() const { return error_estimate * std::abs(scale_value); }
  bool has_flag(std::string_view f) const {
    for (const auto& x : flags)
      if (x == f) return true;
    return false;
  }
};

namespace flag {
inline constexpr std::string_view series_validity = "series-validity";      // Gamma/omega_p > 0.1
inline constexpr std::string_view outside_regime = "outside-regime";        // asymptotic form used out of range
inline constexpr std::string_view first_order_gamma = "first-order-gamma";  // Taylor form truncated at O(Gamma)
inline constexpr std::string_view not_converged = "not-converged";
inline constexpr std::string_view extent_too_small = "extent-too-small";
inline constexpr std::string_view fd_instability = "fd-step-instability";
inline constexpr std::string_view ladder_non_monotone = "ladder-non-monotone";
inline constexpr std::string_view overlap = "particle-overlap";             // r < 2 rho
}  // namespace flag

struct ConvergenceRow {
  double param = 0.0;
  double value = 0.0;
  double error = 0.0;
  std::size_t evals = 0;
};

/// Rows of (control parameter, value, error); the last row, when
/// `has_limit` is set, is the extrapolated limit.
struct ConvergenceReport {
  std::string parameter_name;
  std::vector<ConvergenceRow> rows;
  bool has_limit = false;
};

}  // namespace casimir
