#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "casimir/halfspace.hpp"
#include "casimir/macroscopic.hpp"

using namespace casimir;

namespace {
constexpr double w2_exact = -69.0 / (160.0 * pi);
// -4 * (-111/(448 pi)) * (8 pi^3 / 9): the dK/dd constant implied by the
// macroscopic three-body coefficient through W3 = (9/(8 pi^3)) (-alpha/4).
const double alpha_exact = -4.0 * (111.0 / (448.0 * pi)) * 8.0 * pi * pi * pi / 9.0;

quad::QuadratureSpec spec(double rel_tol) {
  quad::QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.max_subdivisions = 2000000;
  return q;
}

const KResult& shared_k() {
  static const KResult k = compute_k(spec(1e-4), 4);
  return k;
}
}  // namespace

TEST(W2Analytic, Coefficient) {
  const auto w = w2_cp_analytic({});
  EXPECT_DOUBLE_EQ(w.coefficient, w2_exact);
  EXPECT_NEAR(w.coefficient, -0.137271, 1e-6);
  EXPECT_EQ(w.scale, EnergyScale::hbar_c_rho3_over_d4);
  EXPECT_LT(w.energy(), 0.0);
}

TEST(W2Analytic, DistanceScaling) {
  const auto near = w2_cp_analytic({1.0, {1.0}});
  const auto far = w2_cp_analytic({2.0, {1.0}});
  EXPECT_NEAR(far.energy() * 16.0, near.energy(), 1e-15);
  EXPECT_THROW(w2_cp_analytic({0.0, {1.0}}), std::domain_error);
}

TEST(HalfspaceConfig, PackingDensity) {
  for (double rho : {0.5, 1.0, 3.0}) {
    const HalfspaceConfig cfg{1.0, {rho}};
    EXPECT_NEAR(cfg.density() * 4.0 * pi * rho * rho * rho / 3.0, 1.0, 1e-15);
  }
}

TEST(W2Numeric, MatchesClosedForm) {
  const auto w = w2_cp_numeric({}, spec(1e-7));
  EXPECT_TRUE(w.converged);
  EXPECT_NEAR(w.coefficient, w2_exact, 1e-6 * std::abs(w2_exact));
}

TEST(W2Numeric, EnergyScalesAsInverseFourthPower) {
  const auto q = spec(1e-9);
  const double e1 = w2_cp_numeric({1.0, {1.0}}, q).energy();
  const double e3 = w2_cp_numeric({3.0, {1.0}}, q).energy();
  EXPECT_NEAR(e3 * 81.0, e1, 1e-8 * std::abs(e1));
  const double rho2 = w2_cp_numeric({1.0, {2.0}}, q).energy();
  EXPECT_NEAR(rho2, 8.0 * e1, 1e-8 * std::abs(rho2));
}

TEST(W2Numeric, ErrorShrinksWithTolerance) {
  double prev = INFINITY;
  for (double tol : {1e-3, 1e-6, 1e-9}) {
    const auto w = w2_cp_numeric({}, spec(tol));
    EXPECT_LT(w.error_estimate, prev);
    prev = w.error_estimate;
  }
}

TEST(Lattice, SingleSiteEqualsPairEnergy) {
  const std::vector<LatticeSite> one{{0.0, 0.0, 2.5, 1.0}};
  EXPECT_NEAR(pair_sum_retarded(one, 1.0), u2_retarded(1.0, 2.5).energy(), 1e-15);
  const std::vector<LatticeSite> two{{0.0, 0.0, 2.5, 1.0}, {3.0, 4.0, 0.0, 0.5}};
  EXPECT_NEAR(pair_sum_retarded(two, 1.0), u2_retarded(1.0, 2.5).energy() + 0.5 * u2_retarded(1.0, 5.0).energy(), 1e-15);
}

TEST(Lattice, ConvergesToContinuum) {
  const HalfspaceConfig cfg{};
  const auto coarse = lattice_oracle_w2(cfg, 1.0 / 8.0, 40.0);
  const auto fine = lattice_oracle_w2(cfg, 1.0 / 16.0, 40.0);
  const double err_coarse = std::abs(coarse.coefficient / w2_exact - 1.0);
  const double err_fine = std::abs(fine.coefficient / w2_exact - 1.0);
  EXPECT_LT(err_coarse, 0.05);
  EXPECT_LT(err_fine, err_coarse);
  // Midpoint-rule error is second order: (5/6)(lambda/d)^2.
  EXPECT_NEAR(err_coarse / err_fine, 4.0, 0.3);
  EXPECT_FALSE(coarse.has_flag(flag::extent_too_small));
}

TEST(Lattice, TailCorrectionAndWarning) {
  const HalfspaceConfig cfg{};
  const auto small = lattice_oracle_w2(cfg, 0.25, 1.3);
  EXPECT_TRUE(small.has_flag(flag::extent_too_small));
  // With the analytic tail the truncation radius barely matters.
  const auto r10 = lattice_oracle_w2(cfg, 0.25, 10.0);
  const auto r20 = lattice_oracle_w2(cfg, 0.25, 20.0);
  EXPECT_NEAR(r10.coefficient, r20.coefficient, 1e-4 * std::abs(r20.coefficient));
  EXPECT_THROW(lattice_oracle_w2(cfg, 0.0, 10.0), std::domain_error);
  EXPECT_THROW(lattice_oracle_w2(cfg, 0.1, 0.5), std::domain_error);
}

// The B-centred production chart and the C-centred chart with a hard cutoff
// are independent parameterisations of the same integral.
TEST(DKdd, ChartsAgreeAtFiniteCutoff) {
  const double lambda = 0.5;
  const auto production = dK_dd_at_cutoff(1.0, lambda, spec(1e-6));
  const auto polar = dK_dd_polar(1.0, lambda, spec(1e-2));
  EXPECT_NEAR(polar.value, production.value, 3.0 * (polar.error_estimate + production.error_estimate));

  const PolarChartUnitCube f{1.0, lambda};
  const auto mc = quad::integrate_monte_carlo<4>(f, {0, 0, 0, 0}, {1, 1, 1, 1}, 400000, 17);
  EXPECT_NEAR(mc.value, production.value, 3.0 * std::hypot(mc.error_estimate, production.error_estimate));
}

TEST(DKdd, AzimuthIdentityOnPhysicalIntegrand) {
  // integral of g(phi_A - phi_B) over both azimuths = 2 pi integral g
  //                                                 = 2 integral phi g(phi)
  const auto q = spec(1e-11);
  for (const auto& p : std::vector<std::array<double, 3>>{{0.3, 1.4, 0.5}, {1.2, 3.0, 0.2}, {0.7, 2.2, 1.1}}) {
    auto g = [&](double phi) { return polar_chart_integrand(1.0, 0.05, p[0], p[1], phi, p[2]); };
    const double plain = quad::integrate_interval(g, 0.0, 2.0 * pi, q).value;
    const double weighted = quad::integrate_interval([&](double phi) { return phi * g(phi); }, 0.0, 2.0 * pi, q).value;
    EXPECT_NEAR(2.0 * pi * plain, 2.0 * weighted, 1e-8 * std::abs(2.0 * pi * plain));
  }
}

TEST(DKdd, RegularisedIntegrandIsBounded) {
  const detail::BCentredIntegrand f{1.0, 0.0, 1.0, quad::Transform::semi_infinite_rational};
  for (double c : {1e-2, 1e-4, 1e-6, 1e-8})
    for (double mu : {0.0, 0.4, 0.9})
      for (double psi : {0.0, 1.0, 3.0}) EXPECT_LT(std::abs(f.regularised(0.7, c, mu, psi) * c * c), 1.0);
}

TEST(DKdd, LadderApproachesContinuum) {
  const auto& k = shared_k();
  const auto& rows = k.extrapolation_table.rows;
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_TRUE(k.extrapolation_table.has_limit);
  EXPECT_EQ(rows.back().param, 0.0);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    EXPECT_LT(rows[i].value, rows[i - 1].value);  // monotone in lambda
    EXPECT_DOUBLE_EQ(rows[i].param, 0.5 * rows[i - 1].param);
  }
  EXPECT_TRUE(k.monotone);
  EXPECT_TRUE(k.converged);
  EXPECT_LT(k.ladder_residual, 0.02 * std::abs(k.alpha));
  EXPECT_NEAR(k.alpha, k.alpha_direct, k.error + 3.0 * k.alpha_direct_error);
}

TEST(DKdd, AlphaConstant) {
  const auto& k = shared_k();
  EXPECT_GE(k.alpha, -8.8);
  EXPECT_LE(k.alpha, -8.2);
  EXPECT_NEAR(k.alpha, alpha_exact, 0.03 * std::abs(alpha_exact));
  EXPECT_NEAR(k.alpha_direct, alpha_exact, 1e-3 * std::abs(alpha_exact));
}

TEST(DKdd, ScalingLaw) {
  const auto q = spec(1e-4);
  std::vector<double> scaled, err;
  for (double d : {0.5, 1.0, 2.0, 4.0}) {
    const auto r = dK_dd_at_cutoff(d, 0.0, q);
    scaled.push_back(r.value * std::pow(d, 5));
    err.push_back(r.error_estimate * std::pow(d, 5));
  }
  for (std::size_t i = 1; i < scaled.size(); ++i)
    EXPECT_NEAR(scaled[i], scaled[0], 3.0 * (err[i] + err[0]));
  const auto r1 = dK_dd(1.0, q, 4), r2 = dK_dd(2.0, q, 4);
  EXPECT_NEAR(r2.value / r1.value, 1.0 / 32.0, 3.0 * (r1.error_estimate / std::abs(r1.value) + r2.error_estimate / std::abs(r2.value)) / 32.0);
}

TEST(DKdd, Validation) {
  EXPECT_THROW(dK_dd_at_cutoff(0.0, 0.1, spec(1e-3)), std::domain_error);
  EXPECT_THROW(dK_dd_at_cutoff(1.0, -0.1, spec(1e-3)), std::domain_error);
  EXPECT_THROW(dK_dd_polar(1.0, 0.0, spec(1e-3)), std::domain_error);
  EXPECT_THROW(lambda_ladder(1.0, spec(1e-3), 0), std::invalid_argument);
}

TEST(K, CoefficientAndDistanceLaw) {
  const auto& k = shared_k();
  EXPECT_DOUBLE_EQ(k.k_coefficient, -k.alpha / 4.0);
  EXPECT_NEAR(k.k_coefficient, 2.1, 0.1);
  EXPECT_NEAR(k.k_coefficient, -alpha_exact / 4.0, 0.03 * alpha_exact / -4.0);
  EXPECT_NEAR(k.k_of(2.0), k.k_of(1.0) / 16.0, 1e-15);
}

TEST(W3, CoefficientSignAndRatio) {
  const auto& k = shared_k();
  const auto w3 = w3_cp({}, k);
  EXPECT_GT(w3.coefficient, 0.0);
  EXPECT_GE(w3.coefficient, 0.072);
  EXPECT_LE(w3.coefficient, 0.080);
  EXPECT_NEAR(w3.coefficient, exact_w3_cp_coefficient, 0.03 * exact_w3_cp_coefficient);
  EXPECT_NEAR(w3.coefficient, 9.0 / (8.0 * pi * pi * pi) * k.k_coefficient, 1e-15);
  const double ratio = w3.coefficient / std::abs(w2_cp_analytic({}).coefficient);
  EXPECT_GE(ratio, 0.5);
  EXPECT_LE(ratio, 0.65);
  EXPECT_TRUE(w3.converged);
}

TEST(W3, IndependentOfRadiusOnReducedScale) {
  const auto& k = shared_k();
  const auto a = w3_cp({1.0, {1.0}}, k);
  const auto b = w3_cp({2.0, {0.5}}, k);
  EXPECT_NEAR(a.coefficient, b.coefficient, 1e-14);
  EXPECT_NEAR(b.energy(), a.energy() * 0.125 / 16.0, 1e-15);
}
