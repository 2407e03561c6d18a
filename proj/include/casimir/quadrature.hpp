#pragma once

// Deterministic numerical integration.
//
//  * integrate_interval / integrate_semi_infinite: adaptive 15-point
//    Gauss-Kronrod with a global error-ordered interval heap.
//  * integrate_adaptive_nd: adaptive cubature on boxes in 1..4 dimensions
//    using the Genz-Malik degree-7 rule with an embedded degree-5 rule for
//    the error estimate. The worst region is bisected along the axis with
//    the largest fourth divided difference.
//  * integrate_monte_carlo: stratified sampling, used as an independent
//    cross-check of the cubature results.
//
// Every routine is a pure function of (integrand, domain, spec[, seed]):
// the subdivision order is fixed, and parallel evaluation writes into
// pre-assigned slots, so results are bit-identical for any thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "casimir/parallel.hpp"

namespace casimir::quad {

enum class Transform { none, semi_infinite_rational, semi_infinite_exp };

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  std::size_t max_subdivisions = 100000;
  /// Radius of the excluded ball around a singular locus (interparticle
  /// cutoff). For ladder studies this is the first rung.
  double singular_cutoff = 0.25;
  Transform transform = Transform::semi_infinite_rational;

  void validate() const {
    if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
    if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
    if (max_subdivisions == 0) throw std::invalid_argument("QuadratureSpec: max_subdivisions must be > 0");
    if (!(singular_cutoff >= 0.0)) throw std::invalid_argument("QuadratureSpec: singular_cutoff must be >= 0");
  }
  double tolerance_for(double value) const { return std::max(abs_tol, rel_tol * std::abs(value)); }
};

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Maps t in [0,1) onto [lower, inf): returns {x, dx/dt}.
struct MappedPoint {
  double x;
  double jacobian;
};

inline MappedPoint map_semi_infinite(double t, double lower, double scale, Transform tr) {
  // t rounded onto 1 is the point at infinity; its weight is zero
  if (tr != Transform::none && !(t < 1.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  switch (tr) {
    case Transform::semi_infinite_rational: {
      const double u = 1.0 - t;
      return {lower + scale * t / u, scale / (u * u)};
    }
    case Transform::semi_infinite_exp: {
      const double u = 1.0 - t;
      return {lower - scale * std::log(u), scale / u};
    }
    case Transform::none: break;
  }
  throw std::invalid_argument("map_semi_infinite: transform must not be NONE");
}

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (abscissae > 0 and centre).
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
};

template <class R>
void resum(const std::vector<R>& regions, double& total, double& error) {
  total = 0.0;
  error = 0.0;
  for (const auto& r : regions) {
    total += r.value;
    error += r.error;
  }
}

struct ByError {
  template <class R>
  bool operator()(const R& x, const R& y) const { return x.error < y.error; }
};

// QUADPACK-style error heuristic on top of |K15 - G7|.
template <class F>
Segment gauss_kronrod15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double resk = fc * kronrod_w[7];
  double resg = fc * gauss_w[3];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{}, f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_x[j];
    f1[j] = f(centre - dx);
    f2[j] = f(centre + dx);
    resk += kronrod_w[j] * (f1[j] + f2[j]);
    resabs += kronrod_w[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += gauss_w[j / 2] * (f1[j] + f2[j]);
  }
  const double mean = 0.5 * resk;
  double resasc = kronrod_w[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) resasc += kronrod_w[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  const double ah = std::abs(half);
  resk *= half;
  resabs *= ah;
  resasc *= ah;
  double err = std::abs((resk - resg * half));
  if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
  return {a, b, resk, err};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod on a finite interval [a, b].
template <class F>
IntegralResult integrate_interval(F&& f, double a, double b, const QuadratureSpec& q) {
  q.validate();
  IntegralResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::vector<detail::Segment> heap;
  const detail::ByError cmp;
  auto first = detail::gauss_kronrod15(f, a, b);
  out.evaluations = 15;
  heap.push_back(first);
  double total = first.value, error = first.error;
  std::size_t splits = 0;
  while (error > q.tolerance_for(total) && splits < q.max_subdivisions) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const auto worst = heap.back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      std::push_heap(heap.begin(), heap.end(), cmp);  // interval can no longer be bisected
      break;
    }
    heap.pop_back();
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    out.evaluations += 30;
    ++splits;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), cmp);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), cmp);
    if (splits % 128 == 0) detail::resum(heap, total, error);  // stop drift in the running totals
  }
  detail::resum(heap, total, error);
  out.value = total;
  out.error_estimate = error;
  out.converged = error <= q.tolerance_for(total);
  return out;
}

/// Integral of f over [lower, inf) through the transform chosen in the spec;
/// `scale` sets the length over which the map stretches [0,1) (pick it near
/// the decay length of f).
template <class F>
IntegralResult integrate_semi_infinite(F&& f, const QuadratureSpec& q, double scale = 1.0, double lower = 0.0) {
  if (q.transform == Transform::none)
    throw std::invalid_argument("integrate_semi_infinite: transform must not be NONE");
  if (!(scale > 0.0)) throw std::invalid_argument("integrate_semi_infinite: scale must be > 0");
  auto mapped = [&](double t) {
    const auto p = map_semi_infinite(t, lower, scale, q.transform);
    return p.jacobian == 0.0 ? 0.0 : f(p.x) * p.jacobian;
  };
  return integrate_interval(mapped, 0.0, 1.0, q);
}

namespace detail {

template <std::size_t Dim>
struct Box {
  std::array<double, Dim> centre;
  std::array<double, Dim> half;
  double value = 0.0;
  double error = 0.0;
  std::size_t split = 0;
};

// Genz-Malik degree 7/5 pair, weights normalised to unit volume.
template <std::size_t Dim>
struct GenzMalik {
  static_assert(Dim >= 2 && Dim <= 4, "Genz-Malik rule is used for 2..4 dimensions");
  static constexpr double n = static_cast<double>(Dim);
  static constexpr std::size_t points = (1u << Dim) + 2 * Dim * Dim + 2 * Dim + 1;
  static inline const double l2 = std::sqrt(9.0 / 70.0);
  static inline const double l4 = std::sqrt(9.0 / 10.0);
  static inline const double l5 = std::sqrt(9.0 / 19.0);
  static constexpr double w1 = (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0;
  static constexpr double w2 = 980.0 / 6561.0;
  static constexpr double w3 = (1820.0 - 400.0 * n) / 19683.0;
  static constexpr double w4 = 200.0 / 19683.0;
  static constexpr double w5 = 6859.0 / 19683.0 / static_cast<double>(1u << Dim);
  static constexpr double e1 = (729.0 - 950.0 * n + 50.0 * n * n) / 729.0;
  static constexpr double e2 = 245.0 / 486.0;
  static constexpr double e3 = (265.0 - 100.0 * n) / 1458.0;
  static constexpr double e4 = 25.0 / 729.0;

  template <class F>
  static void apply(F& f, Box<Dim>& box) {
    double volume = 1.0;
    for (std::size_t i = 0; i < Dim; ++i) volume *= 2.0 * box.half[i];

    std::array<double, Dim> p = box.centre;
    const double f0 = f(std::as_const(p));
    double sum2 = 0.0, sum3 = 0.0, sum4 = 0.0, sum5 = 0.0;
    std::array<double, Dim> diff{};
    constexpr double ratio = (9.0 / 70.0) / (9.0 / 10.0);
    for (std::size_t i = 0; i < Dim; ++i) {
      p[i] = box.centre[i] - l2 * box.half[i];
      const double a = f(std::as_const(p));
      p[i] = box.centre[i] + l2 * box.half[i];
      const double b = f(std::as_const(p));
      p[i] = box.centre[i] - l4 * box.half[i];
      const double c = f(std::as_const(p));
      p[i] = box.centre[i] + l4 * box.half[i];
      const double d = f(std::as_const(p));
      p[i] = box.centre[i];
      sum2 += a + b;
      sum3 += c + d;
      diff[i] = std::abs((a + b - 2.0 * f0) - ratio * (c + d - 2.0 * f0));
    }
    for (std::size_t i = 0; i < Dim; ++i) {
      for (std::size_t j = i + 1; j < Dim; ++j) {
        for (int si : {-1, 1}) {
          for (int sj : {-1, 1}) {
            p[i] = box.centre[i] + si * l4 * box.half[i];
            p[j] = box.centre[j] + sj * l4 * box.half[j];
            sum4 += f(std::as_const(p));
          }
        }
        p[i] = box.centre[i];
        p[j] = box.centre[j];
      }
    }
    for (unsigned mask = 0; mask < (1u << Dim); ++mask) {
      for (std::size_t i = 0; i < Dim; ++i)
        p[i] = box.centre[i] + ((mask >> i) & 1u ? l5 : -l5) * box.half[i];
      sum5 += f(std::as_const(p));
    }
    const double r7 = volume * (w1 * f0 + w2 * sum2 + w3 * sum3 + w4 * sum4 + w5 * sum5);
    const double r5 = volume * (e1 * f0 + e2 * sum2 + e3 * sum3 + e4 * sum4);
    box.value = r7;
    box.error = std::abs(r7 - r5);

    // Split where the fourth difference is largest; near-ties go to the widest side.
    std::size_t best = 0;
    double dmax = diff[0];
    for (std::size_t i = 1; i < Dim; ++i) {
      if (diff[i] > dmax * (1.0 + 1e-10) + 1e-300) {
        dmax = diff[i];
        best = i;
      } else if (std::abs(diff[i] - dmax) <= 1e-10 * dmax + 1e-300 && box.half[i] > box.half[best]) {
        best = i;
      }
    }
    box.split = best;
  }
};

}  // namespace detail

/// Adaptive cubature over the box [lower, upper] in Dim (1..4) dimensions.
/// f is called with a const std::array<double, Dim>&.
template <std::size_t Dim, class F>
IntegralResult integrate_adaptive_nd(F&& f, const std::array<double, Dim>& lower,
                                     const std::array<double, Dim>& upper, const QuadratureSpec& q) {
  static_assert(Dim >= 1 && Dim <= 4, "integrate_adaptive_nd supports 1 to 4 dimensions");
  q.validate();
  if constexpr (Dim == 1) {
    auto g = [&](double x) { return f(std::array<double, 1>{x}); };
    return integrate_interval(g, lower[0], upper[0], q);
  } else {
    using Box = detail::Box<Dim>;
    using Rule = detail::GenzMalik<Dim>;
    IntegralResult out;
    Box root;
    for (std::size_t i = 0; i < Dim; ++i) {
      root.centre[i] = 0.5 * (lower[i] + upper[i]);
      root.half[i] = 0.5 * (upper[i] - lower[i]);
      if (!(upper[i] >= lower[i])) throw std::invalid_argument("integrate_adaptive_nd: empty box");
    }
    Rule::apply(f, root);
    out.evaluations = Rule::points;

    std::vector<Box> heap{root};
    const detail::ByError cmp;
    double total = root.value, error = root.error;
    std::size_t splits = 0, rounds = 0;
    constexpr std::size_t max_batch = 16;
    std::vector<Box> popped, children;
    while (error > q.tolerance_for(total) && splits < q.max_subdivisions) {
      // Pop the worst regions until what is left would meet the tolerance.
      popped.clear();
      double remaining = error;
      while (!heap.empty() && popped.size() < max_batch && splits + popped.size() < q.max_subdivisions) {
        std::pop_heap(heap.begin(), heap.end(), cmp);
        popped.push_back(heap.back());
        heap.pop_back();
        remaining -= popped.back().error;
        if (remaining <= q.tolerance_for(total)) break;
      }
      children.assign(2 * popped.size(), Box{});
      for (std::size_t k = 0; k < popped.size(); ++k) {
        const Box& parent = popped[k];
        const std::size_t ax = parent.split;
        for (int side = 0; side < 2; ++side) {
          Box& child = children[2 * k + side];
          child.centre = parent.centre;
          child.half = parent.half;
          child.half[ax] = 0.5 * parent.half[ax];
          child.centre[ax] = parent.centre[ax] + (side == 0 ? -child.half[ax] : child.half[ax]);
        }
      }
      parallel_for(children.size(), [&](std::size_t i) { Rule::apply(f, children[i]); }, 4);
      for (std::size_t k = 0; k < popped.size(); ++k) {
        total -= popped[k].value;
        error -= popped[k].error;
      }
      for (const auto& c : children) {
        total += c.value;
        error += c.error;
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
      splits += popped.size();
      out.evaluations += children.size() * Rule::points;
      if (++rounds % 64 == 0) detail::resum(heap, total, error);
    }
    detail::resum(heap, total, error);
    out.value = total;
    out.error_estimate = error;
    out.converged = error <= q.tolerance_for(total);
    return out;
  }
}

/// Stratified Monte Carlo over [lower, upper]. The domain is cut into k^Dim
/// equal strata (k as large as allows >= 2 samples per stratum); the
/// standard error comes from the within-stratum sample variances. The
/// stream is std::mt19937_64(seed) with 53-bit mantissa extraction, so a
/// fixed seed reproduces bit-identical results on any conforming platform.
template <std::size_t Dim, class F>
IntegralResult integrate_monte_carlo(F&& f, const std::array<double, Dim>& lower,
                                     const std::array<double, Dim>& upper, std::size_t n_samples,
                                     std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("integrate_monte_carlo: n_samples must be > 0");
  std::size_t k = 1;
  while (true) {
    std::size_t next = 1;
    for (std::size_t i = 0; i < Dim; ++i) next *= (k + 1);
    if (2 * next > n_samples) break;
    ++k;
  }
  std::size_t strata = 1;
  for (std::size_t i = 0; i < Dim; ++i) strata *= k;
  const std::size_t per = std::max<std::size_t>(1, n_samples / strata);

  std::array<double, Dim> width{};
  double cell_volume = 1.0;
  for (std::size_t i = 0; i < Dim; ++i) {
    width[i] = (upper[i] - lower[i]) / static_cast<double>(k);
    cell_volume *= width[i];
  }
  std::mt19937_64 engine(seed);
  auto uniform = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };

  IntegralResult out;
  double variance = 0.0;
  std::array<double, Dim> x{};
  for (std::size_t s = 0; s < strata; ++s) {
    std::array<std::size_t, Dim> idx{};
    std::size_t rem = s;
    for (std::size_t i = 0; i < Dim; ++i) {
      idx[i] = rem % k;
      rem /= k;
    }
    double mean = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < per; ++j) {
      for (std::size_t i = 0; i < Dim; ++i)
        x[i] = lower[i] + (static_cast<double>(idx[i]) + uniform()) * width[i];
      const double v = f(std::as_const(x));
      const double delta = v - mean;
      mean += delta / static_cast<double>(j + 1);
      m2 += delta * (v - mean);
    }
    out.value += cell_volume * mean;
    if (per > 1) variance += cell_volume * cell_volume * (m2 / static_cast<double>(per - 1)) / static_cast<double>(per);
  }
  out.evaluations = strata * per;
  out.error_estimate = std::sqrt(variance);
  out.converged = true;
  return out;
}

/// Richardson elimination for a sequence computed on a geometric ladder
/// h_k = h_0 / ratio^k, assuming value(h) = limit + c1 h^p + c2 h^(p+step) + ...
struct Extrapolation {
  double value = 0.0;
  double residual = 0.0;  // |last diagonal - previous diagonal|
  std::vector<std::vector<double>> tableau;
};

inline Extrapolation richardson(std::span<const double> sequence, double ratio, int first_power = 1,
                                int power_step = 1) {
  if (sequence.empty()) throw std::invalid_argument("richardson: empty sequence");
  Extrapolation ex;
  const std::size_t n = sequence.size();
  ex.tableau.assign(n, {});
  for (std::size_t k = 0; k < n; ++k) {
    ex.tableau[k].push_back(sequence[k]);
    for (std::size_t j = 1; j <= k; ++j) {
      const double factor = std::pow(ratio, first_power + static_cast<int>(j - 1) * power_step) - 1.0;
      const double prev = ex.tableau[k][j - 1];
      ex.tableau[k].push_back(prev + (prev - ex.tableau[k - 1][j - 1]) / factor);
    }
  }
  ex.value = ex.tableau[n - 1][n - 1];
  ex.residual = n > 1 ? std::abs(ex.value - ex.tableau[n - 2][n - 2]) : 0.0;
  return ex;
}

}  // namespace casimir::quad
