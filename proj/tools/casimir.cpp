// casimir: command-line front-end for the dispersion-energy library.
//
// Exit codes: 0 ok, 1 usage / invalid input, 2 numerical non-convergence,
// 3 replay mismatch.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "casimir/casimir.hpp"

namespace {

using namespace casimir;
using json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numeric = 2;
constexpr int exit_replay_mismatch = 3;

// ---------------------------------------------------------------------------
// Locale-independent number formatting

std::string format_number(double v, int precision = -1) {
  char buf[64];
  auto res = precision < 0 ? std::to_chars(buf, buf + sizeof buf, v)
                           : std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// What a command produces

struct NamedResult {
  std::string name;
  EnergyResult result;
};

struct Outcome {
  std::vector<NamedResult> results;
  std::vector<std::pair<std::string, double>> diagnostics;
  std::optional<ConvergenceReport> report;
  std::string study;
  bool numeric_ok = true;  // false -> exit 2
};

enum class Format { table, csv, json_doc };

json result_json(const NamedResult& r) {
  json j;
  j["name"] = r.name;
  j["coefficient"] = r.result.coefficient;
  j["scale"] = std::string(scale_info(r.result.scale).tag);
  j["error"] = r.result.error_estimate;
  j["regime"] = std::string(to_string(r.result.regime));
  j["converged"] = r.result.converged;
  j["energy"] = r.result.energy();
  j["flags"] = r.result.flags;
  return j;
}

json report_json(const ConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& row : rep.rows)
    rows.push_back({{"param", row.param}, {"value", row.value}, {"error", row.error}, {"evals", row.evals}});
  return {{"parameter", rep.parameter_name}, {"has_limit", rep.has_limit}, {"rows", rows}};
}

json outcome_json(const Outcome& o) {
  json j;
  json results = json::array();
  for (const auto& r : o.results) results.push_back(result_json(r));
  j["results"] = results;
  if (!o.diagnostics.empty()) {
    json d = json::object();
    for (const auto& [k, v] : o.diagnostics) d[k] = v;
    j["diagnostics"] = d;
  }
  if (o.report) {
    j["study"] = o.study;
    j["report"] = report_json(*o.report);
  }
  return j;
}

std::string join_flags(const std::vector<std::string>& flags, char sep) {
  std::string s;
  for (const auto& f : flags) {
    if (!s.empty()) s += sep;
    s += f;
  }
  return s.empty() ? "-" : s;
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    out << line << '\n';
  }
}

void write_outcome(std::ostream& out, const Outcome& o, Format fmt) {
  if (fmt == Format::json_doc) {
    out << outcome_json(o).dump(2) << '\n';
    return;
  }
  if (o.report) {
    if (fmt == Format::csv) {
      out << "param,value,error,evals\n";
      for (const auto& r : o.report->rows)
        out << format_number(r.param) << ',' << format_number(r.value) << ',' << format_number(r.error) << ','
            << r.evals << '\n';
    } else {
      std::vector<std::vector<std::string>> rows{{o.report->parameter_name, "value", "error", "evals"}};
      for (std::size_t i = 0; i < o.report->rows.size(); ++i) {
        const auto& r = o.report->rows[i];
        const bool limit = o.report->has_limit && i + 1 == o.report->rows.size();
        rows.push_back({limit ? "limit" : format_number(r.param, 8), format_number(r.value, 8),
                        format_number(r.error, 3), std::to_string(r.evals)});
      }
      print_table(out, rows);
    }
    return;
  }
  if (fmt == Format::csv) {
    out << "name,coefficient,error,scale,regime,converged,energy,flags\n";
    for (const auto& r : o.results)
      out << r.name << ',' << format_number(r.result.coefficient) << ',' << format_number(r.result.error_estimate)
          << ',' << scale_info(r.result.scale).tag << ',' << to_string(r.result.regime) << ','
          << (r.result.converged ? "true" : "false") << ',' << format_number(r.result.energy()) << ','
          << join_flags(r.result.flags, ';') << '\n';
    if (!o.diagnostics.empty()) {
      out << "\ndiagnostic,value\n";
      for (const auto& [k, v] : o.diagnostics) out << k << ',' << format_number(v) << '\n';
    }
    return;
  }
  std::vector<std::vector<std::string>> rows{{"quantity", "coefficient", "error", "scale", "regime", "converged", "flags"}};
  for (const auto& r : o.results)
    rows.push_back({r.name, format_number(r.result.coefficient, 6), format_number(r.result.error_estimate, 2),
                    std::string(scale_info(r.result.scale).text), std::string(to_string(r.result.regime)),
                    r.result.converged ? "yes" : "no", join_flags(r.result.flags, ',')});
  print_table(out, rows);
  if (!o.diagnostics.empty()) {
    out << '\n';
    std::vector<std::vector<std::string>> diag;
    for (const auto& [k, v] : o.diagnostics) diag.push_back({k, format_number(v, 6)});
    print_table(out, diag);
  }
}

// ---------------------------------------------------------------------------
// Options

struct Common {
  std::string format = "table";
  double tol = 1e-9;
  double cube_tol = 1e-4;
  std::size_t max_subdivisions = 2000000;
  std::string transform = "rational";
  std::string manifest = "casimir-manifest.json";
  unsigned threads = 0;
};

struct Options {
  Common common;
  // pair / triplet
  std::string material = "perfect";
  std::string radius;  // optional override
  std::string r;
  std::string regime = "auto";
  std::vector<std::string> sides;
  // cp / casimir
  std::string d = "1";
  std::string order;
  std::string method = "analytic";
  std::string w3_source = "exact";
  std::size_t levels = 4;
  std::string cutoff = "0.25";
  // macro
  std::string epsilon = "inf";
  // convergence
  std::string study;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

quad::QuadratureSpec make_spec(const Common& c, double rel_tol) {
  quad::QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.max_subdivisions = c.max_subdivisions;
  q.transform = c.transform == "exp" ? quad::Transform::semi_infinite_exp : quad::Transform::semi_infinite_rational;
  return q;
}

double positive_length(const std::string& text, const char* what) {
  double v = 0.0;
  try {
    v = units::parse_length(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string(what) + ": " + e.what());
  }
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be a positive length");
  return v;
}

Material load_with_radius(const Options& o) {
  Material m;
  try {
    m = load_material(o.material);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--material: ") + e.what());
  }
  if (!o.radius.empty()) {
    const double rho = positive_length(o.radius, "--radius");
    std::visit([rho](auto& x) { x.radius = rho; }, m);
  }
  return m;
}

RegimeChoice parse_regime(const std::string& s) {
  if (s == "auto") return RegimeChoice::automatic;
  if (s == "nonret") return RegimeChoice::nonretarded;
  if (s == "ret") return RegimeChoice::retarded;
  return RegimeChoice::full;
}

void check(Outcome& o) {
  for (const auto& r : o.results)
    if (!r.result.converged || r.result.has_flag(flag::fd_instability)) o.numeric_ok = false;
}

// ---------------------------------------------------------------------------
// Commands

Outcome cmd_pair(const Options& o) {
  const Material m = load_with_radius(o);
  const double r = positive_length(o.r, "--r");
  Outcome out;
  try {
    out.results.push_back({"pair", pair_energy(m, r, parse_regime(o.regime), make_spec(o.common, o.common.tol))});
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out.diagnostics.push_back({"energy", out.results[0].result.energy()});
  check(out);
  return out;
}

Outcome cmd_triplet(const Options& o) {
  const Material m = load_with_radius(o);
  if (o.sides.size() != 3) throw UsageError("--sides expects three comma-separated lengths");
  std::array<double, 3> s{};
  for (std::size_t i = 0; i < 3; ++i) s[i] = positive_length(o.sides[i], "--sides");
  std::optional<Triangle> t;
  try {
    t.emplace(s[0], s[1], s[2]);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--sides: ") + e.what());
  }
  Outcome out;
  try {
    out.results.push_back({"triplet", triplet_energy(m, *t, parse_regime(o.regime), make_spec(o.common, o.common.tol))});
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out.diagnostics.push_back({"energy", out.results[0].result.energy()});
  out.diagnostics.push_back({"angular_factor", 1.0 + 3.0 * t->cos_a() * t->cos_b() * t->cos_c()});
  check(out);
  return out;
}

KResult run_k(const Options& o, double cutoff) {
  auto q = make_spec(o.common, o.common.cube_tol);
  q.singular_cutoff = cutoff;
  return compute_k(q, o.levels);
}

Outcome cmd_cp(const Options& o) {
  const double d = positive_length(o.d, "--d");
  const double rho = o.radius.empty() ? 1.0 : positive_length(o.radius, "--radius");
  const HalfspaceConfig cfg{d, {rho}};
  Outcome out;
  const bool two = o.order == "2" || o.order == "both";
  const bool three = o.order == "3" || o.order == "both";
  EnergyResult w2, w3;
  if (two) {
    w2 = o.method == "numeric" ? w2_cp_numeric(cfg, make_spec(o.common, o.common.tol)) : w2_cp_analytic(cfg);
    out.results.push_back({"w2_cp", w2});
  }
  if (three) {
    const auto k = run_k(o, positive_length(o.cutoff, "--cutoff"));
    w3 = w3_cp(cfg, k);
    out.results.push_back({"w3_cp", w3});
    out.diagnostics.push_back({"alpha", k.alpha});
    out.diagnostics.push_back({"alpha_error", k.error});
    out.diagnostics.push_back({"k_coefficient", k.k_coefficient});
    out.diagnostics.push_back({"ladder_residual", k.ladder_residual});
  }
  if (two && three) {
    const auto total = w_total({infinite_epsilon, rho, d}, make_spec(o.common, o.common.tol));
    out.results.push_back({"w_total", total});
    out.diagnostics.push_back({"pairwise_fraction", w2.coefficient / total.coefficient});
    out.diagnostics.push_back({"w3_w2_ratio", w3.coefficient / std::abs(w2.coefficient)});
  }
  check(out);
  return out;
}

Outcome cmd_casimir(const Options& o) {
  const double d = positive_length(o.d, "--d");
  const double rho = o.radius.empty() ? 1.0 : positive_length(o.radius, "--radius");
  const SlabConfig cfg{d, rho};
  const auto q = make_spec(o.common, o.common.tol);
  Outcome out;
  const bool two = o.order == "2" || o.order == "both";
  const bool three = o.order == "3" || o.order == "both";
  EnergyResult w2, w3;
  if (two) {
    w2 = w2_per_area(cfg, o.method == "numeric" ? SlabMode::numeric : SlabMode::analytic, q);
    out.results.push_back({"w2_per_area", w2});
  }
  if (three) {
    if (o.w3_source == "numeric") {
      const auto k = run_k(o, positive_length(o.cutoff, "--cutoff"));
      w3 = w3_per_area(cfg, w3_cp(HalfspaceConfig{1.0, {1.0}}, k), q);
    } else {
      w3 = w3_per_area(cfg, q);
    }
    out.results.push_back({"w3_per_area", w3});
  }
  const auto ideal = casimir_ideal_per_area(d);
  if (o.order == "ideal" || o.order == "both") out.results.push_back({"ideal", ideal});
  if (two && three) {
    out.diagnostics.push_back({"pairwise_fraction", w2.coefficient / ideal.coefficient});
    out.diagnostics.push_back({"w3_w2_ratio", w3.coefficient / std::abs(w2.coefficient)});
    out.diagnostics.push_back({"partial_sum_fraction", partial_sum_fraction(w2, w3, ideal)});
  }
  check(out);
  return out;
}

Outcome cmd_macro(const Options& o) {
  double eps = infinite_epsilon;
  if (o.epsilon != "inf") {
    auto [p, ec] = std::from_chars(o.epsilon.data(), o.epsilon.data() + o.epsilon.size(), eps);
    if (ec != std::errc{} || p != o.epsilon.data() + o.epsilon.size() || !(eps >= 1.0))
      throw UsageError("--epsilon must be a number >= 1 or 'inf'");
  }
  const auto q = make_spec(o.common, o.common.tol);
  Outcome out;
  if (o.order == "total") {
    const double d = positive_length(o.d, "--d");
    out.results.push_back({"w_total", w_total({eps, 1.0, d}, q)});
  } else {
    if (o.epsilon != "inf") throw UsageError("--order 1|2 expands around the close-packed medium; omit --epsilon");
    const int n = o.order == "1" ? 1 : 2;
    out.results.push_back({"many_body_" + o.order, many_body_coefficient(n, q)});
  }
  check(out);
  return out;
}

Outcome cmd_convergence(const Options& o) {
  if (o.levels == 0) throw UsageError("--levels must be >= 1");
  Outcome out;
  out.study = o.study;
  auto q = make_spec(o.common, o.common.cube_tol);
  q.singular_cutoff = positive_length(o.cutoff, "--cutoff");
  const double d = positive_length(o.d, "--d");
  if (o.study == "lambda-ladder") {
    const auto ladder = lambda_ladder(d, q, o.levels);
    out.report = ladder.table;
    if (!ladder.monotone || !ladder.converged) out.numeric_ok = false;
    out.diagnostics.push_back({"residual", ladder.residual});
  } else if (o.study == "lattice-w2") {
    // spacing d/2^k, k = 1..levels; even-power Richardson on the midpoint-rule error
    const HalfspaceConfig cfg{d, {1.0}};
    ConvergenceReport rep;
    rep.parameter_name = "spacing";
    std::vector<double> values;
    std::size_t sites = 0;
    for (std::size_t k = 1; k <= o.levels; ++k) {
      const double h = d / std::pow(2.0, static_cast<double>(k));
      const auto r = lattice_oracle_w2(cfg, h, 40.0 * d);
      values.push_back(r.coefficient);
      const std::size_t n = static_cast<std::size_t>(std::pow(40.0 * d / h, 3) * pi / 3.0);
      sites += n;
      rep.rows.push_back({h, r.coefficient, std::abs(r.coefficient - w2_cp_analytic(cfg).coefficient), n});
    }
    const auto ex = quad::richardson(values, 2.0, 2, 2);
    rep.rows.push_back({0.0, ex.value, ex.residual, sites});
    rep.has_limit = true;
    out.report = rep;
  } else if (o.study == "scaling-law") {
    ConvergenceReport rep;
    rep.parameter_name = "d";
    double wsum = 0.0, wv = 0.0;
    std::size_t evals = 0;
    for (double dd : {0.5, 1.0, 2.0, 4.0}) {
      const auto r = dK_dd(dd, q, o.levels);
      const double scaled = r.value * std::pow(dd, 5), err = r.error_estimate * std::pow(dd, 5);
      rep.rows.push_back({dd, scaled, err, r.evaluations});
      if (!r.converged) out.numeric_ok = false;
      const double w = 1.0 / std::max(err * err, 1e-300);
      wsum += w;
      wv += w * scaled;
      evals += r.evaluations;
    }
    // consensus alpha: inverse-variance weighted mean of d^5 dK/dd
    rep.rows.push_back({0.0, wv / wsum, 1.0 / std::sqrt(wsum), evals});
    rep.has_limit = true;
    for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
      if (std::abs(rep.rows[i].value - rep.rows.back().value) > 3.0 * rep.rows[i].error + rep.rows.back().error)
        out.numeric_ok = false;
    out.report = rep;
  } else {  // monte-carlo
    // paper-chart integrand at lambda = cutoff; sample counts grow by 4
    const PolarChartUnitCube f{d, q.singular_cutoff};
    ConvergenceReport rep;
    rep.parameter_name = "samples";
    for (std::size_t k = 0; k < o.levels; ++k) {
      const std::size_t n = o.samples << (2 * k);
      const auto r = quad::integrate_monte_carlo<4>(f, {0, 0, 0, 0}, {1, 1, 1, 1}, n, o.seed + k);
      rep.rows.push_back({static_cast<double>(n), r.value, r.error_estimate, r.evaluations});
    }
    // reference: production cubature at the same cutoff
    const auto ref = dK_dd_at_cutoff(d, q.singular_cutoff, q);
    rep.rows.push_back({0.0, ref.value, ref.error_estimate, ref.evaluations});
    rep.has_limit = true;
    if (!ref.converged) out.numeric_ok = false;
    out.report = rep;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

struct Parsed {
  Options opts;
  std::string command;
};

void add_common(CLI::App* sub, Common& c, bool cube = false, const char* default_format = "table") {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"table", "csv", "json"}))
      ->default_str(default_format);
  sub->add_option("--tol", c.tol, "Relative tolerance of 1D/2D integrals")->check(CLI::PositiveNumber)->capture_default_str();
  if (cube)
    sub->add_option("--cube-tol", c.cube_tol, "Relative tolerance of the 4D three-body integrals")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  sub->add_option("--max-subdivisions", c.max_subdivisions, "Subdivision budget per integral")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--transform", c.transform, "Semi-infinite map")
      ->check(CLI::IsMember({"rational", "exp"}))
      ->capture_default_str();
  sub->add_option("--manifest", c.manifest, "RunManifest path ('none' to skip)")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (overrides CASIMIR_THREADS)");
}

/// Returns the exit code and fills `out` with the command's stdout text.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, json* manifest_out);

int run_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) {
    err << "replay: cannot open '" << path << "'\n";
    return exit_usage;
  }
  json m;
  try {
    m = json::parse(in);
  } catch (const std::exception& e) {
    err << "replay: invalid manifest: " << e.what() << '\n';
    return exit_usage;
  }
  if (!m.contains("argv") || !m["argv"].is_array()) {
    err << "replay: manifest has no argv\n";
    return exit_usage;
  }
  std::vector<std::string> args;
  const auto recorded = m["argv"].get<std::vector<std::string>>();
  for (std::size_t i = 0; i < recorded.size(); ++i) {
    if (recorded[i] == "--manifest") {
      ++i;
      continue;
    }
    if (recorded[i].rfind("--manifest=", 0) == 0) continue;
    args.push_back(recorded[i]);
  }
  args.push_back("--manifest");
  args.push_back("none");
  std::ostringstream captured;
  json fresh;
  const int code = run(args, captured, err, &fresh);
  out << captured.str();
  const bool same = code == m.value("exit_code", -1) && captured.str() == m.value("output", std::string()) &&
                    fresh["results"] == m["results"];
  if (!same) {
    err << "replay: outputs differ from manifest\n";
    return exit_replay_mismatch;
  }
  err << "replay: identical\n";
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, json* manifest_out) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"Two- and three-body dispersion energies of metal nanoparticles", "casimir"};
  app.set_version_flag("--version", std::string(casimir::version));
  app.require_subcommand(1);
  Options o;
  std::string replay_path;

  auto* pair = app.add_subcommand("pair", "Two-body energy of two nanoparticles");
  pair->add_option("--material", o.material, "Preset (gold, perfect) or config file")->capture_default_str();
  pair->add_option("--radius", o.radius, "Override particle radius (reduced, or with nm/m)");
  pair->add_option("--r", o.r, "Centre-to-centre separation (reduced, or with nm/m)")->required();
  pair->add_option("--regime", o.regime, "Kernel regime")
      ->check(CLI::IsMember({"auto", "nonret", "ret", "full"}))
      ->capture_default_str();
  add_common(pair, o.common);

  auto* triplet = app.add_subcommand("triplet", "Three-body energy of a nanoparticle triangle");
  triplet->add_option("--material", o.material, "Preset (gold, perfect) or config file")->capture_default_str();
  triplet->add_option("--radius", o.radius, "Override particle radius");
  triplet->add_option("--sides", o.sides, "Side lengths a,b,c")->required()->delimiter(',')->expected(3);
  triplet->add_option("--regime", o.regime, "Kernel regime")
      ->check(CLI::IsMember({"auto", "nonret", "ret", "full"}))
      ->capture_default_str();
  add_common(triplet, o.common);

  auto* cp = app.add_subcommand("cp", "Particle / perfectly conducting half-space (Casimir-Polder)");
  cp->add_option("--d", o.d, "Particle-surface distance")->capture_default_str();
  cp->add_option("--radius", o.radius, "Particle radius (default 1)");
  cp->add_option("--order", o.order, "Many-body order")->required()->check(CLI::IsMember({"2", "3", "both"}));
  cp->add_option("--method", o.method, "Two-body evaluation")
      ->check(CLI::IsMember({"analytic", "numeric"}))
      ->capture_default_str();
  cp->add_option("--levels", o.levels, "Cutoff ladder levels")->check(CLI::PositiveNumber)->capture_default_str();
  cp->add_option("--cutoff", o.cutoff, "First ladder cutoff lambda_0")->capture_default_str();
  add_common(cp, o.common, true);

  auto* cas = app.add_subcommand("casimir", "Two perfectly conducting half-spaces (energy per area)");
  cas->add_option("--d", o.d, "Gap")->capture_default_str();
  cas->add_option("--radius", o.radius, "Particle radius (default 1)");
  cas->add_option("--order", o.order, "Many-body order")
      ->required()
      ->check(CLI::IsMember({"2", "3", "both", "ideal"}));
  cas->add_option("--method", o.method, "Two-body evaluation")
      ->check(CLI::IsMember({"analytic", "numeric"}))
      ->capture_default_str();
  cas->add_option("--w3", o.w3_source, "Half-space three-body coefficient source")
      ->check(CLI::IsMember({"exact", "numeric"}))
      ->capture_default_str();
  cas->add_option("--levels", o.levels, "Cutoff ladder levels (--w3 numeric)")->check(CLI::PositiveNumber)->capture_default_str();
  cas->add_option("--cutoff", o.cutoff, "First ladder cutoff (--w3 numeric)")->capture_default_str();
  add_common(cas, o.common, true);

  auto* macro = app.add_subcommand("macro", "Macroscopic particle / half-space reference");
  macro->add_option("--epsilon", o.epsilon, "Static permittivity (>= 1) or inf")->capture_default_str();
  macro->add_option("--d", o.d, "Particle-surface distance")->capture_default_str();
  macro->add_option("--order", o.order, "total, or a many-body order")
      ->required()
      ->check(CLI::IsMember({"total", "1", "2"}));
  add_common(macro, o.common);

  auto* conv = app.add_subcommand("convergence", "Convergence studies (CSV by default)");
  conv->add_option("--study", o.study, "Study")
      ->required()
      ->check(CLI::IsMember({"lambda-ladder", "lattice-w2", "scaling-law", "monte-carlo"}));
  conv->add_option("--levels", o.levels, "Ladder levels / refinements")->capture_default_str();
  conv->add_option("--seed", o.seed, "Monte Carlo seed")->capture_default_str();
  conv->add_option("--samples", o.samples, "Monte Carlo samples at the first level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  conv->add_option("--d", o.d, "Distance")->capture_default_str();
  conv->add_option("--cutoff", o.cutoff, "First ladder cutoff / Monte Carlo cutoff")->capture_default_str();
  add_common(conv, o.common, true, "csv");

  auto* replay = app.add_subcommand("replay", "Re-run a RunManifest and compare outputs");
  replay->add_option("manifest", replay_path, "Manifest file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    out << casimir::version << '\n';
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return exit_usage;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == replay) return run_replay(replay_path, out, err);

  const bool conv_cmd = sub == conv;
  if (conv_cmd && !sub->count("--format")) o.common.format = "csv";
  if (o.common.threads > 0) ::setenv("CASIMIR_THREADS", std::to_string(o.common.threads).c_str(), 1);
  const Format fmt = o.common.format == "json" ? Format::json_doc : o.common.format == "csv" ? Format::csv : Format::table;

  Outcome outcome;
  try {
    if (sub == pair) outcome = cmd_pair(o);
    else if (sub == triplet) outcome = cmd_triplet(o);
    else if (sub == cp) outcome = cmd_cp(o);
    else if (sub == cas) outcome = cmd_casimir(o);
    else if (sub == macro) outcome = cmd_macro(o);
    else outcome = cmd_convergence(o);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return exit_usage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }

  std::ostringstream text;
  write_outcome(text, outcome, fmt);
  out << text.str();
  const int code = outcome.numeric_ok ? exit_ok : exit_numeric;
  if (!outcome.numeric_ok) err << "warning: numerical non-convergence\n";

  json manifest;
  manifest["command"] = sub->get_name();
  manifest["argv"] = args;
  json params = json::object();
  for (const auto* opt : sub->get_options()) {
    if (opt->get_name() == "--help") continue;
    const auto names = opt->get_lnames();
    if (names.empty()) continue;
    const auto results = opt->results();
    params[names.front()] = opt->count() ? (results.size() == 1 ? json(results.front()) : json(results))
                                         : json(opt->get_default_str());
  }
  manifest["parameters"] = params;
  manifest["tolerances"] = {{"rel_tol", o.common.tol},
                            {"cube_rel_tol", o.common.cube_tol},
                            {"max_subdivisions", o.common.max_subdivisions},
                            {"transform", o.common.transform}};
  manifest["seed"] = o.seed;
  manifest["version"] = std::string(casimir::version);
  manifest["threads"] = thread_count();
  manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["exit_code"] = code;
  manifest["results"] = outcome_json(outcome)["results"];
  manifest["outcome"] = outcome_json(outcome);
  manifest["output"] = text.str();
  if (manifest_out) *manifest_out = manifest;

  if (o.common.manifest != "none" && !o.common.manifest.empty()) {
    std::ofstream mf(o.common.manifest);
    if (!mf) {
      err << "error: cannot write manifest '" << o.common.manifest << "'\n";
      return exit_usage;
    }
    mf << manifest.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr, nullptr);
}
