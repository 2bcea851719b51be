#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <ostream>
#include <thread>

#include "efk/errors.hpp"
#include "efk/io.hpp"
#include "efk/nonlinearity.hpp"
#include "efk/ode1d.hpp"
#include "efk/strip.hpp"
#include "efk/verify.hpp"

#ifndef EFK_VERSION
#define EFK_VERSION "0.0.0"
#endif

namespace efk::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

using Keys = std::set<std::string>;

const Keys kNonlinearityKeys = {"nonlinearity", "scale",         "clip",        "spline_knots",
                                "spline_values", "alpha_minus", "alpha_plus", "delta"};
const Keys kGridKeys = {"transverse_sizes", "transverse_spacings", "axial_nodes", "half_length"};
const Keys kKinkKeys = {"half_width", "nodes", "method", "tol", "bracket", "integrator_tol", "max_iters"};
const Keys kInitKeys = {"init", "init_value", "init_height", "init_radius", "seed", "amplitude"};
const Keys kStripSolveKeys = {"damping", "solve_tol", "max_iter"};
const Keys kCheckTolKeys = {"apriori_tol", "one_dim_tol", "monotone_tol", "tau_max", "n_tau", "sliding_tol",
                            "constant_tol", "xi_prime"};

Keys merge(std::initializer_list<const Keys*> sets, std::initializer_list<const char*> extra = {}) {
  Keys out;
  for (const Keys* s : sets) out.insert(s->begin(), s->end());
  for (const char* e : extra) out.insert(e);
  return out;
}

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::Config, what); }

ojson extended(const ExtendedReal& e) {
  switch (e.kind()) {
    case ExtendedReal::Kind::NegInf: return "-inf";
    case ExtendedReal::Kind::PosInf: return "+inf";
    default: return e.value();
  }
}

void write_json(const fs::path& p, const ojson& j) { write_file_atomic(p, j.dump(2) + "\n"); }

Nonlinearity make_nonlinearity(const Config& c) {
  const std::string kind = c.get_string("nonlinearity", "cubic");
  if (kind == "cubic") return builtin_cubic();
  if (kind == "scaled_cubic") return scaled_cubic(c.require_number("scale"));
  if (kind == "clipped_cubic") return clipped_cubic(c.get_number("clip", 2.0));
  if (kind == "spline") {
    auto knots = c.get_numbers("spline_knots");
    auto values = c.get_numbers("spline_values");
    if (knots.size() != values.size() || knots.size() < 4) {
      config_error("spline_knots and spline_values need matching lengths of at least 4");
    }
    return spline_nonlinearity(std::move(knots), std::move(values), c.require_number("alpha_minus"),
                               c.require_number("alpha_plus"), c.require_number("delta"));
  }
  config_error("'nonlinearity': unknown kind '" + kind + "'");
}

std::vector<double> beta_list(const Config& c) {
  if (c.has("beta") && c.has("gamma")) config_error("'beta' and 'gamma' are mutually exclusive");
  std::vector<double> out;
  if (c.has("gamma")) {
    for (double g : c.get_numbers("gamma")) out.push_back(gamma_to_beta(g));
  } else {
    out = c.get_numbers("beta");
  }
  return out;
}

double single_beta(const Config& c) {
  const auto b = beta_list(c);
  if (b.size() != 1) config_error("exactly one of 'beta' or 'gamma' with one value is required");
  return b.front();
}

StripGrid make_grid(const Config& c) {
  auto sizes = c.has("transverse_sizes") ? c.get_counts("transverse_sizes") : std::vector<std::size_t>{32};
  auto spacings = c.has("transverse_spacings") ? c.get_numbers("transverse_spacings") : std::vector<double>{0.2};
  if (spacings.size() == 1 && sizes.size() > 1) spacings.assign(sizes.size(), spacings.front());
  if (spacings.size() != sizes.size()) config_error("transverse_sizes and transverse_spacings differ in length");
  try {
    return StripGrid(sizes, spacings, c.get_count("axial_nodes", 512), c.get_number("half_length", 25.55));
  } catch (const Error& e) {
    config_error(std::string("grid: ") + e.what());
  }
}

InitParams make_init_params(const Config& c, double bc_bottom, double bc_top) {
  InitParams p;
  p.bc_bottom = bc_bottom;
  p.bc_top = bc_top;
  p.value = c.get_number("init_value", bc_bottom == bc_top ? bc_bottom : 0.0);
  p.height = c.get_number("init_height", 0.5);
  p.radius = c.get_number("init_radius", 5.0);
  p.seed = c.get_seed("seed", 0);
  p.amplitude = c.get_number("amplitude", 0.0);
  return p;
}

StripSolveSettings make_solve_settings(const Config& c) {
  StripSolveSettings s;
  s.damping = c.get_number("damping", 0.5);
  s.tol = c.get_number("solve_tol", 1e-9);
  s.max_iter = c.get_count("max_iter", 5000);
  if (!(s.damping > 0 && s.damping <= 1)) config_error("'damping' must lie in (0, 1]");
  if (!(s.tol > 0)) config_error("'solve_tol' must be positive");
  return s;
}

struct CheckTolerances {
  double apriori = 1e-4;
  double one_dim = 1e-5;
  double monotone = 1e-9;
  double tau_max = 5.0;
  std::size_t n_tau = 100;
  double sliding = 1e-8;
  double constant = 1e-5;
  std::vector<double> xi_prime;
};

CheckTolerances make_check_tolerances(const Config& c) {
  CheckTolerances t;
  t.apriori = c.get_number("apriori_tol", t.apriori);
  t.one_dim = c.get_number("one_dim_tol", t.one_dim);
  t.monotone = c.get_number("monotone_tol", t.monotone);
  t.tau_max = c.get_number("tau_max", t.tau_max);
  t.n_tau = c.get_count("n_tau", t.n_tau);
  t.sliding = c.get_number("sliding_tol", t.sliding);
  t.constant = c.get_number("constant_tol", t.constant);
  t.xi_prime = c.get_numbers("xi_prime");
  return t;
}

std::string jsonl(const std::vector<VerificationReport>& reports) {
  std::string s;
  for (const auto& r : reports) s += to_json_line(r) + "\n";
  return s;
}

void add_verdicts(ojson& verdicts, const std::vector<VerificationReport>& reports, const std::string& prefix = {}) {
  for (const auto& r : reports) verdicts[prefix + r.check_name] = to_string(r.verdict);
}

// ---------------------------------------------------------------- analyze

int cmd_analyze(const Config& c, const fs::path& out, ojson& verdicts) {
  c.require_known(merge({&kNonlinearityKeys}, {"beta", "gamma", "beta_min", "beta_max", "beta_count"}));
  const Nonlinearity nl = make_nonlinearity(c);
  std::vector<double> betas = beta_list(c);
  if (betas.empty()) {
    const double lo = c.has("beta_min") ? c.require_number("beta_min") : beta_f(nl);
    const double hi = c.get_number("beta_max", 6.0);
    const std::size_t n = c.get_count("beta_count", 33);
    if (n == 0 || !(hi >= lo)) config_error("beta range is empty");
    for (std::size_t k = 0; k < n; ++k) betas.push_back(n == 1 ? lo : lo + (hi - lo) * double(k) / double(n - 1));
  } else if (c.has("beta_min") || c.has("beta_max") || c.has("beta_count")) {
    config_error("give either beta/gamma values or a beta_min/beta_max range");
  }

  const BoundsProfile bp(nl, betas);
  ojson j;
  j["omega"] = bp.omega();
  j["beta_f"] = bp.beta_f();
  j["samples"] = ojson::array();
  CsvTable csv({"beta", "m", "M"});
  PlotSeries m_series{"m(beta)", {}, {}}, M_series{"M(beta)", {}, {}};
  for (const auto& s : bp.samples()) {
    j["samples"].push_back({{"beta", s.beta}, {"m", extended(s.m)}, {"M", extended(s.M)}});
    csv.row(std::vector<double>{s.beta, s.m.as_double(), s.M.as_double()});
    m_series.x.push_back(s.beta);
    m_series.y.push_back(s.m.as_double());
    M_series.x.push_back(s.beta);
    M_series.y.push_back(s.M.as_double());
  }
  write_json(out / "bounds.json", j);
  write_file_atomic(out / "bounds.csv", csv.str());
  write_file_atomic(out / "bounds.svg",
                    svg_line_plot({"Range thresholds", "beta", "threshold", false}, {m_series, M_series}));
  verdicts["samples"] = bp.samples().size();
  return kExitOk;
}

// ---------------------------------------------------------------- kink1d

struct KinkParams {
  std::optional<double> half_width;
  std::size_t nodes = 2001;
  std::string method = "variational";
  double tol = 1e-7;
  Interval bracket{0.05, 2.0};
  double integrator_tol = 1e-12;
  std::size_t max_iters = 200;
};

KinkParams make_kink_params(const Config& c) {
  KinkParams p;
  p.half_width = c.find_number("half_width");
  p.nodes = c.get_count("nodes", p.nodes);
  p.method = c.get_string("method", p.method);
  if (p.method != "variational" && p.method != "shooting" && p.method != "both") {
    config_error("'method' must be variational, shooting or both");
  }
  p.tol = c.get_number("tol", p.tol);
  if (c.has("bracket")) {
    const auto b = c.get_numbers("bracket");
    if (b.size() != 2) config_error("'bracket' needs two numbers");
    p.bracket = {b[0], b[1]};
  }
  p.integrator_tol = c.get_number("integrator_tol", p.integrator_tol);
  p.max_iters = c.get_count("max_iters", p.max_iters);
  return p;
}

struct KinkSummary {
  double beta = 0.0;
  std::string regime;
  double half_width = 0.0;
  std::size_t nodes = 0;
  std::vector<Profile1D> profiles;
  std::vector<ProfileClassification> classes;
  std::vector<double> residuals;
};

double default_half_width(const Nonlinearity& nl, double beta) {
  // 1.5 times the tail-decay estimate, never below 20.
  return std::max(20.0, 1.5 * recommended_half_width(equilibrium_spectrum(nl, beta, nl.alpha_plus())));
}

ojson profile_sidecar(const Profile1D& p, const ProfileClassification& cls, double residual, const Nonlinearity& nl) {
  const auto e = first_integral(p, nl);
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  ojson j;
  j["beta"] = p.beta;
  j["L"] = p.grid.half_width;
  j["n"] = p.grid.n;
  j["method"] = p.method;
  j["residual"] = residual;
  j["zeros"] = cls.zeros;
  j["monotone"] = cls.monotone;
  j["extrema"] = cls.extrema;
  j["amplitudes"] = cls.amplitudes;
  j["first_integral_spread"] = *hi - *lo;
  return j;
}

KinkSummary run_kink(const Nonlinearity& nl, double beta, const KinkParams& kp, const fs::path& out) {
  KinkSummary s;
  s.beta = beta;
  s.regime = to_string(equilibrium_spectrum(nl, beta, nl.alpha_plus()).regime);
  s.half_width = kp.half_width ? *kp.half_width : default_half_width(nl, beta);
  s.nodes = kp.nodes;
  if (kp.method != "shooting") {
    KinkSolverOptions o;
    o.max_iters = kp.max_iters;
    s.profiles.push_back(variational_kink(nl, beta, s.half_width, kp.nodes, kp.tol, o));
  }
  if (kp.method != "variational") {
    ShootingOptions o;
    o.half_width = s.half_width;
    o.nodes = kp.nodes;
    s.profiles.push_back(shoot_kink(nl, beta, kp.bracket, kp.integrator_tol, o));
  }
  std::vector<PlotSeries> series;
  for (const auto& p : s.profiles) {
    s.classes.push_back(classify_profile(p));
    s.residuals.push_back(residual_1d(p, nl));
    const std::string stem = s.profiles.size() == 1 ? "profile" : "profile_" + p.method;
    write_file_atomic(out / (stem + ".csv"), profile_csv(p));
    write_json(out / (stem + ".json"), profile_sidecar(p, s.classes.back(), s.residuals.back(), nl));
    PlotSeries ps{p.method, {}, p.values};
    for (std::size_t i = 0; i < p.size(); ++i) ps.x.push_back(p.grid.x(i));
    series.push_back(std::move(ps));
  }
  if (s.profiles.size() == 2) {
    const double d = aligned_sup_distance(s.profiles[0], s.profiles[1]);
    ojson a;
    a["aligned_sup_distance"] = d;
    a["tol"] = 1e-3;
    a["passed"] = d <= 1e-3;
    write_json(out / "agreement.json", a);
  }
  char title[64];
  std::snprintf(title, sizeof title, "Kink, beta = %.6g", beta);
  write_file_atomic(out / "profile.svg", svg_line_plot({title, "x", "u", false}, series));
  return s;
}

int cmd_kink1d(const Config& c, const fs::path& out, ojson& verdicts) {
  c.require_known(merge({&kNonlinearityKeys, &kKinkKeys}, {"beta", "gamma"}));
  const Nonlinearity nl = make_nonlinearity(c);
  const double beta = single_beta(c);
  const KinkParams kp = make_kink_params(c);
  const KinkSummary s = run_kink(nl, beta, kp, out);
  for (std::size_t k = 0; k < s.profiles.size(); ++k) {
    verdicts[s.profiles[k].method] = {{"monotone", s.classes[k].monotone}, {"zeros", s.classes[k].zeros}};
  }
  return kExitOk;
}

// ---------------------------------------------------------------- solve

VerificationReport constancy_report(const SolutionField& f, double target, double tol) {
  VerificationReport r;
  r.check_name = "constant";
  double dev = 0.0;
  std::size_t at = 0;
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    if (std::abs(f.u[i] - target) > dev) dev = std::abs(f.u[i] - target), at = i;
  }
  r.margin = tol - dev;
  r.passed = r.margin >= 0;
  r.verdict = r.passed ? Verdict::Passed : Verdict::Failed;
  r.context = {{"target", target}, {"tol", tol}, {"max_deviation", dev}, {"margin_threshold", 0.0}};
  const std::size_t n = f.grid.axial_size();
  Witness w;
  w.index = f.grid.line_coords(at / n);
  for (std::size_t a = 0; a < w.index.size(); ++a) w.position.push_back(double(w.index[a]) * f.grid.transverse_spacing(a));
  w.index.push_back(at % n);
  w.position.push_back(f.grid.axial_coordinate(at % n));
  r.witness = w;
  return r;
}

VerificationReport splitting_report(const SolutionField& f, double solve_tol) {
  VerificationReport r;
  r.check_name = "splitting_identity";
  const double d = splitting_defect(f);
  r.margin = 10 * solve_tol - d;
  r.passed = r.margin >= 0;
  r.verdict = r.passed ? Verdict::Passed : Verdict::Failed;
  r.context = {{"defect", d}, {"solve_tol", solve_tol}, {"margin_threshold", 0.0}};
  if (!r.passed) r.witness = Witness{{}, {}, "maximum over interior rows"};
  return r;
}

std::vector<VerificationReport> field_reports(const SolutionField& f, const Nonlinearity& nl,
                                              const CheckTolerances& t, double solve_tol) {
  std::vector<VerificationReport> out;
  out.push_back(splitting_report(f, solve_tol));
  out.push_back(check_apriori_bounds(f, nl, f.beta, t.apriori));
  if (f.grid.transverse_axes() > 0) out.push_back(check_one_dimensionality(f, t.one_dim));
  if (f.bc_bottom < f.bc_top) {
    out.push_back(check_monotonicity(f, t.monotone));
    std::vector<double> xi = t.xi_prime;
    if (xi.empty()) xi.assign(f.grid.transverse_axes(), 0.0);
    out.push_back(sliding_report(sliding_tau_star(f, xi, t.tau_max, t.n_tau, t.sliding), t.sliding));
  } else if (f.bc_bottom == f.bc_top) {
    out.push_back(constancy_report(f, f.bc_bottom, t.constant));
  }
  return out;
}

void write_residual(const fs::path& out, const std::vector<double>& history) {
  CsvTable csv({"iteration", "residual"});
  PlotSeries s{"residual", {}, history};
  for (std::size_t k = 0; k < history.size(); ++k) {
    csv.row(std::vector<double>{double(k + 1), history[k]});
    s.x.push_back(double(k + 1));
  }
  write_file_atomic(out / "residual.csv", csv.str());
  write_file_atomic(out / "residual.svg", svg_line_plot({"Fourth-order residual", "sweep", "residual", true}, {s}));
}

void write_slice(const fs::path& out, const SolutionField& f) {
  const StripGrid& g = f.grid;
  const std::size_t n = g.axial_size();
  if (g.transverse_axes() == 0) {
    CsvTable csv({"x_N", "u", "v"});
    for (std::size_t j = 0; j < n; ++j) csv.row(std::vector<double>{g.axial_coordinate(j), f.u[j], f.v[j]});
    write_file_atomic(out / "slice.csv", csv.str());
    return;
  }
  // Plane through the first transverse axis and the axial axis, other
  // transverse indices at 0.
  std::size_t stride = 1;
  for (std::size_t a = 1; a < g.transverse_axes(); ++a) stride *= g.transverse_size(a);
  CsvTable csv({"x_1", "x_N", "u", "v"});
  for (std::size_t i = 0; i < g.transverse_size(0); ++i) {
    const std::size_t line = i * stride;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = g.index(line, j);
      csv.row(std::vector<double>{double(i) * g.transverse_spacing(0), g.axial_coordinate(j), f.u[k], f.v[k]});
    }
  }
  write_file_atomic(out / "slice.csv", csv.str());
}

int cmd_solve(const Config& c, const fs::path& out, ojson& verdicts) {
  c.require_known(merge({&kNonlinearityKeys, &kGridKeys, &kInitKeys, &kStripSolveKeys, &kCheckTolKeys},
                        {"beta", "gamma", "bc_bottom", "bc_top"}));
  const Nonlinearity nl = make_nonlinearity(c);
  const double beta = single_beta(c);
  const StripGrid grid = make_grid(c);
  const double bb = c.get_number("bc_bottom", nl.alpha_minus());
  const double bt = c.get_number("bc_top", nl.alpha_plus());
  for (double b : {bb, bt}) {
    if (b != nl.alpha_minus() && b != nl.alpha_plus()) config_error("boundary values must be alpha_- or alpha_+");
  }
  InitKind kind;
  try {
    kind = parse_init_kind(c.get_string("init", "ramp"));
  } catch (const Error& e) {
    config_error(std::string("'init': ") + e.what());
  }
  const InitParams ip = make_init_params(c, bb, bt);
  const StripSolveSettings ss = make_solve_settings(c);
  const CheckTolerances tol = make_check_tolerances(c);

  const Field init = make_initial_guess(kind, grid, ip);
  std::optional<SolutionField> solved;
  try {
    solved = solve_strip(nl, beta, grid, bb, bt, init, ss.damping, ss.tol, ss.max_iter);
  } catch (const NoConvergence& e) {
    write_residual(out, e.history());
    verdicts["solve"] = "no_convergence";
    throw;
  }
  const SolutionField& f = *solved;
  write_field(out, "field", f);
  write_residual(out, f.residual_history);
  write_slice(out, f);
  const auto reports = field_reports(f, nl, tol, ss.tol);
  write_file_atomic(out / "reports.jsonl", jsonl(reports));
  verdicts["solve"] = "converged";
  verdicts["iterations"] = f.iterations();
  add_verdicts(verdicts, reports);
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct Loaded {
  std::optional<SolutionField> field;
  std::optional<Profile1D> profile;
  FieldView view() const { return field ? FieldView(*field) : FieldView(*profile); }
  double beta() const { return field ? field->beta : profile->beta; }
};

Loaded load_input(const Config& c, const std::string& field_key, const std::string& profile_key,
                  std::optional<double> beta) {
  Loaded l;
  if (c.has(field_key) == c.has(profile_key)) {
    config_error("give exactly one of '" + field_key + "' or '" + profile_key + "'");
  }
  try {
    if (c.has(field_key)) {
      l.field = read_field(c.get_path(field_key));
    } else {
      if (!beta) config_error("profiles need 'beta' or 'gamma'");
      l.profile = read_profile_csv(c.get_path(profile_key), *beta);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::Config) throw;
    config_error(e.what());
  }
  return l;
}

int cmd_verify(const Config& c, const fs::path& out, ojson& verdicts) {
  c.require_known(merge({&kNonlinearityKeys, &kGridKeys, &kStripSolveKeys, &kCheckTolKeys},
                        {"beta", "gamma", "checks", "field", "profile", "field2", "profile2", "side", "lambda",
                         "comparison_tol", "liouville_side", "liouville_inits", "liouville_tol", "seed", "amplitude",
                         "init_height", "init_radius", "init_value"}));
  const Nonlinearity nl = make_nonlinearity(c);
  const auto betas = beta_list(c);
  if (betas.size() > 1) config_error("one beta at most");
  const std::optional<double> beta_cfg = betas.empty() ? std::nullopt : std::optional<double>(betas.front());
  const auto checks = c.get_strings("checks");
  if (checks.empty()) config_error("'checks' is required");
  const Keys known = {"apriori", "one_dimensionality", "monotonicity", "sliding", "comparison", "liouville"};
  for (const auto& k : checks) {
    if (!known.count(k)) config_error("'checks': unknown check '" + k + "'");
  }
  const CheckTolerances tol = make_check_tolerances(c);
  const std::string side = c.get_string("side", "both");
  if (side != "upper" && side != "lower" && side != "both") config_error("'side' must be upper, lower or both");
  const std::string lside = c.get_string("liouville_side", "minus");
  if (lside != "minus" && lside != "plus") config_error("'liouville_side' must be minus or plus");

  const bool needs_field = std::any_of(checks.begin(), checks.end(), [](const std::string& k) { return k != "liouville"; });
  std::optional<Loaded> z;
  if (needs_field) z = load_input(c, "field", "profile", beta_cfg);
  const double beta = beta_cfg ? *beta_cfg : (z ? z->beta() : 0.0);
  if (!beta_cfg && !z) config_error("'beta' or 'gamma' is required");

  std::vector<VerificationReport> reports;
  for (const auto& k : checks) {
    if (k == "apriori") {
      reports.push_back(check_apriori_bounds(z->view(), nl, beta, tol.apriori));
    } else if (k == "one_dimensionality") {
      try {
        reports.push_back(check_one_dimensionality(z->view(), tol.one_dim));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (k == "monotonicity") {
      reports.push_back(check_monotonicity(z->view(), tol.monotone));
    } else if (k == "sliding") {
      std::vector<double> xi = tol.xi_prime;
      if (xi.empty()) xi.assign(z->view().grid().transverse_axes(), 0.0);
      try {
        reports.push_back(sliding_report(sliding_tau_star(z->view(), xi, tol.tau_max, tol.n_tau, tol.sliding), tol.sliding));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (k == "comparison") {
      const Loaded z2 = load_input(c, "field2", "profile2", beta);
      const double lambda = c.has("lambda") ? c.require_number("lambda") : split_params(beta, omega_min(nl)).lambda;
      const double ctol = c.get_number("comparison_tol", 1e-8);
      try {
        if (side != "lower") {
          reports.push_back(check_comparison_halfspace(z->view(), z2.view(), lambda, nl, beta, HalfSpace::Upper, ctol));
        }
        if (side != "upper") {
          reports.push_back(check_comparison_halfspace(z->view(), z2.view(), lambda, nl, beta, HalfSpace::Lower, ctol));
        }
      } catch (const Error& e) {
        if (e.code() == Errc::GridMismatch) config_error(e.what());
        throw;
      }
    } else if (k == "liouville") {
      const StripGrid grid = make_grid(c);
      std::vector<InitSpec> inits;
      const double target = lside == "minus" ? nl.alpha_minus() : nl.alpha_plus();
      auto names = c.get_strings("liouville_inits");
      if (names.empty()) names = {"constant", "bump", "noisy_ramp"};
      for (const auto& name : names) {
        InitSpec s;
        try {
          s.kind = parse_init_kind(name);
        } catch (const Error& e) {
          config_error(std::string("'liouville_inits': ") + e.what());
        }
        s.params = make_init_params(c, target, target);
        if (s.kind == InitKind::NoisyRamp && !c.has("amplitude")) s.params.amplitude = 0.1;
        inits.push_back(s);
      }
      std::vector<SolutionField> fields;
      reports.push_back(liouville_experiment(nl, beta, lside == "minus" ? LiouvilleSide::Minus : LiouvilleSide::Plus,
                                             grid, inits, c.get_number("liouville_tol", 1e-5),
                                             make_solve_settings(c), &fields));
      for (std::size_t i = 0; i < fields.size(); ++i) write_field(out, "liouville_" + std::to_string(i), fields[i]);
    }
  }
  write_file_atomic(out / "reports.jsonl", jsonl(reports));
  add_verdicts(verdicts, reports);
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Config& c, const fs::path& out, ojson& verdicts) {
  c.require_known(merge({&kNonlinearityKeys, &kKinkKeys}, {"beta", "gamma", "threads"}));
  const Nonlinearity nl = make_nonlinearity(c);
  const std::vector<double> betas = beta_list(c);
  if (betas.empty()) config_error("sweep needs a non-empty 'beta' or 'gamma' list");
  const KinkParams kp = make_kink_params(c);
  std::size_t threads = c.get_count("threads", std::max(1u, std::thread::hardware_concurrency()));
  threads = std::clamp<std::size_t>(threads, 1, betas.size());

  struct Row {
    std::optional<KinkSummary> summary;
    std::string status = "ok";
    int code = kExitOk;
  };
  std::vector<Row> rows(betas.size());
  std::vector<std::string> dirs(betas.size());
  for (std::size_t k = 0; k < betas.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "beta_%03zu", k);
    dirs[k] = name;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < betas.size(); k = next++) {
      try {
        fs::create_directories(out / dirs[k]);
        rows[k].summary = run_kink(nl, betas[k], kp, out / dirs[k]);
      } catch (const std::exception& e) {
        rows[k].status = e.what();
        rows[k].code = exit_code_for(e);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  CsvTable csv({"beta", "dir", "regime", "method", "status", "zeros", "monotone", "extrema", "residual",
                "half_width", "nodes"});
  int code = kExitOk;
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const Row& r = rows[k];
    code = std::max(code, r.code);
    if (!r.summary) {
      csv.row(std::vector<std::string>{format_number(betas[k]), dirs[k], "", kp.method, r.status, "", "", "", "", "", ""});
      verdicts[dirs[k]] = r.status;
      continue;
    }
    const KinkSummary& s = *r.summary;
    for (std::size_t m = 0; m < s.profiles.size(); ++m) {
      const auto& cls = s.classes[m];
      csv.row(std::vector<std::string>{format_number(s.beta), dirs[k], s.regime, s.profiles[m].method, "ok",
                                       std::to_string(cls.zeros), cls.monotone ? "true" : "false",
                                       std::to_string(cls.extrema), format_number(s.residuals[m]),
                                       format_number(s.half_width), std::to_string(s.nodes)});
    }
    verdicts[dirs[k]] = s.classes.front().monotone ? "monotone" : "non_monotone";
  }
  write_file_atomic(out / "sweep.csv", csv.str());
  return code;
}

std::vector<std::string> list_files(const fs::path& out) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), out).generic_string());
  }
  files.push_back("manifest.json");
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  return files;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case Errc::NoConvergence:
      case Errc::DomainTooSmall:
      case Errc::BracketNotStraddling:
      case Errc::Blowup:
        return kExitNoConvergence;
      default:
        return kExitConfig;
    }
  }
  return kExitConfig;
}

int run_command(const std::string& command, const Config& config, const fs::path& out_dir, std::ostream& log) {
  using Fn = int (*)(const Config&, const fs::path&, ojson&);
  Fn fn = nullptr;
  if (command == "analyze") fn = cmd_analyze;
  if (command == "kink1d") fn = cmd_kink1d;
  if (command == "solve") fn = cmd_solve;
  if (command == "verify") fn = cmd_verify;
  if (command == "sweep") fn = cmd_sweep;
  if (!fn) {
    log << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  }
  const auto t0 = std::chrono::steady_clock::now();
  ojson verdicts = ojson::object();
  int code = kExitOk;
  std::string failure;
  try {
    fs::create_directories(out_dir);
    code = fn(config, out_dir, verdicts);
  } catch (const std::exception& e) {
    code = exit_code_for(e);
    failure = e.what();
    log << "error: " << failure << "\n";
  }
  if (code == kExitConfig && !failure.empty()) return code;  // nothing computed

  ojson m;
  m["tool"] = "efk";
  m["version"] = EFK_VERSION;
  m["command"] = command;
  ojson cfg = ojson::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  m["config"] = cfg;
  m["exit_code"] = code;
  if (!failure.empty()) m["error"] = failure;
  m["verdicts"] = verdicts;
  m["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  m["files"] = list_files(out_dir);
  try {
    write_json(out_dir / "manifest.json", m);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return code;
}

int run_command(const std::string& command, const fs::path& config_path, const fs::path& out_dir, std::ostream& log) {
  try {
    return run_command(command, Config::load(config_path), out_dir, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace efk::cli
