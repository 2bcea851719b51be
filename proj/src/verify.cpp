#include "efk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>

#include "efk/errors.hpp"

namespace efk {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Passed: return "passed";
    case Verdict::Failed: return "failed";
    case Verdict::HypothesisFailed: return "hypothesis_failed";
  }
  return "failed";
}

const ContextValue* VerificationReport::find(const std::string& key) const {
  for (const auto& [k, v] : context) {
    if (k == key) return &v;
  }
  return nullptr;
}

namespace {

using ojson = nlohmann::ordered_json;

// JSON has no infinities or NaN; those become strings / null.
ojson number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace

std::string to_json_line(const VerificationReport& r) {
  ojson j;
  j["check"] = r.check_name;
  j["passed"] = r.passed;
  j["margin"] = number(r.margin);
  if (r.witness) {
    ojson w;
    w["index"] = r.witness->index;
    ojson pos = ojson::array();
    for (double p : r.witness->position) pos.push_back(number(p));
    w["position"] = pos;
    if (!r.witness->note.empty()) w["note"] = r.witness->note;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  ojson ctx = ojson::object();
  ctx["verdict"] = to_string(r.verdict);
  for (const auto& [k, v] : r.context) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, double>) {
            ctx[k] = number(x);
          } else {
            ctx[k] = x;
          }
        },
        v);
  }
  j["context"] = ctx;
  return j.dump();
}

FieldView::FieldView(const StripGrid& grid, const Field& values) : grid_(grid), values_(&values) {
  if (values.size() != grid.size()) throw Error(Errc::GridMismatch, "field size does not match its grid");
}

FieldView::FieldView(const SolutionField& f) : FieldView(f.grid, f.u) {}

FieldView::FieldView(const Profile1D& p) : grid_({}, {}, p.grid.n, p.grid.half_width), values_(&p.values) {
  if (p.values.size() != p.grid.n) throw Error(Errc::GridMismatch, "profile size does not match its grid");
}

namespace {

Witness node_witness(const StripGrid& g, std::size_t flat, std::string note = {}) {
  const std::size_t n = g.axial_size();
  const std::size_t line = flat / n, j = flat % n;
  Witness w;
  w.index = g.line_coords(line);
  for (std::size_t a = 0; a < w.index.size(); ++a) {
    w.position.push_back(static_cast<double>(w.index[a]) * g.transverse_spacing(a));
  }
  w.index.push_back(j);
  w.position.push_back(g.axial_coordinate(j));
  w.note = std::move(note);
  return w;
}

void finish(VerificationReport& r, double threshold) {
  r.passed = r.margin >= -threshold;
  if (r.verdict != Verdict::HypothesisFailed) r.verdict = r.passed ? Verdict::Passed : Verdict::Failed;
}

}  // namespace

VerificationReport check_apriori_bounds(const FieldView& fld, const Nonlinearity& nl, double beta, double tol) {
  VerificationReport r;
  r.check_name = "apriori_bounds";
  const double bf = beta_f(nl);
  r.context = {{"beta", beta}, {"beta_f", bf}, {"alpha_minus", nl.alpha_minus()},
               {"alpha_plus", nl.alpha_plus()}, {"tol", tol}};
  const Field& u = fld.values();
  if (beta < bf - 1e-9 * std::max(1.0, bf)) {
    r.verdict = Verdict::HypothesisFailed;
    r.margin = beta - bf;
    r.passed = false;
    Witness w;
    w.note = "beta below beta_f";
    r.witness = w;
    return r;
  }
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double below = *lo - nl.alpha_minus();
  const double above = nl.alpha_plus() - *hi;
  r.margin = std::min(below, above);
  r.context.emplace_back("min", *lo);
  r.context.emplace_back("max", *hi);
  finish(r, tol);
  const auto at = below <= above ? lo : hi;
  r.witness = node_witness(fld.grid(), static_cast<std::size_t>(at - u.begin()), below <= above ? "minimum" : "maximum");
  return r;
}

VerificationReport check_one_dimensionality(const FieldView& fld, double tol) {
  const StripGrid& g = fld.grid();
  if (g.transverse_axes() == 0) throw Error(Errc::NoTransverseAxis, "one-dimensionality needs a transverse axis");
  const Field& u = fld.values();
  const std::size_t n = g.axial_size();
  double worst = 0.0;
  std::size_t worst_flat = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t imin = g.index(0, j), imax = imin;
    for (std::size_t line = 1; line < g.lines(); ++line) {
      const std::size_t i = g.index(line, j);
      if (u[i] < u[imin]) imin = i;
      if (u[i] > u[imax]) imax = i;
    }
    const double osc = u[imax] - u[imin];
    if (osc > worst) {
      worst = osc;
      worst_flat = imax;
    }
  }
  VerificationReport r;
  r.check_name = "one_dimensionality";
  r.margin = tol - worst;
  r.context = {{"tol", tol}, {"max_oscillation", worst}, {"margin_threshold", 0.0}};
  finish(r, 0.0);
  r.witness = node_witness(g, worst_flat, "row maximum of the worst transverse oscillation");
  return r;
}

VerificationReport check_monotonicity(const FieldView& fld, double tol) {
  const StripGrid& g = fld.grid();
  const Field& u = fld.values();
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_flat = 0;
  for (std::size_t line = 0; line < g.lines(); ++line) {
    for (std::size_t j = 0; j + 1 < g.axial_size(); ++j) {
      const std::size_t i = g.index(line, j);
      const double d = u[i + 1] - u[i];
      if (d < worst) {
        worst = d;
        worst_flat = i;
      }
    }
  }
  VerificationReport r;
  r.check_name = "monotonicity";
  r.margin = std::isinf(worst) ? 0.0 : worst;
  r.context = {{"tol", tol}};
  finish(r, tol);
  r.witness = node_witness(g, worst_flat, "lower node of the smallest axial difference");
  return r;
}

VerificationReport check_comparison_halfspace(const FieldView& z1, const FieldView& z2, double lambda,
                                              const Nonlinearity& nl, double beta, HalfSpace side,
                                              double tol) {
  const StripGrid& g = z1.grid();
  if (!(g == z2.grid())) throw Error(Errc::GridMismatch, "comparison fields live on different grids");
  const Field& a = z1.values();
  const Field& b = z2.values();
  const std::size_t n = g.axial_size();
  if (n < 3) throw Error(Errc::TooFewNodes, "comparison needs an interior row");
  const bool upper = side == HalfSpace::Upper;

  VerificationReport r;
  r.check_name = upper ? "comparison_upper" : "comparison_lower";
  r.context = {{"beta", beta}, {"lambda", lambda}, {"tol", tol}};

  // lambda must be a positive root of lambda^2 - beta lambda + omega.
  const double omega = omega_min(nl);
  const double root_defect = lambda * lambda - beta * lambda + omega;
  r.context.emplace_back("omega", omega);
  if (!(lambda > 0.0) || std::abs(root_defect) > 1e-8 * std::max(1.0, beta * beta)) {
    r.verdict = Verdict::HypothesisFailed;
    r.margin = -std::abs(root_defect);
    r.passed = false;
    Witness w;
    w.note = "lambda is not a positive splitting root";
    r.witness = w;
    return r;
  }

  const Field la = laplacian(a, g);
  const Field lb = laplacian(b, g);
  const double alpha = upper ? nl.alpha_plus() : nl.alpha_minus();
  const double near = upper ? nl.alpha_plus() - nl.delta() : nl.alpha_minus() + nl.delta();

  // Per-row slacks of the hypothesis block; each must be >= -tol.
  std::vector<double> order(n), wplane(n), closeness(n), range(n);
  std::vector<std::size_t> order_at(n), wplane_at(n), closeness_at(n), range_at(n);
  for (std::size_t j = 0; j < n; ++j) {
    order[j] = wplane[j] = closeness[j] = range[j] = std::numeric_limits<double>::infinity();
    for (std::size_t line = 0; line < g.lines(); ++line) {
      const std::size_t i = g.index(line, j);
      const double d = b[i] - a[i];
      if (d < order[j]) order[j] = d, order_at[j] = i;
      if (j > 0 && j + 1 < n) {
        const double dw = (la[i] - lambda * a[i]) - (lb[i] - lambda * b[i]);
        if (dw < wplane[j]) wplane[j] = dw, wplane_at[j] = i;
      }
      const double c = upper ? b[i] - near : near - a[i];
      if (c < closeness[j]) closeness[j] = c, closeness_at[j] = i;
      for (const Field* z : {&a, &b}) {
        const double s = std::min((*z)[i] - nl.alpha_minus(), nl.alpha_plus() - (*z)[i]);
        if (s < range[j]) range[j] = s, range_at[j] = i;
      }
    }
  }
  // Far-end row stands in for the limit at infinity.
  const std::size_t far = upper ? n - 1 : 0;
  double limit = std::numeric_limits<double>::infinity();
  std::size_t limit_at = g.index(0, far);
  for (std::size_t line = 0; line < g.lines(); ++line) {
    const std::size_t i = g.index(line, far);
    const double s = -std::max(std::abs(a[i] - alpha), std::abs(b[i] - alpha));
    if (s < limit) limit = s, limit_at = i;
  }
  double global_range = std::numeric_limits<double>::infinity();
  std::size_t global_range_at = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (range[j] < global_range) global_range = range[j], global_range_at = range_at[j];
  }

  // Closeness must hold on the whole half-grid beyond the plane.
  std::vector<double> close_beyond(n);
  std::vector<std::size_t> close_beyond_at(n);
  if (upper) {
    close_beyond[n - 1] = closeness[n - 1], close_beyond_at[n - 1] = closeness_at[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) {
      const bool own = closeness[j] < close_beyond[j + 1];
      close_beyond[j] = own ? closeness[j] : close_beyond[j + 1];
      close_beyond_at[j] = own ? closeness_at[j] : close_beyond_at[j + 1];
    }
  } else {
    close_beyond[0] = closeness[0], close_beyond_at[0] = closeness_at[0];
    for (std::size_t j = 1; j < n; ++j) {
      const bool own = closeness[j] < close_beyond[j - 1];
      close_beyond[j] = own ? closeness[j] : close_beyond[j - 1];
      close_beyond_at[j] = own ? closeness_at[j] : close_beyond_at[j - 1];
    }
  }

  struct Slack {
    double value;
    std::size_t at;
    const char* what;
  };
  auto plane_slack = [&](std::size_t j) {
    Slack s{global_range, global_range_at, "range"};
    for (const Slack& c : {Slack{limit, limit_at, "far-end limit"}, Slack{order[j], order_at[j], "plane ordering"},
                           Slack{wplane[j], wplane_at[j], "plane ordering of Lap - lambda"},
                           Slack{close_beyond[j], close_beyond_at[j], "closeness to the equilibrium"}}) {
      if (c.value < s.value) s = c;
    }
    return s;
  };

  // Upper: smallest admissible interior plane. Lower: largest.
  std::size_t plane = n;
  Slack best{-std::numeric_limits<double>::infinity(), 0, ""};
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const std::size_t j = upper ? k : n - 1 - k;
    const Slack s = plane_slack(j);
    if (s.value >= -tol) {
      plane = j;
      break;
    }
    if (s.value > best.value) best = s;
  }
  if (plane == n) {
    r.verdict = Verdict::HypothesisFailed;
    r.margin = best.value;
    r.passed = false;
    r.witness = node_witness(g, best.at, std::string("hypothesis: ") + best.what);
    return r;
  }
  r.context.emplace_back("plane_row", static_cast<std::int64_t>(plane));
  r.context.emplace_back("plane_height", g.axial_coordinate(plane));

  // Conclusion strictly beyond the plane, interior rows only.
  const std::size_t j0 = upper ? plane + 1 : 1;
  const std::size_t j1 = upper ? n - 1 : plane;
  double margin = std::numeric_limits<double>::infinity();
  std::size_t at = g.index(0, plane);
  const char* what = "plane";
  for (std::size_t line = 0; line < g.lines(); ++line) {
    for (std::size_t j = j0; j < j1; ++j) {
      const std::size_t i = g.index(line, j);
      const double d = b[i] - a[i];
      const double dw = (la[i] - lambda * a[i]) - (lb[i] - lambda * b[i]);
      if (d < margin) margin = d, at = i, what = "z1 <= z2";
      if (dw < margin) margin = dw, at = i, what = "Lap z1 - lambda z1 >= Lap z2 - lambda z2";
    }
  }
  if (j0 >= j1) margin = 0.0;  // empty half-grid
  r.margin = margin;
  finish(r, tol);
  r.witness = node_witness(g, at, what);
  return r;
}

SlidingResult sliding_tau_star(const FieldView& fld, const std::vector<double>& xi_prime, double tau_max,
                               std::size_t n_tau, double tol) {
  const StripGrid& g = fld.grid();
  if (xi_prime.size() != g.transverse_axes()) {
    throw Error(Errc::InvalidArgument, "shift needs one component per transverse axis");
  }
  if (n_tau == 0 || !(tau_max > 0.0)) throw Error(Errc::InvalidArgument, "tau range must be non-empty");
  std::vector<std::size_t> roll(xi_prime.size());
  for (std::size_t a = 0; a < xi_prime.size(); ++a) {
    const double cells = xi_prime[a] / g.transverse_spacing(a);
    const double k = std::round(cells);
    if (std::abs(cells - k) > 1e-9 * std::max(1.0, std::abs(cells))) {
      throw Error(Errc::ShiftNotOnGrid, "transverse shift is not a multiple of the spacing");
    }
    const auto m = static_cast<long long>(g.transverse_size(a));
    roll[a] = static_cast<std::size_t>(((static_cast<long long>(k) % m) + m) % m);
  }
  // Source line of every line under x' -> x' + xi'.
  std::vector<std::size_t> source(g.lines());
  for (std::size_t line = 0; line < g.lines(); ++line) {
    const auto c = g.line_coords(line);
    std::size_t s = 0;
    for (std::size_t a = 0; a < c.size(); ++a) s = s * g.transverse_size(a) + (c[a] + roll[a]) % g.transverse_size(a);
    source[line] = s;
  }

  const Field& u = fld.values();
  const std::size_t n = g.axial_size();
  const double h = g.axial_spacing();
  SlidingResult out;
  out.xi_prime = xi_prime;
  out.resolution = tau_max / static_cast<double>(n_tau);
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_flat = 0;
  for (std::size_t k = 1; k <= n_tau; ++k) {
    const double tau = out.resolution * static_cast<double>(k);
    double vmin = std::numeric_limits<double>::infinity();
    std::size_t vat = 0;
    for (std::size_t line = 0; line < g.lines(); ++line) {
      const double* src = u.data() + g.index(source[line], 0);
      for (std::size_t j = 0; j < n; ++j) {
        const double p = static_cast<double>(j) - tau / h;
        double shifted;
        if (p <= 0.0) {
          shifted = src[0];
        } else {
          const auto i = static_cast<std::size_t>(p);
          const double w = p - static_cast<double>(i);
          shifted = w == 0.0 ? src[i] : src[i] + w * (src[i + 1] - src[i]);
        }
        const std::size_t flat = g.index(line, j);
        const double d = u[flat] - shifted;
        if (d < vmin) vmin = d, vat = flat;
      }
    }
    out.tau_grid.push_back(tau);
    out.violation_curve.push_back(vmin);
    if (vmin < worst) worst = vmin, worst_flat = vat;
  }
  std::size_t last_bad = 0;  // 1-based; 0 means none
  for (std::size_t k = 0; k < n_tau; ++k) {
    if (out.violation_curve[k] < -tol) last_bad = k + 1;
  }
  if (last_bad == 0) {
    out.tau_star = 0.0;
  } else if (last_bad == n_tau) {
    out.tau_star = std::numeric_limits<double>::infinity();
  } else {
    out.tau_star = out.tau_grid[last_bad];
  }
  for (std::size_t k = 1; k < n_tau; ++k) {
    if (out.violation_curve[k] < out.violation_curve[k - 1] - tol) out.curve_monotone = false;
  }
  const Witness w = node_witness(g, worst_flat);
  out.worst_index = w.index;
  out.worst_position = w.position;
  return out;
}

VerificationReport sliding_report(const SlidingResult& s, double tol) {
  VerificationReport r;
  r.check_name = "sliding";
  r.margin = *std::min_element(s.violation_curve.begin(), s.violation_curve.end());
  r.context = {{"tol", tol}, {"tau_star", s.tau_star}, {"resolution", s.resolution},
               {"tau_max", s.tau_grid.back()}, {"curve_monotone", s.curve_monotone}};
  for (std::size_t a = 0; a < s.xi_prime.size(); ++a) {
    r.context.emplace_back("xi_prime_" + std::to_string(a), s.xi_prime[a]);
  }
  finish(r, tol);
  Witness w;
  w.index = s.worst_index;
  w.position = s.worst_position;
  w.note = "node of the smallest u - u_tau";
  r.witness = w;
  return r;
}

VerificationReport liouville_experiment(const Nonlinearity& nl, double beta, LiouvilleSide which,
                                        const StripGrid& grid, const std::vector<InitSpec>& inits, double tol,
                                        const StripSolveSettings& settings, std::vector<SolutionField>* fields) {
  const bool minus = which == LiouvilleSide::Minus;
  const double target = minus ? nl.alpha_minus() : nl.alpha_plus();
  VerificationReport r;
  r.check_name = minus ? "liouville_minus" : "liouville_plus";
  const double omega = omega_min(nl);
  r.context = {{"beta", beta}, {"omega", omega}, {"target", target}, {"tol", tol}, {"margin_threshold", 0.0},
               {"damping", settings.damping}, {"solve_tol", settings.tol},
               {"max_iter", static_cast<std::int64_t>(settings.max_iter)}};

  auto hypothesis_failed = [&](double margin, Witness w) {
    r.verdict = Verdict::HypothesisFailed;
    r.passed = false;
    r.margin = margin;
    r.witness = std::move(w);
    return r;
  };

  try {
    split_params(beta, omega);
  } catch (const Error& e) {
    if (e.code() != Errc::BelowCritical) throw;
    Witness w;
    w.note = "beta below 2 sqrt(omega)";
    return hypothesis_failed(beta - 2.0 * std::sqrt(omega), w);
  }

  // Starts must stay away from the opposite equilibrium.
  std::vector<Field> starts;
  for (std::size_t k = 0; k < inits.size(); ++k) {
    InitParams p = inits[k].params;
    p.bc_bottom = p.bc_top = target;
    starts.push_back(make_initial_guess(inits[k].kind, grid, p));
    const auto [lo, hi] = std::minmax_element(starts.back().begin(), starts.back().end());
    const double gap = minus ? nl.alpha_plus() - *hi : *lo - nl.alpha_minus();
    if (!(gap > 0.0)) {
      Witness w = node_witness(grid, static_cast<std::size_t>((minus ? hi : lo) - starts.back().begin()),
                               "init " + std::to_string(k) + " reaches the opposite equilibrium");
      return hypothesis_failed(gap, w);
    }
  }

  double worst = 0.0;
  bool all_converged = true;
  std::optional<Witness> worst_at;
  for (std::size_t k = 0; k < inits.size(); ++k) {
    const std::string key = "init_" + std::to_string(k) + "_";
    r.context.emplace_back(key + "kind", std::string(to_string(inits[k].kind)));
    r.context.emplace_back(key + "seed", static_cast<std::int64_t>(inits[k].params.seed));
    try {
      SolutionField f =
          solve_strip(nl, beta, grid, target, target, starts[k], settings.damping, settings.tol, settings.max_iter);
      double dev = 0.0;
      std::size_t at = 0;
      for (std::size_t i = 0; i < f.u.size(); ++i) {
        const double d = std::abs(f.u[i] - target);
        if (d > dev) dev = d, at = i;
      }
      r.context.emplace_back(key + "status", std::string("converged"));
      r.context.emplace_back(key + "iterations", static_cast<std::int64_t>(f.iterations()));
      r.context.emplace_back(key + "residual", f.residual());
      r.context.emplace_back(key + "deviation", dev);
      if (!worst_at || dev > worst) {
        worst = dev;
        worst_at = node_witness(grid, at, "init " + std::to_string(k));
      }
      if (fields) fields->push_back(std::move(f));
    } catch (const NoConvergence& e) {
      all_converged = false;
      r.context.emplace_back(key + "status", std::string("no_convergence"));
      r.context.emplace_back(key + "iterations", static_cast<std::int64_t>(e.iterations()));
      r.context.emplace_back(key + "residual", e.last_residual());
    }
  }
  if (!all_converged) {
    r.margin = std::numeric_limits<double>::quiet_NaN();
    r.passed = false;
    r.verdict = Verdict::Failed;
    if (worst_at) {
      r.witness = worst_at;
    } else {
      Witness w;
      w.note = "no start converged";
      r.witness = w;
    }
    return r;
  }
  r.margin = tol - worst;
  finish(r, 0.0);
  if (worst_at) r.witness = worst_at;
  return r;
}

}  // namespace efk
