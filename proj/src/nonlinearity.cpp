#include "efk/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "efk/errors.hpp"

namespace efk {

namespace {

constexpr std::size_t kCoarseGrid = 1000;
constexpr std::size_t kFineGrid = 10000;
constexpr std::size_t kHypothesisSamples = 2000;

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = b;
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_hypotheses(const Nonlinearity::Definition& d) {
  auto fail = [&](const std::string& why) {
    throw Error(Errc::InvalidArgument, "nonlinearity '" + d.name + "': " + why);
  };
  if (!d.eval) fail("no evaluation map");
  if (!(d.alpha_minus < d.alpha_plus)) fail("alpha_minus must be < alpha_plus");
  if (!(d.delta > 0.0)) fail("delta must be positive");
  if (!(d.delta < 0.5 * (d.alpha_plus - d.alpha_minus))) {
    fail("delta must be < (alpha_plus - alpha_minus)/2");
  }
  if (!(d.window.lo <= d.alpha_minus && d.alpha_plus <= d.window.hi)) {
    fail("window must contain [alpha_minus, alpha_plus]");
  }

  double scale = 1.0;
  for (double s : linspace(d.alpha_minus, d.alpha_plus, 101)) {
    scale = std::max(scale, std::abs(d.eval(s)));
  }
  for (double a : {d.alpha_minus, d.alpha_plus}) {
    if (std::abs(d.eval(a)) > 1e-12 * scale) fail("f does not vanish at " + fmt(a));
  }

  auto strictly_decreasing = [&](double a, double b) {
    const auto s = linspace(a, b, kHypothesisSamples);
    double prev = d.eval(s[0]);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double cur = d.eval(s[i]);
      if (!(cur < prev)) return false;
      prev = cur;
    }
    return true;
  };
  if (!strictly_decreasing(d.alpha_minus, d.alpha_minus + d.delta) ||
      !strictly_decreasing(d.alpha_plus - d.delta, d.alpha_plus)) {
    fail("f is not strictly decreasing within delta of the zeros");
  }

  // f > 0 below alpha_-, f < 0 above alpha_+ (sampled on the window).
  if (d.window.lo < d.alpha_minus) {
    const auto s = linspace(d.window.lo, d.alpha_minus, kHypothesisSamples);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (!(d.eval(s[i]) > 0.0)) fail("f must be positive below alpha_minus (s=" + fmt(s[i]) + ")");
    }
  }
  if (d.window.hi > d.alpha_plus) {
    const auto s = linspace(d.alpha_plus, d.window.hi, kHypothesisSamples);
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!(d.eval(s[i]) < 0.0)) fail("f must be negative above alpha_plus (s=" + fmt(s[i]) + ")");
    }
  }
}

// Value of the slope -f'(a) at a zero a of f, from the derivative when
// available and a Richardson-extrapolated one-sided quotient otherwise.
double slope_at_zero(const Nonlinearity& nl, double a, int side) {
  if (nl.has_derivative()) return -nl.derivative(a);
  const double t = 1e-5;
  auto q = [&](double h) { return -(nl(a + side * h) - nl(a)) / (side * h); };
  return 2.0 * q(0.5 * t) - q(t);
}

}  // namespace

double ExtendedReal::value() const {
  if (kind_ != Kind::Finite) throw Error(Errc::InvalidArgument, "extended real is infinite");
  return value_;
}

Nonlinearity::Nonlinearity(Definition def) {
  check_hypotheses(def);
  def_ = std::make_shared<const Definition>(std::move(def));
}

double Nonlinearity::derivative(double s) const {
  if (def_->derivative) return def_->derivative(s);
  const double h = 1e-4 * std::max(1.0, std::abs(s));
  const auto& f = def_->eval;
  return (f(s - 2 * h) - 8 * f(s - h) + 8 * f(s + h) - f(s + 2 * h)) / (12 * h);
}

double Nonlinearity::primitive(double s) const {
  if (def_->primitive) return def_->primitive(s);
  using Quad = boost::math::quadrature::gauss<double, 20>;
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(s) / 0.25)));
  double total = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double a = s * k / pieces;
    const double b = s * (k + 1) / pieces;
    total += Quad::integrate(def_->eval, a, b);
  }
  return total;
}

Nonlinearity builtin_cubic() {
  Nonlinearity::Definition d;
  d.name = "cubic";
  d.eval = [](double s) { return s - s * s * s; };
  d.derivative = [](double s) { return 1.0 - 3.0 * s * s; };
  d.primitive = [](double s) { return 0.5 * s * s - 0.25 * s * s * s * s; };
  d.alpha_minus = -1.0;
  d.alpha_plus = 1.0;
  d.delta = 1.0 - 1.0 / std::sqrt(3.0);
  d.window = {-3.0, 3.0};
  return Nonlinearity(std::move(d));
}

Nonlinearity scaled_cubic(double c) {
  if (!(c > 0.0)) throw Error(Errc::NonPositive, "scaled_cubic needs c > 0");
  Nonlinearity::Definition d;
  d.name = "scaled_cubic";
  d.eval = [c](double s) { return c * (s - s * s * s); };
  d.derivative = [c](double s) { return c * (1.0 - 3.0 * s * s); };
  d.primitive = [c](double s) { return c * (0.5 * s * s - 0.25 * s * s * s * s); };
  d.alpha_minus = -1.0;
  d.alpha_plus = 1.0;
  d.delta = 1.0 - 1.0 / std::sqrt(3.0);
  d.window = {-3.0, 3.0};
  return Nonlinearity(std::move(d));
}

Nonlinearity clipped_cubic(double clip) {
  if (!(clip > 1.0)) throw Error(Errc::InvalidArgument, "clipped_cubic needs clip > 1");
  auto cubic = [](double s) { return s - s * s * s; };
  Nonlinearity::Definition d;
  d.name = "clipped_cubic";
  d.eval = [=](double s) { return cubic(std::clamp(s, -clip, clip)); };
  d.derivative = [=](double s) { return std::abs(s) < clip ? 1.0 - 3.0 * s * s : 0.0; };
  d.primitive = [=](double s) {
    const double c = std::clamp(s, -clip, clip);
    const double inner = 0.5 * c * c - 0.25 * c * c * c * c;
    return inner + cubic(c) * (s - c);
  };
  d.alpha_minus = -1.0;
  d.alpha_plus = 1.0;
  d.delta = 1.0 - 1.0 / std::sqrt(3.0);
  d.window = {-3.0 * clip, 3.0 * clip};
  return Nonlinearity(std::move(d));
}

namespace {

// Natural cubic spline with linear extension, plus its exact antiderivative.
struct CubicSpline {
  std::vector<double> x, y, m;  // m = second derivatives at the knots
  std::vector<double> cumulative;  // int_{x0}^{x_i}

  CubicSpline(std::vector<double> xs, std::vector<double> ys) : x(std::move(xs)), y(std::move(ys)) {
    const std::size_t n = x.size();
    m.assign(n, 0.0);
    if (n > 2) {
      std::vector<double> sub(n, 0.0), diag(n, 1.0), sup(n, 0.0), rhs(n, 0.0);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x[i] - x[i - 1];
        const double h1 = x[i + 1] - x[i];
        sub[i] = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        sup[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
      }
      for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      m[n - 1] = rhs[n - 1] / diag[n - 1];
      for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    cumulative.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
      cumulative[i] = cumulative[i - 1] + segment_integral(i - 1, x[i]);
    }
  }

  std::size_t segment(double s) const {
    auto it = std::upper_bound(x.begin(), x.end(), s);
    std::size_t i = static_cast<std::size_t>(std::distance(x.begin(), it));
    return std::clamp<std::size_t>(i, 1, x.size() - 1) - 1;
  }

  double end_slope(bool right) const {
    const std::size_t i = right ? x.size() - 2 : 0;
    const double h = x[i + 1] - x[i];
    const double base = (y[i + 1] - y[i]) / h;
    return right ? base + h * (m[i] + 2.0 * m[i + 1]) / 6.0 : base - h * (2.0 * m[i] + m[i + 1]) / 6.0;
  }

  double eval(double s) const {
    if (s < x.front()) return y.front() + end_slope(false) * (s - x.front());
    if (s > x.back()) return y.back() + end_slope(true) * (s - x.back());
    const std::size_t i = segment(s);
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - s) / h;
    const double b = (s - x[i]) / h;
    return a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
  }

  double deriv(double s) const {
    if (s < x.front()) return end_slope(false);
    if (s > x.back()) return end_slope(true);
    const std::size_t i = segment(s);
    const double h = x[i + 1] - x[i];
    const double a = (x[i + 1] - s) / h;
    const double b = (s - x[i]) / h;
    return (y[i + 1] - y[i]) / h + ((1.0 - 3.0 * a * a) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
  }

  // int_{x_i}^{s} on segment i.
  double segment_integral(std::size_t i, double s) const {
    const double h = x[i + 1] - x[i];
    const double b = (s - x[i]) / h;
    const double a = 1.0 - b;
    // d/ds of -a^2/2 h = a ; d/ds of b^2/2 h = b.
    auto lin = h * (y[i] * (0.5 - 0.5 * a * a) + y[i + 1] * 0.5 * b * b);
    auto cub = h * h * h / 6.0 *
               (m[i] * ((0.25 - 0.25 * a * a * a * a) - (0.5 - 0.5 * a * a)) +
                m[i + 1] * (0.25 * b * b * b * b - 0.5 * b * b));
    return lin + cub;
  }

  // int_{x0}^{s}
  double integral_from_start(double s) const {
    if (s < x.front()) {
      const double t = s - x.front();
      return y.front() * t + 0.5 * end_slope(false) * t * t;
    }
    if (s > x.back()) {
      const double t = s - x.back();
      return cumulative.back() + y.back() * t + 0.5 * end_slope(true) * t * t;
    }
    const std::size_t i = segment(s);
    return cumulative[i] + segment_integral(i, s);
  }
};

}  // namespace

Nonlinearity spline_nonlinearity(std::vector<double> knots, std::vector<double> values,
                                 double alpha_minus, double alpha_plus, double delta) {
  if (knots.size() != values.size() || knots.size() < 2) {
    throw Error(Errc::InvalidArgument, "spline table needs >= 2 knots and matching values");
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) throw Error(Errc::InvalidArgument, "spline knots must increase");
  }
  auto spline = std::make_shared<const CubicSpline>(knots, values);
  const double zero_offset = spline->integral_from_start(0.0);
  Nonlinearity::Definition d;
  d.name = "spline";
  d.eval = [spline](double s) { return spline->eval(s); };
  d.derivative = [spline](double s) { return spline->deriv(s); };
  d.primitive = [spline, zero_offset](double s) { return spline->integral_from_start(s) - zero_offset; };
  d.alpha_minus = alpha_minus;
  d.alpha_plus = alpha_plus;
  d.delta = delta;
  d.window = {std::min(knots.front(), alpha_minus), std::max(knots.back(), alpha_plus)};
  return Nonlinearity(std::move(d));
}

double omega_min(const Nonlinearity& nl, double tol) {
  const double a = nl.alpha_minus();
  const double b = nl.alpha_plus();

  // Minimum slope over a uniform grid with spacing (b-a)/(n-1); returns
  // (value, argmin position).
  auto min_slope = [&](double lo, double hi, std::size_t n) {
    const auto s = linspace(lo, hi, n);
    double best = std::numeric_limits<double>::infinity();
    double where = lo;
    if (nl.has_derivative()) {
      for (double si : s) {
        const double d = nl.derivative(si);
        if (d < best) best = d, where = si;
      }
    } else {
      for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double q = (nl(s[i + 1]) - nl(s[i])) / (s[i + 1] - s[i]);
        if (q < best) best = q, where = 0.5 * (s[i] + s[i + 1]);
      }
    }
    return std::pair{best, where};
  };

  auto [coarse, at] = min_slope(a, b, kCoarseGrid);
  const double ds = (b - a) / static_cast<double>(kCoarseGrid - 1);
  const double lo = std::max(a, at - 2 * ds);
  const double hi = std::min(b, at + 2 * ds);
  auto [fine, at_fine] = min_slope(lo, hi, kFineGrid);

  if (!nl.has_derivative()) {
    // Difference quotients of a Lipschitz function converge under
    // refinement; growth that does not settle means an unbounded slope.
    const double w = std::max(4 * ds / kFineGrid, 1e-12);
    auto local = [&](double width) { return min_slope(std::max(a, at_fine - width), std::min(b, at_fine + width), 201).first; };
    const double q1 = local(w * 100);
    const double q2 = local(w * 10);
    const double q3 = local(w);
    const double d1 = q1 - q2;
    const double d2 = q2 - q3;
    if (d2 > 0.5 * d1 && d2 > std::max(tol, 1e-6 * (1.0 + std::abs(q3)))) {
      throw Error(Errc::NonLipschitz, "difference quotients keep growing under refinement near s=" + fmt(at_fine));
    }
    fine = std::min(fine, q3);
  }

  const double omega = -std::min(coarse, fine);
  if (!(omega > 0.0)) {
    // f nondecreasing somewhere is impossible with decreasing zeros; any
    // positive omega works, keep the smallest meaningful one.
    return tol;
  }
  return omega;
}

double beta_f(const Nonlinearity& nl, double tol) {
  const double am = nl.alpha_minus();
  const double ap = nl.alpha_plus();

  // Sample set: coarse grid plus a fine patch around the largest ratio
  // f(s)/(alpha_+ - s) (f>0) or f(s)/(alpha_- - s) (f<0), which is the
  // local feasibility threshold for mu at s.
  std::vector<double> samples = linspace(am, ap, kCoarseGrid);
  auto ratio = [&](double s) {
    const double v = nl(s);
    if (v > 0.0 && s < ap) return v / (ap - s);
    if (v < 0.0 && s > am) return v / (am - s);
    return 0.0;
  };
  double best = 0.0;
  double where = am;
  for (double s : samples) {
    const double r = ratio(s);
    if (r > best) best = r, where = s;
  }
  const double ds = (ap - am) / static_cast<double>(kCoarseGrid - 1);
  for (double s : linspace(std::max(am, where - 2 * ds), std::min(ap, where + 2 * ds), kFineGrid)) {
    samples.push_back(s);
  }
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = nl(samples[i]);

  // Near the zeros the constraint degenerates to mu >= -f'(alpha_pm).
  const double slope_plus = slope_at_zero(nl, ap, -1);
  const double slope_minus = slope_at_zero(nl, am, +1);

  auto violation = [&](double mu) {
    double v = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double g = values[i] / mu + samples[i];
      v = std::max({v, g - ap, am - g});
    }
    v = std::max({v, slope_plus / mu - 1.0, slope_minus / mu - 1.0});
    return v;
  };

  constexpr double kMuLo = 1e-6;
  constexpr double kMuHi = 1e6;
  constexpr int kScan = 121;
  std::vector<double> mus(kScan), viol(kScan);
  for (int k = 0; k < kScan; ++k) {
    mus[k] = kMuLo * std::pow(kMuHi / kMuLo, static_cast<double>(k) / (kScan - 1));
    viol[k] = violation(mus[k]);
    if (k > 0 && viol[k] > viol[k - 1] * (1.0 + 1e-12) + 1e-15) {
      throw Error(Errc::NonMonotoneFeasibility,
                  "violation grows with mu between " + fmt(mus[k - 1]) + " and " + fmt(mus[k]));
    }
  }
  if (viol.back() > 0.0) {
    throw Error(Errc::NoThreshold, "no feasible mu below " + fmt(kMuHi));
  }
  if (viol.front() <= 0.0) return 2.0 * std::sqrt(kMuLo);

  int first_ok = kScan - 1;
  while (first_ok > 0 && viol[first_ok - 1] <= 0.0) --first_ok;
  double lo = mus[first_ok - 1];
  double hi = mus[first_ok];
  while (2.0 * (std::sqrt(hi) - std::sqrt(lo)) > tol && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi) {
    const double mid = 0.5 * (lo + hi);
    const double v = violation(mid);
    if (v <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 2.0 * std::sqrt(hi);
}

Envelope envelope_lemma1(const Nonlinearity& nl, double m_u, double M_u, double beta,
                         std::size_t grid_n) {
  if (m_u > M_u) throw Error(Errc::BadRange, "m_u > M_u");
  if (!(beta > 0.0)) throw Error(Errc::NonPositive, "beta must be positive");
  grid_n = std::max<std::size_t>(grid_n, 2);

  const auto s = linspace(m_u, M_u, m_u == M_u ? 1 : grid_n);
  std::vector<double> fs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) fs[i] = nl(s[i]);

  const double mu_max = 0.25 * beta * beta;
  constexpr int kMu = 400;
  Envelope env{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (int k = 0; k <= kMu; ++k) {
    // log-spaced on [mu_max * 1e-8, mu_max], last point exactly mu_max.
    const double mu = k == kMu ? mu_max : mu_max * std::pow(1e-8, 1.0 - static_cast<double>(k) / kMu);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double g = fs[i] / mu + s[i];
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    env.lower = std::max(env.lower, lo);
    env.upper = std::min(env.upper, hi);
  }
  return env;
}

Thresholds m_M_of_beta(const Nonlinearity& nl, double beta, double search_radius) {
  const double bf = beta_f(nl);
  if (beta < bf * (1.0 - 1e-12)) {
    throw Error(Errc::BelowThreshold, "beta=" + fmt(beta) + " < beta_f=" + fmt(bf));
  }
  const double am = nl.alpha_minus();
  const double ap = nl.alpha_plus();
  if (search_radius < 0.0) search_radius = 10.0 * (ap - am);

  // phi(s) = 4 f(s)/beta^2 + s - (alpha_- + alpha_+ - s)
  auto phi = [&](double s) { return 4.0 * nl(s) / (beta * beta) + 2.0 * s - (am + ap); };
  constexpr int kScan = 20000;

  auto refine = [&](double lo, double hi) {
    // phi(lo), phi(hi) have opposite signs (or one is zero).
    if (phi(lo) == 0.0) return lo;
    if (phi(hi) == 0.0) return hi;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::bisect(phi, lo, hi, boost::math::tools::eps_tolerance<double>(), iters);
    return 0.5 * (r.first + r.second);
  };

  Thresholds out{ExtendedReal::neg_inf(), ExtendedReal::pos_inf()};

  // Upward from alpha_+: phi(alpha_+) = alpha_+ - alpha_- > 0.
  double prev = ap;
  for (int k = 1; k <= kScan; ++k) {
    const double s = ap + search_radius * k / kScan;
    if (phi(s) <= 0.0) {
      out.M = ExtendedReal::finite(refine(prev, s));
      break;
    }
    prev = s;
  }
  // Downward from alpha_-: phi(alpha_-) = alpha_- - alpha_+ < 0.
  prev = am;
  for (int k = 1; k <= kScan; ++k) {
    const double s = am - search_radius * k / kScan;
    if (phi(s) >= 0.0) {
      out.m = ExtendedReal::finite(refine(s, prev));
      break;
    }
    prev = s;
  }
  return out;
}

double gamma_to_beta(double gamma) {
  if (!(gamma > 0.0)) throw Error(Errc::NonPositive, "gamma must be positive");
  return std::sqrt(1.0 / gamma);
}

BoundsProfile::BoundsProfile(Nonlinearity nl, std::span<const double> betas, double tol)
    : nl_(std::move(nl)), omega_(omega_min(nl_, tol)), beta_f_(efk::beta_f(nl_, tol)) {
  samples_.reserve(betas.size());
  for (double b : betas) {
    auto t = m_M_of_beta(nl_, b);
    samples_.push_back({b, t.m, t.M});
  }
}

}  // namespace efk
