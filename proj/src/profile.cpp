#include <algorithm>
#include <cmath>
#include <optional>

#include "efk/errors.hpp"
#include "efk/ode1d.hpp"

namespace efk {

namespace {

// First differences smaller than this (relative to the value range) are
// treated as flat when reading off monotonicity and extrema.
constexpr double kFlatSlack = 1e-10;

void require_nodes(const Profile1D& p, std::size_t n) {
  if (p.values.size() < n) {
    throw Error(Errc::TooFewNodes, "profile has " + std::to_string(p.values.size()) + " nodes, need " + std::to_string(n));
  }
}

std::optional<double> first_crossing(const Profile1D& p, double level) {
  for (std::size_t i = 0; i + 1 < p.values.size(); ++i) {
    const double a = p.values[i] - level;
    const double b = p.values[i + 1] - level;
    if (a == 0.0) return p.grid.x(i);
    if ((a < 0.0) != (b < 0.0) && b != 0.0) {
      return p.grid.x(i) + p.grid.spacing() * a / (a - b);
    }
    if (b == 0.0) return p.grid.x(i + 1);
  }
  return std::nullopt;
}

double sample_linear(const Profile1D& p, double x) {
  const double h = p.grid.spacing();
  const double t = (x + p.grid.half_width) / h;
  if (t <= 0.0) return p.values.front();
  const auto last = static_cast<double>(p.values.size() - 1);
  if (t >= last) return p.values.back();
  const auto i = static_cast<std::size_t>(t);
  const double w = t - static_cast<double>(i);
  return (1.0 - w) * p.values[i] + w * p.values[i + 1];
}

}  // namespace

const char* to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Kink: return "kink";
    case ProfileKind::Pulse: return "pulse";
    case ProfileKind::Constant: return "constant";
    case ProfileKind::Other: return "other";
  }
  return "other";
}

Profile1D constant_profile(double value, double beta, double half_width, std::size_t n) {
  Profile1D p;
  p.grid = {half_width, n};
  p.values.assign(n, value);
  p.beta = beta;
  p.kind = ProfileKind::Constant;
  p.left_limit = p.right_limit = value;
  p.method = "constant";
  return p;
}

std::vector<double> first_integral(const Profile1D& p, const Nonlinearity& nl) {
  require_nodes(p, 5);
  const double h = p.grid.spacing();
  const auto& u = p.values;
  std::vector<double> e;
  e.reserve(u.size() - 4);
  for (std::size_t i = 2; i + 2 < u.size(); ++i) {
    const double d1 = (u[i + 1] - u[i - 1]) / (2 * h);
    const double d2 = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
    const double d3 = (u[i + 2] - 2 * u[i + 1] + 2 * u[i - 1] - u[i - 2]) / (2 * h * h * h);
    e.push_back(p.fourth_order_coeff * (d3 * d1 - 0.5 * d2 * d2) - 0.5 * p.beta * d1 * d1 - nl.primitive(u[i]));
  }
  return e;
}

ProfileClassification classify_profile(const Profile1D& p) {
  ProfileClassification c;
  const auto& u = p.values;
  if (u.empty()) return c;

  int last_sign = 0;
  for (double v : u) {
    const int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) ++c.zeros;
    last_sign = s;
  }

  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double slack = kFlatSlack * std::max(1.0, *hi - *lo);
  bool up = true;
  bool down = true;
  int trend = 0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double d = u[i + 1] - u[i];
    if (d < -slack) up = false;
    if (d > slack) down = false;
    const int s = d > slack ? 1 : (d < -slack ? -1 : 0);
    if (s == 0) continue;
    if (trend != 0 && s != trend) {
      ++c.extrema;
      const double v = u[i];
      c.amplitudes.push_back(std::min(std::abs(v - p.left_limit), std::abs(v - p.right_limit)));
    }
    trend = s;
  }
  c.monotone = up || down;
  return c;
}

double residual_1d(const Profile1D& p, const Nonlinearity& nl) {
  require_nodes(p, 5);
  const double h = p.grid.spacing();
  const double h2 = h * h;
  const double h4 = h2 * h2;
  const auto& u = p.values;
  double r = 0.0;
  for (std::size_t i = 2; i + 2 < u.size(); ++i) {
    const double d4 = (u[i - 2] - 4 * u[i - 1] + 6 * u[i] - 4 * u[i + 1] + u[i + 2]) / h4;
    const double d2 = (u[i - 1] - 2 * u[i] + u[i + 1]) / h2;
    r = std::max(r, std::abs(p.fourth_order_coeff * d4 - p.beta * d2 - nl(u[i])));
  }
  return r;
}

double aligned_sup_distance(const Profile1D& a, const Profile1D& b) {
  const auto za = first_crossing(a, 0.5 * (a.left_limit + a.right_limit));
  const auto zb = first_crossing(b, 0.5 * (b.left_limit + b.right_limit));
  if (!za || !zb) throw Error(Errc::InvalidArgument, "profiles must cross the midpoint of their limits");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = a.grid.x(i) - *za + *zb;
    d = std::max(d, std::abs(a.values[i] - sample_linear(b, x)));
  }
  return d;
}

Profile1D shift_profile(const Profile1D& p, long k) {
  Profile1D out = p;
  const long n = static_cast<long>(p.values.size());
  for (long i = 0; i < n; ++i) {
    const long src = i - k;
    out.values[static_cast<std::size_t>(i)] =
        src < 0 ? p.values.front() : (src >= n ? p.values.back() : p.values[static_cast<std::size_t>(src)]);
  }
  return out;
}

}  // namespace efk
