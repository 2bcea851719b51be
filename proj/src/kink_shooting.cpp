#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "efk/errors.hpp"
#include "efk/ode1d.hpp"

namespace efk {

namespace {

using State = std::array<double, 4>;  // (u, u', u'', u''')

// Dormand-Prince 5(4) with step control (Boost.Odeint), landing exactly on
// x = k h. `visit(k, y)` is called on every node and returns false to stop.
class NodeIntegrator {
 public:
  NodeIntegrator(std::function<State(const State&)> rhs, double tol) : rhs_(std::move(rhs)), tol_(tol) {}

  // Returns false if the step size collapsed or the state became non-finite.
  bool run(State y, double h_node, std::size_t nodes, const std::function<bool(std::size_t, const State&)>& visit) {
    namespace odeint = boost::numeric::odeint;
    if (!visit(0, y)) return true;
    auto stepper = odeint::make_controlled(tol_, tol_, odeint::runge_kutta_dopri5<State>());
    const auto system = [this](const State& x, State& dxdt, double) { dxdt = rhs_(x); };
    double step = std::min(h_node, 1e-2);
    for (std::size_t k = 1; k < nodes; ++k) {
      try {
        odeint::integrate_adaptive(stepper, system, y, 0.0, h_node, step);
      } catch (const std::exception&) {
        return false;
      }
      for (double v : y) {
        if (!std::isfinite(v)) return false;
      }
      if (!visit(k, y)) return true;
    }
    return true;
  }

 private:
  std::function<State(const State&)> rhs_;
  double tol_;
};

// C-infinity transition from 0 at s <= 0 to 1 at s >= 1.
double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s);
  const double b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

enum class Outcome { Up, Down, Captured, Blowup };

struct Shot {
  Outcome outcome = Outcome::Blowup;
  std::vector<State> states;  // states at nodes 0..last visited
};

// Linear tail near an equilibrium: keeps only the decaying modes of the
// state deviation, which removes the exponentially growing shooting error.
class StableTail {
 public:
  StableTail(double c4, double c2, double fprime, const State& deviation) {
    using C = std::complex<double>;
    // c4 mu^4 - c2 mu^2 - f' = 0
    const double b = c2 / c4;
    const double c = -fprime / c4;
    const C root = std::sqrt(C(b * b - 4.0 * c, 0.0));
    const std::array<C, 2> sq{0.5 * (b + root), 0.5 * (b - root)};
    for (int j = 0; j < 2; ++j) {
      mu_[2 * j] = std::sqrt(sq[j]);
      mu_[2 * j + 1] = -mu_[2 * j];
    }
    Eigen::Matrix4cd basis;
    for (int k = 0; k < 4; ++k) {
      secular_[k] = false;
      for (int j = 0; j < k; ++j) {
        if (std::abs(mu_[k] - mu_[j]) < 1e-7 * std::max(1.0, std::abs(mu_[k]))) secular_[k] = true;
      }
      const C m = mu_[k];
      if (secular_[k]) {
        basis.col(k) << 0.0, 1.0, 2.0 * m, 3.0 * m * m;  // t e^{mu t}
      } else {
        basis.col(k) << 1.0, m, m * m, m * m * m;
      }
    }
    Eigen::Vector4cd w;
    w << deviation[0], deviation[1], deviation[2], deviation[3];
    const Eigen::Vector4cd coeff = basis.fullPivLu().solve(w);
    for (int k = 0; k < 4; ++k) coeff_[k] = coeff[k];
  }

  // Size of the growing part of the fitted state; this is what gets
  // discarded, so it is the jump the stitch introduces.
  double unstable_size() const {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (mu_[k].real() >= 0.0) s += std::abs(coeff_[k]) * std::max(1.0, std::pow(std::abs(mu_[k]), 3));
    }
    return s;
  }

  double slowest_decay() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& m : mu_) {
      if (m.real() < 0.0) r = std::min(r, -m.real());
    }
    return r;
  }

  double operator()(double t) const {
    std::complex<double> s = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (mu_[k].real() >= 0.0) continue;
      const auto e = std::exp(mu_[k] * t);
      s += coeff_[k] * (secular_[k] ? t * e : e);
    }
    return s.real();
  }

 private:
  std::array<std::complex<double>, 4> mu_{};
  std::array<std::complex<double>, 4> coeff_{};
  std::array<bool, 4> secular_{};
};

struct ShootingSetup {
  double c4 = 1.0;
  double beta = 0.0;
  double target = 1.0;       // equilibrium approached as x -> +inf
  double up_escape = 2.0;    // u above this cannot be a bounded solution
  double down_escape = 0.0;  // u below this counts as falling back
  double tube = 0.5;
};

class Shooter {
 public:
  Shooter(const Nonlinearity& nl, ShootingSetup setup, double h, std::size_t nodes, double tol)
      : nl_(nl), setup_(setup), h_(h), nodes_(nodes), tol_(tol) {}

  Shot shoot(const State& y0) const {
    Shot shot;
    const double c4 = setup_.c4;
    const double beta = setup_.beta;
    NodeIntegrator integ([&](const State& y) { return State{y[1], y[2], y[3], (beta * y[2] + nl_(y[0])) / c4}; }, tol_);
    shot.outcome = Outcome::Captured;
    const bool ok = integ.run(y0, h_, nodes_, [&](std::size_t k, const State& y) {
      shot.states.push_back(y);
      if (std::abs(y[0]) > 10.0) {
        shot.outcome = Outcome::Blowup;
        return false;
      }
      if (y[0] > setup_.up_escape) {
        shot.outcome = Outcome::Up;
        return false;
      }
      if (k > 0 && y[0] < setup_.down_escape) {
        shot.outcome = Outcome::Down;
        return false;
      }
      return true;
    });
    if (!ok) shot.outcome = Outcome::Blowup;
    return shot;
  }

  struct Fit {
    std::size_t node;
    double score;  // discarded growing part plus linearization error
  };

  // Node where switching to the linear tail costs least; node == size()
  // when the trajectory never entered the tube.
  Fit fit_node(const Shot& shot) const {
    const double fprime = nl_.derivative(setup_.target);
    Fit fit{shot.states.size(), std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < shot.states.size(); ++k) {
      const State& y = shot.states[k];
      if (std::abs(y[0] - setup_.target) >= setup_.tube) continue;
      const State dev{y[0] - setup_.target, y[1], y[2], y[3]};
      const double d = std::abs(dev[0]) + std::abs(dev[1]) + std::abs(dev[2]) + std::abs(dev[3]);
      const double score = StableTail(setup_.c4, setup_.beta, fprime, dev).unstable_size() + d * d;
      if (score < fit.score) fit = {k, score};
    }
    return fit;
  }

  // Fills half-line nodes 0..nodes-1 from the shot, switching to the
  // stable tail around the cheapest fit node.
  std::vector<double> half_profile(const Shot& shot) const {
    const double fprime = nl_.derivative(setup_.target);
    const std::size_t best = fit_node(shot).node;
    if (best == shot.states.size()) {
      throw NoConvergence("shooting trajectory never entered the tube around the equilibrium", {}, 0);
    }
    const State& y = shot.states[best];
    const StableTail tail(setup_.c4, setup_.beta, fprime, State{y[0] - setup_.target, y[1], y[2], y[3]});
    // Blend trajectory and tail over a window of one decay length on each
    // side of the fit node; a hard switch would show up as a jump that the
    // fourth difference amplifies by 1/h^4.
    std::size_t wn = static_cast<std::size_t>(std::ceil(1.0 / (tail.slowest_decay() * h_)));
    wn = std::min({wn, best, shot.states.size() - 1 - best});
    std::vector<double> half(nodes_);
    for (std::size_t k = 0; k < nodes_; ++k) {
      const double t = h_ * (static_cast<double>(k) - static_cast<double>(best));
      if (k + wn < best) {
        half[k] = shot.states[k][0];
      } else if (k > best + wn) {
        half[k] = setup_.target + tail(t);
      } else {
        const double w = wn == 0 ? 1.0 : smooth_step(static_cast<double>(k + wn - best) / (2.0 * wn));
        half[k] = (1.0 - w) * shot.states[k][0] + w * (setup_.target + tail(t));
      }
    }
    return half;
  }

 private:
  const Nonlinearity& nl_;
  ShootingSetup setup_;
  double h_;
  std::size_t nodes_;
  double tol_;
};

// Bisection on a scalar parameter whose shots escape Up on one side and
// Down on the other. Returns the surviving shot at the converged parameter.
Shot bisect(const Shooter& shooter, const std::function<State(double)>& initial, Interval bracket,
            std::size_t max_iter, bool oscillatory) {
  Shot lo = shooter.shoot(initial(bracket.lo));
  Shot hi = shooter.shoot(initial(bracket.hi));
  for (const Shot* s : {&lo, &hi}) {
    if (s->outcome == Outcome::Blowup) throw Error(Errc::Blowup, "trajectory escaped |u| > 10 at a bracket end");
    if (s->outcome == Outcome::Captured) return *s;
  }
  if (lo.outcome == hi.outcome) {
    throw Error(Errc::BracketNotStraddling, "both bracket ends escape in the same direction");
  }
  if (!oscillatory) {
    double a = bracket.lo;
    double b = bracket.hi;
    for (std::size_t it = 0; it < max_iter; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      Shot s = shooter.shoot(initial(mid));
      if (s.outcome == Outcome::Blowup) throw Error(Errc::Blowup, "trajectory escaped |u| > 10");
      if (s.outcome == Outcome::Captured) return s;
      if (s.outcome == lo.outcome) {
        a = mid;
        lo = std::move(s);
      } else {
        b = mid;
        hi = std::move(s);
      }
    }
    return lo.states.size() >= hi.states.size() ? lo : hi;
  }

  // Near a saddle-focus the escape direction flips infinitely often as the
  // parameter approaches the connection, so a sign change only locates a
  // phase switch. Zoom in on the smallest tail-fit cost instead; it
  // vanishes only on the connection.
  constexpr int kSamples = 33;
  double a = bracket.lo;
  double b = bracket.hi;
  Shot best;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t round = 0; round < max_iter; ++round) {
    const double step = (b - a) / (kSamples - 1);
    if (!(step > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))) break;
    int arg = -1;
    double round_score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kSamples; ++j) {
      Shot s = shooter.shoot(initial(a + step * j));
      if (s.outcome == Outcome::Captured) return s;
      if (s.outcome == Outcome::Blowup) continue;
      const double score = shooter.fit_node(s).score;
      if (score < round_score) {
        arg = j;
        round_score = score;
        if (score <= best_score) best_score = score, best = std::move(s);
      }
    }
    if (arg < 0) throw Error(Errc::BracketNotStraddling, "no trajectory in the bracket approaches the equilibrium");
    const double lo_new = a + step * std::max(0, arg - 2);
    const double hi_new = a + step * std::min(kSamples - 1, arg + 2);
    a = lo_new;
    b = hi_new;
  }
  return best;
}

bool focus_regime(const Nonlinearity& nl, double beta) {
  return equilibrium_spectrum(nl, beta, nl.alpha_plus()).regime == EquilibriumRegime::SaddleFocus;
}

void require_odd(const Nonlinearity& nl) {
  const double ap = nl.alpha_plus();
  if (std::abs(nl.alpha_minus() + ap) > 1e-14 * std::max(1.0, ap)) {
    throw Error(Errc::InvalidArgument, "shooting requires alpha_minus = -alpha_plus");
  }
  for (int k = 1; k <= 64; ++k) {
    const double s = 1.5 * ap * k / 64.0;
    if (std::abs(nl(s) + nl(-s)) > 1e-12 * std::max(1.0, std::abs(nl(s)))) {
      throw Error(Errc::InvalidArgument, "shooting requires an odd nonlinearity");
    }
  }
}

}  // namespace

Profile1D shoot_kink(const Nonlinearity& nl, double beta, Interval bracket, double integrator_tol,
                     const ShootingOptions& opts) {
  require_odd(nl);
  if (opts.nodes < 5 || opts.nodes % 2 == 0) throw Error(Errc::InvalidArgument, "shooting needs an odd node count >= 5");
  if (!(bracket.lo > 0.0 && bracket.hi > bracket.lo)) {
    throw Error(Errc::InvalidArgument, "kink slope bracket must satisfy 0 < lo < hi");
  }
  const double ap = nl.alpha_plus();
  const double am = nl.alpha_minus();

  Profile1D p;
  p.grid = {opts.half_width, opts.nodes};
  p.beta = beta;
  p.kind = ProfileKind::Kink;
  p.left_limit = am;
  p.right_limit = ap;
  p.method = "shooting";

  const std::size_t half_nodes = (opts.nodes - 1) / 2 + 1;
  ShootingSetup setup;
  setup.beta = beta;
  setup.target = ap;
  setup.up_escape = ap + 0.5 * (ap - am);
  setup.down_escape = 0.5 * (ap + am);
  setup.tube = nl.delta();
  const Shooter shooter(nl, setup, p.grid.spacing(), half_nodes, integrator_tol);

  // u(0) = 0, u''(0) = 0, u'(0) = a and the first integral pins u'''(0):
  // a u'''(0) - beta a^2 / 2 - F(0) = -F(alpha_+).
  const double energy = -nl.primitive(ap);
  auto initial = [&](double a) {
    return State{0.0, a, 0.0, (energy + 0.5 * beta * a * a + nl.primitive(0.0)) / a};
  };
  const Shot shot = bisect(shooter, initial, bracket, opts.max_bisections, focus_regime(nl, beta));
  const auto half = shooter.half_profile(shot);

  const std::size_t c = half_nodes - 1;
  p.values.resize(opts.nodes);
  for (std::size_t k = 0; k < half_nodes; ++k) {
    p.values[c + k] = half[k];
    p.values[c - k] = -half[k];
  }
  return p;
}

Profile1D shoot_pulse(const Nonlinearity& nl, double beta, Interval bracket, double integrator_tol,
                      const ShootingOptions& opts) {
  require_odd(nl);
  if (opts.nodes < 5 || opts.nodes % 2 == 0) throw Error(Errc::InvalidArgument, "shooting needs an odd node count >= 5");
  const double ap = nl.alpha_plus();
  const double am = nl.alpha_minus();
  if (!(bracket.lo < bracket.hi && bracket.hi < ap && bracket.lo > am)) {
    throw Error(Errc::InvalidArgument, "pulse center bracket must lie inside (alpha_minus, alpha_plus)");
  }

  Profile1D p;
  p.grid = {opts.half_width, opts.nodes};
  p.beta = beta;
  p.kind = ProfileKind::Pulse;
  p.left_limit = ap;
  p.right_limit = ap;
  p.method = "shooting";

  const std::size_t half_nodes = (opts.nodes - 1) / 2 + 1;
  ShootingSetup setup;
  setup.beta = beta;
  setup.target = ap;
  setup.up_escape = ap + 0.5 * (ap - am);
  setup.down_escape = am;
  setup.tube = nl.delta();
  const Shooter shooter(nl, setup, p.grid.spacing(), half_nodes, integrator_tol);

  // u'(0) = u'''(0) = 0 and -u''(0)^2 / 2 - F(u(0)) = -F(alpha_+), with the
  // pulse dipping below alpha_+ so u''(0) > 0.
  const double top = nl.primitive(ap);
  auto initial = [&](double center) {
    const double gap = std::max(0.0, 2.0 * (top - nl.primitive(center)));
    return State{center, 0.0, std::sqrt(gap), 0.0};
  };
  const Shot shot = bisect(shooter, initial, bracket, opts.max_bisections, focus_regime(nl, beta));
  const auto half = shooter.half_profile(shot);

  const std::size_t c = half_nodes - 1;
  p.values.resize(opts.nodes);
  for (std::size_t k = 0; k < half_nodes; ++k) {
    p.values[c + k] = half[k];
    p.values[c - k] = half[k];
  }
  return p;
}

}  // namespace efk
