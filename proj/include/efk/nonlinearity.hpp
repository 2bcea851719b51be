#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace efk {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double s) const { return lo <= s && s <= hi; }
  double length() const { return hi - lo; }
};

/// A real number or one of the two infinities. Used for the threshold
/// functions m(beta) and M(beta), which take the value -inf / +inf when the
/// defining root set is empty.
class ExtendedReal {
 public:
  enum class Kind { Finite, NegInf, PosInf };

  static ExtendedReal finite(double v) { return ExtendedReal(Kind::Finite, v); }
  static ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf, 0.0); }
  static ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf, 0.0); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }

  /// Finite value; throws InvalidArgument on an infinity.
  double value() const;

  /// IEEE view (+/-infinity for the infinite kinds), handy for comparisons.
  double as_double() const {
    switch (kind_) {
      case Kind::NegInf: return -std::numeric_limits<double>::infinity();
      case Kind::PosInf: return std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

/// The reaction term f of the equation, together with its bistable data:
/// zeros alpha_- < alpha_+ and the width delta of the neighborhoods on which
/// f is strictly decreasing. Immutable once built; the constructor samples
/// the hypotheses and throws InvalidArgument when one of them fails.
class Nonlinearity {
 public:
  using ScalarFn = std::function<double(double)>;

  struct Definition {
    std::string name;
    ScalarFn eval;
    double alpha_minus = -1.0;
    double alpha_plus = 1.0;
    double delta = 0.0;
    Interval window;
    ScalarFn derivative;  // optional
    ScalarFn primitive;   // optional, F(s) = int_0^s f
  };

  explicit Nonlinearity(Definition def);

  double operator()(double s) const { return def_->eval(s); }
  double eval(double s) const { return def_->eval(s); }

  bool has_derivative() const { return static_cast<bool>(def_->derivative); }
  /// f'(s), exact when supplied, otherwise a fourth-order central difference.
  double derivative(double s) const;
  /// F(s) = int_0^s f, closed form when supplied, otherwise Gauss-Legendre.
  double primitive(double s) const;

  const std::string& name() const { return def_->name; }
  double alpha_minus() const { return def_->alpha_minus; }
  double alpha_plus() const { return def_->alpha_plus; }
  double delta() const { return def_->delta; }
  const Interval& window() const { return def_->window; }

 private:
  std::shared_ptr<const Definition> def_;
};

/// f(s) = s - s^3, alpha = -1/+1, delta = 1 - 1/sqrt(3).
Nonlinearity builtin_cubic();
/// f(s) = c (s - s^3), c > 0.
Nonlinearity scaled_cubic(double c);
/// s - s^3 on [-clip, clip], held constant outside.
Nonlinearity clipped_cubic(double clip = 2.0);

/// Natural cubic spline through (knots, values), extended linearly beyond the
/// end knots. The bistable data must be declared; it is validated, not trusted.
Nonlinearity spline_nonlinearity(std::vector<double> knots, std::vector<double> values,
                                 double alpha_minus, double alpha_plus, double delta);

/// Smallest omega > 0 with (f(s)-f(s'))/(s-s') + omega >= 0 on [alpha_-, alpha_+].
double omega_min(const Nonlinearity& nl, double tol = 1e-10);

/// Smallest beta_f > 0 such that alpha_- <= f(s)/mu + s <= alpha_+ on
/// [alpha_-, alpha_+] for every mu >= beta_f^2 / 4.
double beta_f(const Nonlinearity& nl, double tol = 1e-12);

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// Range sandwich for bounded solutions whose range is [m_u, M_u].
Envelope envelope_lemma1(const Nonlinearity& nl, double m_u, double M_u, double beta,
                         std::size_t grid_n = 2001);

struct Thresholds {
  ExtendedReal m;
  ExtendedReal M;
};

/// Thresholds m(beta) < alpha_- and M(beta) > alpha_+; a negative
/// search_radius selects the default 10 (alpha_+ - alpha_-).
Thresholds m_M_of_beta(const Nonlinearity& nl, double beta, double search_radius = -1.0);

/// beta = 1/sqrt(gamma), evaluated as sqrt(1/gamma).
double gamma_to_beta(double gamma);

/// Derived constants for one nonlinearity, with (m, M) tabulated on a beta grid.
class BoundsProfile {
 public:
  struct Sample {
    double beta;
    ExtendedReal m;
    ExtendedReal M;
  };

  BoundsProfile(Nonlinearity nl, std::span<const double> betas, double tol = 1e-12);

  double omega() const { return omega_; }
  double beta_f() const { return beta_f_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const Nonlinearity& nonlinearity() const { return nl_; }

  ExtendedReal m_of_beta(double beta) const { return m_M_of_beta(nl_, beta).m; }
  ExtendedReal M_of_beta(double beta) const { return m_M_of_beta(nl_, beta).M; }
  Envelope envelope(double m_u, double M_u, double beta) const {
    return envelope_lemma1(nl_, m_u, M_u, beta);
  }

 private:
  Nonlinearity nl_;
  double omega_;
  double beta_f_;
  std::vector<Sample> samples_;
};

}  // namespace efk
