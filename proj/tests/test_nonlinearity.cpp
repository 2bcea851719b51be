#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "efk/errors.hpp"
#include "efk/nonlinearity.hpp"

using namespace efk;

namespace {

// Oracle: minimum of g over a uniform grid of n points on [a, b].
template <class G>
double grid_min(G g, double a, double b, int n) {
  double m = g(a);
  for (int i = 1; i < n; ++i) m = std::min(m, g(a + (b - a) * i / (n - 1)));
  return m;
}

Nonlinearity sine_nonlinearity() {
  Nonlinearity::Definition d;
  d.name = "sine";
  d.eval = [](double s) { return std::sin(std::numbers::pi * s); };
  d.alpha_minus = -1.0;
  d.alpha_plus = 1.0;
  d.delta = 0.4;
  d.window = {-1.9, 1.9};
  return Nonlinearity(d);
}

// Cubic with an infinitely steep descent through 0.
Nonlinearity cusp_nonlinearity() {
  Nonlinearity::Definition d;
  d.name = "cusp";
  d.eval = [](double s) { return (1 - s * s) * (s - 0.1 * std::cbrt(s)); };
  d.alpha_minus = -1.0;
  d.alpha_plus = 1.0;
  d.delta = 0.25;
  d.window = {-3.0, 3.0};
  return Nonlinearity(d);
}

}  // namespace

TEST_CASE("cubic evaluates s - s^3") {
  const auto f = builtin_cubic();
  CHECK(f(0.0) == 0.0);
  CHECK(f(1.0) == 0.0);
  CHECK(f(-1.0) == 0.0);
  CHECK(f(0.5) == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(f.delta() == doctest::Approx(1.0 - 1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(f.primitive(1.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(f.derivative(1.0) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("construction rejects broken hypotheses") {
  Nonlinearity::Definition d;
  d.name = "bad";
  d.eval = [](double s) { return s - s * s * s; };
  d.window = {-2, 2};
  d.delta = 1.2;  // wider than half the gap
  CHECK_THROWS_AS(Nonlinearity{d}, Error);
  d.delta = 0.3;
  d.alpha_plus = 0.9;  // not a zero
  CHECK_THROWS_AS(Nonlinearity{d}, Error);
  d.alpha_plus = 1.0;
  d.delta = 0.6;  // f increases on [0.4, 1/sqrt(3)]
  CHECK_THROWS_AS(Nonlinearity{d}, Error);
  d.delta = 0.3;
  d.eval = [](double s) { return s * s * s - s; };  // wrong sign pattern
  CHECK_THROWS_AS(Nonlinearity{d}, Error);
}

TEST_CASE("omega_min") {
  CHECK(std::abs(omega_min(builtin_cubic()) - 2.0) <= 1e-8);
  for (double c : {0.25, 1.0, 3.0}) {
    const double oracle = -grid_min([c](double s) { return c * (1 - 3 * s * s); }, -1, 1, 200001);
    CHECK(std::abs(omega_min(scaled_cubic(c)) - oracle) <= 1e-8);
  }
  const double pi_oracle =
      -grid_min([](double s) { return std::numbers::pi * std::cos(std::numbers::pi * s); }, -1, 1, 200001);
  CHECK(std::abs(omega_min(sine_nonlinearity()) - pi_oracle) <= 1e-6);
  CHECK_THROWS_WITH_AS(omega_min(cusp_nonlinearity()), doctest::Contains("NonLipschitz"), Error);
}

TEST_CASE("beta_f") {
  const auto cubic = builtin_cubic();
  CHECK(std::abs(beta_f(cubic) - std::sqrt(8.0)) <= 1e-8);
  CHECK(std::abs(2 * std::sqrt(omega_min(cubic)) - beta_f(cubic)) <= 1e-8);
  for (double c : {0.25, 1.0, 3.0}) CHECK(std::abs(beta_f(scaled_cubic(c)) - std::sqrt(8 * c)) <= 1e-8);
}

TEST_CASE("2 sqrt(omega) >= beta_f on every builtin") {
  std::vector<Nonlinearity> all{builtin_cubic(), scaled_cubic(0.5), clipped_cubic(), sine_nonlinearity()};
  std::vector<double> knots, vals;
  for (int i = 0; i <= 40; ++i) {
    const double s = -2 + 0.1 * i;
    knots.push_back(s);
    vals.push_back(s - s * s * s);
  }
  all.push_back(spline_nonlinearity(knots, vals, -1, 1, 0.3));
  for (const auto& f : all) {
    CAPTURE(f.name());
    CHECK(2 * std::sqrt(omega_min(f)) >= beta_f(f) - 1e-8);
  }
}

TEST_CASE("envelope") {
  const auto f = builtin_cubic();
  // Oracle at mu = 2: the range of s + (s - s^3)/2 on [-1, 1].
  const double hi = -grid_min([](double s) { return -(s + (s - s * s * s) / 2); }, -1, 1, 20001);
  const auto e = envelope_lemma1(f, -1, 1, std::sqrt(8.0));
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.upper == doctest::Approx(hi).epsilon(1e-9));
  CHECK(e.lower == doctest::Approx(-hi).epsilon(1e-9));

  CHECK(envelope_lemma1(f, -1.2, 1.2, 4.0).upper < 1.2);

  for (double beta : {std::sqrt(8.0), 3.0, 5.0}) {
    const auto ee = envelope_lemma1(f, -1, 1, beta);
    CHECK(ee.lower >= -1 - 1e-12);
    CHECK(ee.upper <= 1 + 1e-12);
  }
  CHECK_THROWS_AS(envelope_lemma1(f, 1, -1, 3.0), Error);
}

TEST_CASE("m and M thresholds") {
  const auto f = builtin_cubic();
  for (double beta : {std::sqrt(8.0), 3.0, 4.0, 10.0}) {
    const auto t = m_M_of_beta(f, beta);
    REQUIRE(t.M.is_finite());
    REQUIRE(t.m.is_finite());
    CHECK(std::abs(t.M.value() - std::sqrt(1 + beta * beta / 2)) <= 1e-8);
    CHECK(std::abs(t.m.value() + std::sqrt(1 + beta * beta / 2)) <= 1e-8);
  }
  CHECK(std::abs(m_M_of_beta(f, std::sqrt(8.0)).M.value() - std::sqrt(5.0)) <= 1e-8);

  const auto clipped = m_M_of_beta(clipped_cubic(), 20.0);
  CHECK(clipped.M.kind() == ExtendedReal::Kind::PosInf);
  CHECK(clipped.m.kind() == ExtendedReal::Kind::NegInf);

  CHECK_THROWS_WITH_AS(m_M_of_beta(f, 2.0), doctest::Contains("BelowThreshold"), Error);
}

TEST_CASE("m and M are monotone and bracket the zeros") {
  const auto f = builtin_cubic();
  std::vector<double> betas;
  for (int i = 0; i <= 30; ++i) betas.push_back(std::sqrt(8.0) + 0.25 * i);
  const BoundsProfile bp(f, betas);
  for (std::size_t i = 0; i < bp.samples().size(); ++i) {
    const auto& s = bp.samples()[i];
    CHECK(s.m.as_double() < f.alpha_minus());
    CHECK(s.M.as_double() > f.alpha_plus());
    if (i > 0) {
      CHECK(s.m.as_double() <= bp.samples()[i - 1].m.as_double());
      CHECK(s.M.as_double() >= bp.samples()[i - 1].M.as_double());
    }
  }
  CHECK(bp.omega() > 0);
  CHECK(2 * std::sqrt(bp.omega()) >= bp.beta_f() - 1e-8);
}

TEST_CASE("gamma_to_beta") {
  CHECK(gamma_to_beta(1.0 / 8) == std::sqrt(8.0));
  CHECK(gamma_to_beta(1.0) == 1.0);
  CHECK(gamma_to_beta(0.25) == 2.0);
  for (double beta : {1.5, std::sqrt(8.0), 3.0, 7.25}) {
    CHECK(gamma_to_beta(1 / (beta * beta)) == doctest::Approx(beta).epsilon(1e-15));
  }
  CHECK_THROWS_AS(gamma_to_beta(0.0), Error);
  CHECK_THROWS_AS(gamma_to_beta(-1.0), Error);
}

TEST_CASE("spline nonlinearity reproduces sampled cubic") {
  std::vector<double> knots, vals;
  for (int i = 0; i <= 60; ++i) {
    const double s = -1.5 + 0.05 * i;
    knots.push_back(s);
    vals.push_back(s - s * s * s);
  }
  const auto f = spline_nonlinearity(knots, vals, -1, 1, 0.3);
  for (double s : {-1.3, -0.77, 0.0, 0.41, 0.9}) CHECK(f(s) == doctest::Approx(s - s * s * s).epsilon(1e-4));
  CHECK(std::abs(omega_min(f) - 2.0) < 1e-2);
  CHECK(std::abs(f.primitive(1.0) - 0.25) < 1e-5);
  // Declared data must be validated.
  CHECK_THROWS_AS(spline_nonlinearity(knots, vals, -1, 0.5, 0.3), Error);
}

TEST_CASE("extended reals") {
  CHECK(ExtendedReal::finite(2.5).value() == 2.5);
  CHECK_THROWS_AS(ExtendedReal::pos_inf().value(), Error);
  CHECK(std::isinf(ExtendedReal::neg_inf().as_double()));
  CHECK(ExtendedReal::neg_inf().as_double() < 0);
}
