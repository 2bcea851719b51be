#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "efk/errors.hpp"
#include "efk/verify.hpp"

using namespace efk;

namespace {

const double kSqrt8 = std::sqrt(8.0);
const double kPi = std::acos(-1.0);

// beta = 3 kink centred at -2 (base) and the same kink moved up the axis by
// tau = 2 (shifted), both sampled on [-25, 25] from one solve on [-27, 27].
struct ShiftedPair {
  Profile1D shifted, base;
};

const ShiftedPair& shifted_pair() {
  static const ShiftedPair p = [] {
    const auto big = variational_kink(builtin_cubic(), 3.0, 27, 2701, 1e-7);
    ShiftedPair out{constant_profile(0, 3.0, 25, 2501), constant_profile(0, 3.0, 25, 2501)};
    for (std::size_t j = 0; j < 2501; ++j) {
      out.shifted.values[j] = big.values[j];
      out.base.values[j] = big.values[j + 200];
    }
    return out;
  }();
  return p;
}

double context_number(const VerificationReport& r, const std::string& key) {
  const ContextValue* v = r.find(key);
  REQUIRE(v != nullptr);
  return std::get<double>(*v);
}

}  // namespace

TEST_CASE("report serialization") {
  VerificationReport r;
  r.check_name = "demo";
  r.margin = -0.5;
  r.witness = Witness{{1, 2}, {0.1, -3.0}, "here"};
  r.context = {{"beta", 3.0}, {"seed", std::int64_t{7}}, {"flag", true}, {"kind", std::string("x")}};
  const auto j = nlohmann::ordered_json::parse(to_json_line(r));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"check", "passed", "margin", "witness", "context"});
  CHECK(j["margin"] == -0.5);
  CHECK(j["witness"]["index"][1] == 2);
  CHECK(j["context"]["verdict"] == "failed");
  CHECK(j["context"]["seed"] == 7);
  CHECK(to_json_line(r).find('\n') == std::string::npos);

  r.witness.reset();
  r.margin = std::numeric_limits<double>::quiet_NaN();
  const auto k = nlohmann::json::parse(to_json_line(r));
  CHECK(k["witness"].is_null());
  CHECK(k["margin"].is_null());
}

TEST_CASE("a priori bounds") {
  const auto f = builtin_cubic();
  const StripGrid g({4}, {0.5}, 21, 5.0);
  Field u(g.size(), 1.0);
  auto r = check_apriori_bounds(FieldView(g, u), f, kSqrt8);
  CHECK(r.passed);
  // The formula min(min u - alpha_-, alpha_+ - max u) is 0 for u = alpha_+.
  CHECK(r.margin == 0.0);

  u[g.index(2, 7)] = 1.3;
  r = check_apriori_bounds(FieldView(g, u), f, kSqrt8);
  CHECK_FALSE(r.passed);
  CHECK(r.margin == doctest::Approx(-0.3));
  REQUIRE(r.witness);
  CHECK(r.witness->index == std::vector<std::size_t>{2, 7});
  CHECK(r.witness->position[1] == doctest::Approx(g.axial_coordinate(7)));

  r = check_apriori_bounds(FieldView(g, u), f, 2.0);
  CHECK(r.hypothesis_failed());
  CHECK_FALSE(r.passed);

  const auto kink = variational_kink(f, kSqrt8, 20, 2001, 1e-7);
  r = check_apriori_bounds(kink, f, kSqrt8);
  CHECK(r.passed);
  CHECK(r.margin >= -1e-4);
}

TEST_CASE("one-dimensionality") {
  const auto f = builtin_cubic();
  const auto kink = variational_kink(f, kSqrt8, 20, 401, 1e-7);
  const StripGrid g({8}, {0.5}, 401, 20.0);
  const Field ext = extrude(kink, g);
  auto r = check_one_dimensionality(FieldView(g, ext), 1e-12);
  CHECK(r.passed);
  CHECK(context_number(r, "max_oscillation") == 0.0);

  Field wavy(g.size());
  const double period = g.period(0);
  for (std::size_t line = 0; line < g.lines(); ++line) {
    for (std::size_t j = 0; j < g.axial_size(); ++j) {
      const double x1 = static_cast<double>(line) * g.transverse_spacing(0);
      wavy[g.index(line, j)] = std::tanh(g.axial_coordinate(j)) + 0.01 * std::cos(2 * kPi * x1 / period);
    }
  }
  r = check_one_dimensionality(FieldView(g, wavy), 1e-5);
  CHECK_FALSE(r.passed);
  CHECK(r.margin == doctest::Approx(1e-5 - 0.02).epsilon(1e-9));
  CHECK(r.witness);

  CHECK_THROWS_WITH_AS(check_one_dimensionality(kink, 1e-5), doctest::Contains("NoTransverseAxis"), Error);
}

TEST_CASE("monotonicity") {
  const auto f = builtin_cubic();
  CHECK(check_monotonicity(variational_kink(f, kSqrt8, 20, 2001, 1e-7)).passed);
  const auto osc = check_monotonicity(variational_kink(f, 2.0, 30, 2001, 1e-7));
  CHECK_FALSE(osc.passed);
  CHECK(osc.witness);
  const auto flat = check_monotonicity(constant_profile(0.3, 3.0, 5, 51));
  CHECK(flat.passed);
  CHECK(flat.margin == 0.0);
}

TEST_CASE("comparison on the shifted kink") {
  const auto f = builtin_cubic();
  const auto sp = split_params(3.0, 2.0);
  const auto& p = shifted_pair();
  for (auto side : {HalfSpace::Upper, HalfSpace::Lower}) {
    const auto r = check_comparison_halfspace(p.shifted, p.base, sp.lambda, f, 3.0, side, 1e-8);
    CHECK_FALSE(r.hypothesis_failed());
    CHECK(r.passed);
    CHECK(r.margin >= -1e-8);
    // The plane sits where the profile is within delta of its limit.
    const double a = context_number(r, "plane_height");
    if (side == HalfSpace::Upper) {
      CHECK(a > -2.0);
    } else {
      CHECK(a < 2.0);
    }
  }
}

TEST_CASE("comparison equality case") {
  const auto f = builtin_cubic();
  const auto& p = shifted_pair();
  for (auto side : {HalfSpace::Upper, HalfSpace::Lower}) {
    const auto r = check_comparison_halfspace(p.base, p.base, 1.0, f, 3.0, side);
    CHECK(r.passed);
    CHECK(r.margin == 0.0);
  }
  // Without the hypotheses nothing is concluded.
  Profile1D ramp = constant_profile(0, 3.0, 5, 101);
  for (std::size_t j = 0; j < ramp.size(); ++j) ramp.values[j] = 0.1 * ramp.grid.x(j);
  const auto r = check_comparison_halfspace(ramp, ramp, 1.0, f, 3.0, HalfSpace::Upper);
  CHECK(r.hypothesis_failed());
  CHECK_FALSE(r.passed);
}

TEST_CASE("comparison detects constructed violations") {
  const auto f = builtin_cubic();
  const auto& p = shifted_pair();
  const StripGrid g({4}, {0.5}, 2501, 25.0);
  const Field z2 = extrude(p.base, g);

  SUBCASE("single node, upper half") {
    Field z1 = z2;
    const std::size_t j = 1350;  // x = 2.0
    z1[g.index(2, j)] += 1e-3;
    const auto r = check_comparison_halfspace(FieldView(g, z1), FieldView(g, z2), 1.0, f, 3.0, HalfSpace::Upper);
    CHECK_FALSE(r.hypothesis_failed());
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    CHECK(r.witness->index == std::vector<std::size_t>{2, j});
    CHECK(r.witness->position[1] == doctest::Approx(2.0));
  }
  SUBCASE("single node, lower half") {
    Field z1 = z2;
    const std::size_t j = 1000;  // x = -5.0
    z1[g.index(1, j)] += 1e-3;
    const auto r = check_comparison_halfspace(FieldView(g, z1), FieldView(g, z2), 1.0, f, 3.0, HalfSpace::Lower);
    CHECK_FALSE(r.hypothesis_failed());
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    CHECK(r.witness->index == std::vector<std::size_t>{1, j});
  }
  SUBCASE("raised interior band") {
    Field z1 = z2;
    for (std::size_t line = 0; line < g.lines(); ++line) {
      for (std::size_t j = 1300; j <= 1350; ++j) z1[g.index(line, j)] += 0.01;
    }
    const auto r = check_comparison_halfspace(FieldView(g, z1), FieldView(g, z2), 1.0, f, 3.0, HalfSpace::Upper);
    CHECK_FALSE(r.hypothesis_failed());
    CHECK_FALSE(r.passed);
    REQUIRE(r.witness);
    CHECK(r.witness->position[1] >= 1.0 - 1e-9);
    CHECK(r.witness->position[1] <= 2.0 + 1e-9);
  }
  SUBCASE("grid mismatch") {
    const StripGrid other({4}, {0.25}, 2501, 25.0);
    CHECK_THROWS_WITH_AS(
        check_comparison_halfspace(FieldView(g, z2), FieldView(other, z2), 1.0, f, 3.0, HalfSpace::Upper),
        doctest::Contains("GridMismatch"), Error);
  }
}

TEST_CASE("sliding scan") {
  const auto f = builtin_cubic();
  const StripGrid g({4}, {0.5}, 1001, 20.0);
  SUBCASE("constant field") {
    const Field c(g.size(), -0.4);
    const auto s = sliding_tau_star(FieldView(g, c), {0.0}, 2.0, 40);
    CHECK(s.tau_star == 0.0);
    CHECK(s.resolution == doctest::Approx(0.05));
    CHECK(s.tau_grid.size() == 40);
    for (double v : s.violation_curve) CHECK(v == 0.0);
    CHECK(s.curve_monotone);
  }
  SUBCASE("monotone front, any grid shift") {
    const Field u = extrude(variational_kink(f, kSqrt8, 20, 1001, 1e-7), g);
    for (double xi : {0.0, 0.5, -1.0}) {
      const auto s = sliding_tau_star(FieldView(g, u), {xi}, 5.0, 100);
      CHECK(s.tau_star == 0.0);
      CHECK(s.curve_monotone);
      CHECK(sliding_report(s).passed);
    }
  }
  SUBCASE("oscillatory kink") {
    const StripGrid g2({4}, {0.5}, 2001, 30.0);
    const Field u = extrude(variational_kink(f, 2.0, 30, 2001, 1e-7), g2);
    const auto s = sliding_tau_star(FieldView(g2, u), {0.0}, 5.0, 100);
    CHECK(s.tau_star > 0.0);
    const auto r = sliding_report(s);
    CHECK_FALSE(r.passed);
    CHECK(r.witness);
  }
  SUBCASE("off-grid shift") {
    const Field c(g.size(), 0.0);
    CHECK_THROWS_WITH_AS(sliding_tau_star(FieldView(g, c), {0.3}, 1.0, 10), doctest::Contains("ShiftNotOnGrid"),
                         Error);
  }
}

TEST_CASE("Liouville experiment") {
  const auto f = builtin_cubic();
  const StripGrid g({8}, {0.5}, 161, 8.0);
  InitSpec constant{InitKind::Constant, {}};
  constant.params.value = -1.0;
  InitSpec bump{InitKind::Bump, {}};
  bump.params.value = -1.0;
  bump.params.height = 0.5;
  bump.params.radius = 3.0;
  InitSpec noisy{InitKind::NoisyRamp, {}};
  noisy.params.seed = 7;
  noisy.params.amplitude = 0.1;

  std::vector<SolutionField> fields;
  const auto r = liouville_experiment(f, kSqrt8, LiouvilleSide::Minus, g, {constant, bump, noisy}, 1e-5, {}, &fields);
  CHECK(r.passed);
  CHECK(r.margin >= 0.0);
  CHECK(fields.size() == 3);

  InitSpec plus{InitKind::Constant, {}};
  plus.params.value = 1.0;
  const auto rp = liouville_experiment(f, kSqrt8, LiouvilleSide::Plus, g, {plus}, 1e-12);
  CHECK(rp.passed);
  CHECK(rp.margin == doctest::Approx(1e-12).epsilon(0.1));

  const auto low = liouville_experiment(f, 2.0, LiouvilleSide::Minus, g, {bump}, 1e-5);
  CHECK(low.hypothesis_failed());
  CHECK_FALSE(low.passed);
  CHECK(to_json_line(low).find("hypothesis_failed") != std::string::npos);

  // A start touching the other equilibrium is outside the theorem.
  InitSpec high = bump;
  high.params.height = 2.0;
  CHECK(liouville_experiment(f, kSqrt8, LiouvilleSide::Minus, g, {high}, 1e-5).hypothesis_failed());

  StripSolveSettings tight;
  tight.max_iter = 2;
  const auto nc = liouville_experiment(f, kSqrt8, LiouvilleSide::Minus, g, {bump}, 1e-5, tight);
  CHECK_FALSE(nc.passed);
  CHECK(std::get<std::string>(*nc.find("init_0_status")) == "no_convergence");
}
