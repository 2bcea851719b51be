#include <algorithm>
#include <cmath>
#include <limits>

#include "efk/errors.hpp"
#include "efk/ode1d.hpp"

namespace efk {

const char* to_string(EquilibriumRegime regime) {
  switch (regime) {
    case EquilibriumRegime::SaddleNode: return "saddle_node";
    case EquilibriumRegime::SaddleFocus: return "saddle_focus";
    case EquilibriumRegime::Degenerate: return "degenerate";
    case EquilibriumRegime::Center: return "center";
  }
  return "unknown";
}

double SpectrumAtEquilibrium::slowest_decay() const {
  double rho = std::numeric_limits<double>::infinity();
  for (const auto& mu : exponents) {
    if (mu.real() > 1e-14) rho = std::min(rho, mu.real());
  }
  return std::isfinite(rho) ? rho : 0.0;
}

SpectrumAtEquilibrium equilibrium_spectrum(const Nonlinearity& nl, double beta, double at) {
  const double fp = nl.derivative(at);
  if (!(fp < 0.0)) {
    throw Error(Errc::UnstableEquilibrium, "f'(" + std::to_string(at) + ") = " + std::to_string(fp) + " >= 0");
  }
  SpectrumAtEquilibrium s;
  s.beta = beta;
  s.fprime = fp;

  // mu^2 = x solves x^2 - beta x - f' = 0.
  using C = std::complex<double>;
  const double disc = beta * beta + 4.0 * fp;
  const double scale = std::max({beta * beta, 4.0 * std::abs(fp), 1.0});
  C x1, x2;
  if (std::abs(disc) <= 1e-12 * scale) {
    x1 = x2 = C(0.5 * beta, 0.0);
    s.regime = EquilibriumRegime::Degenerate;
  } else {
    const C root = std::sqrt(C(disc, 0.0));
    x1 = 0.5 * (C(beta, 0.0) + root);
    x2 = 0.5 * (C(beta, 0.0) - root);
    if (disc < 0.0) {
      s.regime = EquilibriumRegime::SaddleFocus;
    } else {
      // x1 x2 = -f' > 0, so both share the sign of beta.
      s.regime = x1.real() > 0.0 ? EquilibriumRegime::SaddleNode : EquilibriumRegime::Center;
    }
  }
  const C m1 = std::sqrt(x1);
  const C m2 = std::sqrt(x2);
  s.exponents = {m1, -m1, m2, -m2};
  return s;
}

double recommended_half_width(const SpectrumAtEquilibrium& spectrum) {
  const double rho = spectrum.slowest_decay();
  if (!(rho > 0.0)) throw Error(Errc::InvalidArgument, "equilibrium has no decaying direction");
  return 12.0 / rho;
}

}  // namespace efk
