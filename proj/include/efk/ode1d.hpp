#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "efk/nonlinearity.hpp"

namespace efk {

/// Uniform grid on [-half_width, half_width] with n nodes (node 0 at -L).
struct UniformGrid1D {
  double half_width = 0.0;
  std::size_t n = 0;

  double spacing() const { return 2.0 * half_width / static_cast<double>(n - 1); }
  double x(std::size_t i) const { return -half_width + spacing() * static_cast<double>(i); }
};

enum class ProfileKind { Kink, Pulse, Constant, Other };

const char* to_string(ProfileKind kind);

/// A discrete solution of c4 u'''' - beta u'' = f(u) on a 1D grid. The
/// default c4 = 1 is the extended Fisher-Kolmogorov scaling.
struct Profile1D {
  UniformGrid1D grid;
  std::vector<double> values;
  double beta = 0.0;
  double fourth_order_coeff = 1.0;
  ProfileKind kind = ProfileKind::Other;
  double left_limit = 0.0;
  double right_limit = 0.0;
  std::string method;

  std::size_t size() const { return values.size(); }
};

/// Profile with every node equal to `value`.
Profile1D constant_profile(double value, double beta, double half_width, std::size_t n);

enum class EquilibriumRegime { SaddleNode, SaddleFocus, Degenerate, Center };

const char* to_string(EquilibriumRegime regime);

/// Linearization exponents at an equilibrium: roots of mu^4 - beta mu^2 - f'(at).
struct SpectrumAtEquilibrium {
  double beta = 0.0;
  double fprime = 0.0;
  std::array<std::complex<double>, 4> exponents{};
  EquilibriumRegime regime = EquilibriumRegime::SaddleNode;

  /// Smallest positive real part among the exponents (decay rate of the
  /// slowest tail).
  double slowest_decay() const;
};

SpectrumAtEquilibrium equilibrium_spectrum(const Nonlinearity& nl, double beta, double at);

/// Half-width L = 12 / rho giving tail error e^{-rho L} below 1e-5.
double recommended_half_width(const SpectrumAtEquilibrium& spectrum);

struct KinkSolverOptions {
  std::size_t max_iters = 200;
  /// Extra Newton steps after the residual drops below tol.
  std::size_t polish_steps = 2;
};

/// Minimizer of the discretized energy int 1/2 (u''^2 + beta u'^2) + W(u),
/// W = F(alpha_+) - F, clamped to alpha_-/alpha_+ with zero slope at -L/+L.
/// The five-point residual cannot drop much below 16 eps / h^4, so tol must
/// sit above that floor.
Profile1D variational_kink(const Nonlinearity& nl, double beta, double half_width, std::size_t n,
                           double tol, const KinkSolverOptions& opts = {});

/// Same minimizer for c4 u'''' - c2 u'' = f(u) (c4 > 0).
Profile1D variational_kink_general(const Nonlinearity& nl, double fourth_coeff, double second_coeff,
                                   double half_width, std::size_t n, double tol,
                                   const KinkSolverOptions& opts = {});

struct ShootingOptions {
  double half_width = 20.0;
  std::size_t nodes = 2001;  // odd, so x = 0 is a node
  std::size_t max_bisections = 200;
};

/// Odd kink by shooting from x = 0 with u(0) = u''(0) = 0. The slope a = u'(0)
/// is bisected inside `bracket`; u'''(0) follows from the first integral.
Profile1D shoot_kink(const Nonlinearity& nl, double beta, Interval bracket, double integrator_tol,
                     const ShootingOptions& opts = {});

/// Even pulse around alpha_+ by shooting from its center with u'(0) = u'''(0) = 0;
/// the center value is bisected inside `bracket` and u''(0) follows from the
/// first integral.
Profile1D shoot_pulse(const Nonlinearity& nl, double beta, Interval bracket, double integrator_tol,
                      const ShootingOptions& opts = {});

/// E = u''' u' - u''^2/2 - beta u'^2/2 - F(u) at nodes 2 .. n-3.
std::vector<double> first_integral(const Profile1D& p, const Nonlinearity& nl);

struct ProfileClassification {
  std::size_t zeros = 0;
  bool monotone = false;
  std::size_t extrema = 0;
  std::vector<double> amplitudes;
};

ProfileClassification classify_profile(const Profile1D& p);

/// Max-norm of c4 D4 u - beta D2 u - f(u) over nodes 2 .. n-3.
double residual_1d(const Profile1D& p, const Nonlinearity& nl);

/// Sup-norm distance after translating `b` so both profiles cross the
/// midpoint of their limits at the same x. Compared on the nodes of `a`.
double aligned_sup_distance(const Profile1D& a, const Profile1D& b);

/// Shift values by k nodes toward +x (negative k toward -x), refilling the
/// vacated end with its boundary value.
Profile1D shift_profile(const Profile1D& p, long k);

}  // namespace efk
