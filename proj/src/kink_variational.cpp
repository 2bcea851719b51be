#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "efk/errors.hpp"
#include "efk/ode1d.hpp"

namespace efk {

namespace {

// Discrete energy of c4 u'''' - c2 u'' = f(u) on a clamped grid. The ends
// u_0, u_{n-1} are fixed; the zero-slope clamp is the even reflection
// u_{-1} = u_1, u_n = u_{n-2}, which with trapezoid weights makes the
// gradient equal h times the standard five-point residual at every unknown.
class ClampedEnergy {
 public:
  ClampedEnergy(const Nonlinearity& nl, double c4, double c2, double h)
      : nl_(nl), c4_(c4), c2_(c2), h_(h), well_(nl.primitive(nl.alpha_plus())) {}

  double energy(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    double bend = 0.0;
    double pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
      const double d2 = second_difference(u, i);
      bend += w * 0.5 * c4_ * d2 * d2;
      pot += w * (well_ - nl_.primitive(u[i]));
    }
    double stretch = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d1 = (u[i + 1] - u[i]) / h_;
      stretch += 0.5 * c2_ * d1 * d1;
    }
    return h_ * (bend + pot + stretch);
  }

  // Residual c4 D4 u - c2 D2 u - f(u) at unknowns i = 1 .. n-2 (gradient / h).
  std::vector<double> residual(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    const double h2 = h_ * h_;
    const double h4 = h2 * h2;
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double um2 = i >= 2 ? u[i - 2] : u[1];
      const double up2 = i + 2 < n ? u[i + 2] : u[n - 2];
      const double d4 = (um2 - 4 * u[i - 1] + 6 * u[i] - 4 * u[i + 1] + up2) / h4;
      const double d2 = (u[i - 1] - 2 * u[i] + u[i + 1]) / h2;
      r[i] = c4_ * d4 - c2_ * d2 - nl_(u[i]);
    }
    return r;
  }

  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    const auto m = static_cast<Eigen::Index>(n - 2);
    const double h2 = h_ * h_;
    const double h4 = h2 * h2;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(m) * 5);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const auto row = static_cast<Eigen::Index>(i - 1);
      double diag = c4_ * 6.0 / h4 + c2_ * 2.0 / h2 - nl_.derivative(u[i]);
      if (i == 1) diag += c4_ / h4;
      if (i + 2 == n) diag += c4_ / h4;
      t.emplace_back(row, row, diag);
      const double off1 = -4.0 * c4_ / h4 - c2_ / h2;
      const double off2 = c4_ / h4;
      if (row >= 1) t.emplace_back(row, row - 1, off1);
      if (row + 1 < m) t.emplace_back(row, row + 1, off1);
      if (row >= 2) t.emplace_back(row, row - 2, off2);
      if (row + 2 < m) t.emplace_back(row, row + 2, off2);
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(t.begin(), t.end());
    return a;
  }

  double end_curvature(const std::vector<double>& u) const {
    return std::max(std::abs(second_difference(u, 0)), std::abs(second_difference(u, u.size() - 1)));
  }

 private:
  double second_difference(const std::vector<double>& u, std::size_t i) const {
    const std::size_t n = u.size();
    if (i == 0) return 2.0 * (u[1] - u[0]) / (h_ * h_);
    if (i + 1 == n) return 2.0 * (u[n - 2] - u[n - 1]) / (h_ * h_);
    return (u[i - 1] - 2 * u[i] + u[i + 1]) / (h_ * h_);
  }

  const Nonlinearity& nl_;
  double c4_;
  double c2_;
  double h_;
  double well_;
};

double max_abs(const std::vector<double>& r) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) m = std::max(m, std::abs(r[i]));
  return m;
}

}  // namespace

Profile1D variational_kink(const Nonlinearity& nl, double beta, double half_width, std::size_t n,
                           double tol, const KinkSolverOptions& opts) {
  if (!(beta >= 0.0)) throw Error(Errc::InvalidArgument, "variational kink needs beta >= 0");
  return variational_kink_general(nl, 1.0, beta, half_width, n, tol, opts);
}

Profile1D variational_kink_general(const Nonlinearity& nl, double fourth_coeff, double second_coeff,
                                   double half_width, std::size_t n, double tol,
                                   const KinkSolverOptions& opts) {
  if (n < 7) throw Error(Errc::TooFewNodes, "variational kink needs at least 7 nodes");
  if (!(fourth_coeff > 0.0)) throw Error(Errc::NonPositive, "fourth-order coefficient must be positive");
  if (!(half_width > 0.0)) throw Error(Errc::NonPositive, "half width must be positive");

  Profile1D p;
  p.grid = {half_width, n};
  p.beta = second_coeff;
  p.fourth_order_coeff = fourth_coeff;
  p.kind = ProfileKind::Kink;
  p.left_limit = nl.alpha_minus();
  p.right_limit = nl.alpha_plus();
  p.method = "variational";

  const double mid = 0.5 * (nl.alpha_plus() + nl.alpha_minus());
  const double half = 0.5 * (nl.alpha_plus() - nl.alpha_minus());
  auto& u = p.values;
  u.resize(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = mid + half * std::tanh(p.grid.x(i) / std::sqrt(2.0));
  u.front() = nl.alpha_minus();
  u.back() = nl.alpha_plus();

  const ClampedEnergy energy(nl, fourth_coeff, second_coeff, p.grid.spacing());
  const double h = p.grid.spacing();
  std::vector<double> history;
  std::vector<double> r = energy.residual(u);
  double res = max_abs(r);
  double shift = 0.0;
  std::size_t polish_left = opts.polish_steps;

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    history.push_back(res);
    if (res < tol) {
      if (polish_left == 0) break;
      --polish_left;
    }

    const Eigen::SparseMatrix<double> jac = energy.jacobian(u);
    const auto m = jac.rows();
    Eigen::VectorXd rhs(m);
    for (Eigen::Index k = 0; k < m; ++k) rhs[k] = -r[static_cast<std::size_t>(k + 1)];

    // Levenberg shift keeps the step a descent direction while the
    // Hessian is indefinite (far from the minimizer).
    Eigen::VectorXd step;
    Eigen::SparseMatrix<double> ident(m, m);
    ident.setIdentity();
    const double diag_scale = jac.coeff(0, 0);
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
      llt.compute(shift > 0.0 ? Eigen::SparseMatrix<double>(jac + shift * ident) : jac);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(rhs);
        break;
      }
      shift = shift > 0.0 ? shift * 10.0 : 1e-10 * diag_scale;
    }
    if (step.size() != m) throw NoConvergence("kink Hessian could not be regularized", history, it);

    const double e0 = energy.energy(u);
    double slope = 0.0;  // directional derivative of the energy
    for (Eigen::Index k = 0; k < m; ++k) slope -= h * rhs[k] * step[k];

    std::vector<double> trial = u;
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (Eigen::Index k = 0; k < m; ++k) {
        trial[static_cast<std::size_t>(k + 1)] = u[static_cast<std::size_t>(k + 1)] + t * step[k];
      }
      const double e1 = energy.energy(trial);
      const auto r1 = energy.residual(trial);
      const double res1 = max_abs(r1);
      // Armijo on the energy; once the energy change is at rounding level
      // the residual norm decides.
      const bool armijo = e1 <= e0 + 1e-4 * t * slope;
      const bool flat = std::abs(e1 - e0) <= 1e-12 * std::max(1.0, std::abs(e0));
      if (armijo || (flat && res1 < res)) {
        u.swap(trial);
        r = r1;
        res = res1;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (res < tol) break;
      shift = shift > 0.0 ? shift * 10.0 : 1e-10 * diag_scale;
      continue;
    }
    shift = t == 1.0 ? shift * 0.1 : shift;
    if (shift < 1e-14 * diag_scale) shift = 0.0;
  }
  if (!(res < tol)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "variational kink: residual %.3e above tol %.3e", res, tol);
    throw NoConvergence(msg, history, history.size());
  }

  const double mismatch = energy.end_curvature(u);
  if (mismatch > 10.0 * tol) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "clamped-end curvature %.3e exceeds 10*tol; enlarge the half width", mismatch);
    throw Error(Errc::DomainTooSmall, msg);
  }
  return p;
}

}  // namespace efk
