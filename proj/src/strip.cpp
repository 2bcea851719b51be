#include "efk/strip.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "efk/errors.hpp"

namespace efk {

StripGrid::StripGrid(std::vector<std::size_t> transverse_sizes, std::vector<double> transverse_spacings,
                     std::size_t axial_size, double axial_half_length)
    : tsize_(std::move(transverse_sizes)),
      tspacing_(std::move(transverse_spacings)),
      axial_n_(axial_size),
      axial_half_(axial_half_length),
      lines_(1) {
  if (tsize_.size() != tspacing_.size()) {
    throw Error(Errc::InvalidArgument, "one spacing per transverse axis is required");
  }
  for (std::size_t a = 0; a < tsize_.size(); ++a) {
    if (tsize_[a] < 4) throw Error(Errc::TooFewNodes, "transverse axes need at least 4 nodes");
    if (!(tspacing_[a] > 0.0)) throw Error(Errc::NonPositive, "transverse spacing must be positive");
    lines_ *= tsize_[a];
  }
  if (axial_n_ < 4) throw Error(Errc::TooFewNodes, "the axial axis needs at least 4 nodes");
  if (!(axial_half_ > 0.0)) throw Error(Errc::NonPositive, "axial half length must be positive");
}

std::vector<std::size_t> StripGrid::dims() const {
  auto d = tsize_;
  d.push_back(axial_n_);
  return d;
}

std::vector<double> StripGrid::spacings() const {
  auto s = tspacing_;
  s.push_back(axial_spacing());
  return s;
}

std::vector<std::size_t> StripGrid::line_coords(std::size_t line) const {
  std::vector<std::size_t> c(tsize_.size());
  for (std::size_t a = tsize_.size(); a-- > 0;) {
    c[a] = line % tsize_[a];
    line /= tsize_[a];
  }
  return c;
}

namespace {

// Line-index stride of each transverse axis (last axis has stride 1).
std::vector<std::size_t> line_strides(const StripGrid& g) {
  std::vector<std::size_t> s(g.transverse_axes(), 1);
  for (std::size_t a = g.transverse_axes(); a-- > 1;) s[a - 1] = s[a] * g.transverse_size(a);
  return s;
}

void require_size(const Field& z, const StripGrid& g, const char* what) {
  if (z.size() != g.size()) {
    throw Error(Errc::GridMismatch, std::string(what) + " has " + std::to_string(z.size()) + " values, grid has " +
                                        std::to_string(g.size()));
  }
}

// Orthonormal real eigenbasis of the periodic second difference on n points.
struct PeriodicBasis {
  std::size_t n = 0;
  std::vector<double> q;  // q[m * n + i]
  std::vector<double> eig;

  PeriodicBasis(std::size_t size, double h) : n(size), q(size * size), eig(size) {
    const double pi = std::numbers::pi;
    const double nn = static_cast<double>(n);
    auto fill = [&](std::size_t m, auto fn, double e) {
      for (std::size_t i = 0; i < n; ++i) q[m * n + i] = fn(static_cast<double>(i));
      eig[m] = e;
    };
    std::size_t m = 0;
    fill(m++, [&](double) { return 1.0 / std::sqrt(nn); }, 0.0);
    for (std::size_t k = 1; 2 * k < n; ++k) {
      const double kk = static_cast<double>(k);
      const double e = -4.0 / (h * h) * std::pow(std::sin(pi * kk / nn), 2);
      fill(m++, [&](double i) { return std::sqrt(2.0 / nn) * std::cos(2.0 * pi * kk * i / nn); }, e);
      fill(m++, [&](double i) { return std::sqrt(2.0 / nn) * std::sin(2.0 * pi * kk * i / nn); }, e);
    }
    if (n % 2 == 0) {
      fill(m++, [&](double i) { return (static_cast<long>(i) % 2 == 0 ? 1.0 : -1.0) / std::sqrt(nn); }, -4.0 / (h * h));
    }
  }
};

// Transverse diagonalization plus axial tridiagonal solves.
class HelmholtzSolver {
 public:
  explicit HelmholtzSolver(const StripGrid& grid) : grid_(grid), strides_(line_strides(grid)) {
    for (std::size_t a = 0; a < grid.transverse_axes(); ++a) {
      bases_.emplace_back(grid.transverse_size(a), grid.transverse_spacing(a));
    }
    mode_eig_.assign(grid.lines(), 0.0);
    for (std::size_t line = 0; line < grid.lines(); ++line) {
      const auto c = grid.line_coords(line);
      for (std::size_t a = 0; a < c.size(); ++a) mode_eig_[line] += bases_[a].eig[c[a]];
    }
  }

  Field solve(double c, const Field& rhs, double bc_bottom, double bc_top) const {
    if (!(c > 0.0)) throw Error(Errc::NonPositive, "Helmholtz shift must be positive");
    require_size(rhs, grid_, "rhs");
    const std::size_t n = grid_.axial_size();
    const double h = grid_.axial_spacing();
    const double h2 = h * h;

    Field r(rhs);
    for (std::size_t line = 0; line < grid_.lines(); ++line) {
      r[grid_.index(line, 0)] = 0.0;
      r[grid_.index(line, n - 1)] = 0.0;
      r[grid_.index(line, 1)] -= bc_bottom / h2;
      r[grid_.index(line, n - 2)] -= bc_top / h2;
    }
    for (std::size_t a = 0; a < bases_.size(); ++a) apply(r, a, false);

    // Thomas sweep per transverse mode; the system is strictly diagonally
    // dominant because every mode eigenvalue is <= 0 and c > 0.
    const double off = 1.0 / h2;
    std::vector<double> cp(n);
    for (std::size_t line = 0; line < grid_.lines(); ++line) {
      const double diag = -2.0 / h2 + mode_eig_[line] - c;
      double* z = r.data() + grid_.index(line, 0);
      double denom = diag;
      z[1] /= denom;
      cp[1] = off / denom;
      for (std::size_t j = 2; j + 1 < n; ++j) {
        denom = diag - off * cp[j - 1];
        cp[j] = off / denom;
        z[j] = (z[j] - off * z[j - 1]) / denom;
      }
      for (std::size_t j = n - 2; j-- > 1;) z[j] -= cp[j] * z[j + 1];
    }

    for (std::size_t a = 0; a < bases_.size(); ++a) apply(r, a, true);
    for (std::size_t line = 0; line < grid_.lines(); ++line) {
      r[grid_.index(line, 0)] = bc_bottom;
      r[grid_.index(line, n - 1)] = bc_top;
    }
    return r;
  }

 private:
  // Multiplies every fiber along transverse axis `a` by Q (forward) or Q^T.
  void apply(Field& z, std::size_t a, bool inverse) const {
    const auto& b = bases_[a];
    const std::size_t n = b.n;
    const std::size_t stride = strides_[a] * grid_.axial_size();
    const std::size_t block = stride * n;
    std::vector<double> tmp(n * stride);
    for (std::size_t base = 0; base < z.size(); base += block) {
      std::fill(tmp.begin(), tmp.end(), 0.0);
      for (std::size_t m = 0; m < n; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
          const double w = inverse ? b.q[i * n + m] : b.q[m * n + i];
          const double* src = z.data() + base + i * stride;
          double* dst = tmp.data() + m * stride;
          for (std::size_t k = 0; k < stride; ++k) dst[k] += w * src[k];
        }
      }
      std::copy(tmp.begin(), tmp.end(), z.begin() + static_cast<std::ptrdiff_t>(base));
    }
  }

  StripGrid grid_;
  std::vector<std::size_t> strides_;
  std::vector<PeriodicBasis> bases_;
  std::vector<double> mode_eig_;
};

// Uniform in [0, 1) from the top 53 bits; spelled out so the stream is the
// same on every standard library.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

SplitParams split_params(double beta, double omega) {
  if (!(omega > 0.0)) throw Error(Errc::NonPositive, "omega must be positive");
  double disc = beta * beta - 4.0 * omega;
  // beta = 2 sqrt(omega) evaluated in floating point lands a few ulps off.
  if (std::abs(disc) <= 1e-12 * std::max(beta * beta, 4.0 * omega)) disc = 0.0;
  if (disc < 0.0) throw Error(Errc::BelowCritical, "beta below 2 sqrt(omega)");
  SplitParams p;
  p.beta = beta;
  p.omega = omega;
  p.lambda = 0.5 * (beta - std::sqrt(disc));
  p.lambda_tilde = beta - p.lambda;
  p.mu = p.lambda * p.lambda_tilde;
  if (!(p.lambda > 0.0)) throw Error(Errc::BelowCritical, "splitting roots must be positive");
  return p;
}

Field laplacian(const Field& z, const StripGrid& grid) {
  require_size(z, grid, "field");
  const std::size_t n = grid.axial_size();
  const double ha2 = std::pow(grid.axial_spacing(), 2);
  const auto strides = line_strides(grid);
  Field out(z.size(), 0.0);
  for (std::size_t line = 0; line < grid.lines(); ++line) {
    const auto c = grid.line_coords(line);
    const double* zl = z.data() + grid.index(line, 0);
    double* ol = out.data() + grid.index(line, 0);
    for (std::size_t j = 1; j + 1 < n; ++j) ol[j] = (zl[j - 1] - 2.0 * zl[j] + zl[j + 1]) / ha2;
    for (std::size_t a = 0; a < c.size(); ++a) {
      const std::size_t nt = grid.transverse_size(a);
      const std::size_t up = c[a] + 1 == nt ? line - c[a] * strides[a] : line + strides[a];
      const std::size_t dn = c[a] == 0 ? line + (nt - 1) * strides[a] : line - strides[a];
      const double* zu = z.data() + grid.index(up, 0);
      const double* zd = z.data() + grid.index(dn, 0);
      const double ht2 = std::pow(grid.transverse_spacing(a), 2);
      for (std::size_t j = 1; j + 1 < n; ++j) ol[j] += (zu[j] - 2.0 * zl[j] + zd[j]) / ht2;
    }
  }
  return out;
}

Field helmholtz_solve(double c, const Field& rhs, double bc_bottom, double bc_top, const StripGrid& grid) {
  return HelmholtzSolver(grid).solve(c, rhs, bc_bottom, bc_top);
}

double residual_fourth_order(const StripGrid& grid, const Field& u, double beta, const Nonlinearity& nl) {
  const Field l1 = laplacian(u, grid);
  const Field l2 = laplacian(l1, grid);
  const std::size_t n = grid.axial_size();
  double r = 0.0;
  for (std::size_t line = 0; line < grid.lines(); ++line) {
    for (std::size_t j = 2; j + 2 < n; ++j) {
      const std::size_t k = grid.index(line, j);
      r = std::max(r, std::abs(l2[k] - beta * l1[k] - nl(u[k])));
    }
  }
  return r;
}

double residual_fourth_order(const SolutionField& fld, const Nonlinearity& nl) {
  return residual_fourth_order(fld.grid, fld.u, fld.beta, nl);
}

double splitting_defect(const SolutionField& fld) {
  const Field l = laplacian(fld.u, fld.grid);
  const std::size_t n = fld.grid.axial_size();
  double d = 0.0;
  for (std::size_t line = 0; line < fld.grid.lines(); ++line) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const std::size_t k = fld.grid.index(line, j);
      d = std::max(d, std::abs(l[k] - fld.lambda * fld.u[k] - fld.v[k]));
    }
  }
  return d;
}

SolutionField solve_strip(const Nonlinearity& nl, double beta, const StripGrid& grid, double bc_bottom,
                          double bc_top, const Field& init, double damping, double tol, std::size_t max_iter) {
  require_size(init, grid, "initial guess");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(Errc::InvalidArgument, "damping must lie in (0, 1]");
  const SplitParams sp = split_params(beta, omega_min(nl));
  const HelmholtzSolver solver(grid);
  const std::size_t n = grid.axial_size();

  SolutionField fld{grid, init, Field(init.size(), 0.0), beta, sp.lambda, bc_bottom, bc_top, {}};
  for (std::size_t line = 0; line < grid.lines(); ++line) {
    fld.u[grid.index(line, 0)] = bc_bottom;
    fld.u[grid.index(line, n - 1)] = bc_top;
  }

  Field g(init.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = nl(fld.u[k]) + sp.omega * fld.u[k];
    fld.v = solver.solve(sp.lambda_tilde, g, -sp.lambda * bc_bottom, -sp.lambda * bc_top);
    const Field next = solver.solve(sp.lambda, fld.v, bc_bottom, bc_top);
    for (std::size_t k = 0; k < g.size(); ++k) fld.u[k] = (1.0 - damping) * fld.u[k] + damping * next[k];
    const double r = residual_fourth_order(fld, nl);
    fld.residual_history.push_back(r);
    if (!std::isfinite(r)) break;
    if (r < tol) return fld;
  }
  throw NoConvergence("strip solve: residual " + std::to_string(fld.residual()) + " after " +
                          std::to_string(fld.iterations()) + " sweeps",
                      fld.residual_history, fld.iterations());
}

InitKind parse_init_kind(const std::string& name) {
  if (name == "ramp") return InitKind::Ramp;
  if (name == "bump") return InitKind::Bump;
  if (name == "constant") return InitKind::Constant;
  if (name == "noisy_ramp" || name == "noisy") return InitKind::NoisyRamp;
  throw Error(Errc::UnknownKind, "unknown initial guess '" + name + "'");
}

const char* to_string(InitKind kind) {
  switch (kind) {
    case InitKind::Ramp: return "ramp";
    case InitKind::Bump: return "bump";
    case InitKind::Constant: return "constant";
    case InitKind::NoisyRamp: return "noisy_ramp";
  }
  return "unknown";
}

Field make_initial_guess(InitKind kind, const StripGrid& grid, const InitParams& params) {
  const std::size_t n = grid.axial_size();
  Field z(grid.size());
  const double mid = 0.5 * (params.bc_top + params.bc_bottom);
  const double half = 0.5 * (params.bc_top - params.bc_bottom);

  switch (kind) {
    case InitKind::Ramp:
    case InitKind::NoisyRamp:
      for (std::size_t line = 0; line < grid.lines(); ++line) {
        for (std::size_t j = 0; j < n; ++j) {
          z[grid.index(line, j)] = mid + half * std::tanh(grid.axial_coordinate(j) / std::sqrt(2.0));
        }
      }
      break;
    case InitKind::Constant:
      std::fill(z.begin(), z.end(), params.value);
      break;
    case InitKind::Bump: {
      if (!(params.radius > 0.0)) throw Error(Errc::NonPositive, "bump radius must be positive");
      for (std::size_t line = 0; line < grid.lines(); ++line) {
        const auto c = grid.line_coords(line);
        double r2t = 0.0;
        for (std::size_t a = 0; a < c.size(); ++a) {
          const double x = static_cast<double>(c[a]) * grid.transverse_spacing(a) - 0.5 * grid.period(a);
          r2t += x * x;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double xa = grid.axial_coordinate(j);
          const double s2 = (r2t + xa * xa) / (params.radius * params.radius);
          z[grid.index(line, j)] = params.value + (s2 < 1.0 ? params.height * std::exp(1.0 - 1.0 / (1.0 - s2)) : 0.0);
        }
      }
      break;
    }
  }

  if (kind == InitKind::NoisyRamp && params.amplitude != 0.0) {
    std::mt19937_64 rng(params.seed);
    for (std::size_t line = 0; line < grid.lines(); ++line) {
      for (std::size_t j = 1; j + 1 < n; ++j) z[grid.index(line, j)] += params.amplitude * (2.0 * uniform01(rng) - 1.0);
    }
  }
  if (kind == InitKind::Ramp || kind == InitKind::NoisyRamp) {
    for (std::size_t line = 0; line < grid.lines(); ++line) {
      z[grid.index(line, 0)] = params.bc_bottom;
      z[grid.index(line, n - 1)] = params.bc_top;
    }
  }
  return z;
}

Field extrude(const Profile1D& profile, const StripGrid& grid) {
  if (profile.size() != grid.axial_size()) {
    throw Error(Errc::GridMismatch, "profile has " + std::to_string(profile.size()) + " nodes, axial axis has " +
                                        std::to_string(grid.axial_size()));
  }
  Field z(grid.size());
  for (std::size_t line = 0; line < grid.lines(); ++line) {
    std::copy(profile.values.begin(), profile.values.end(), z.begin() + static_cast<std::ptrdiff_t>(grid.index(line, 0)));
  }
  return z;
}

std::vector<double> axial_trace(const Field& z, const StripGrid& grid, std::size_t line) {
  require_size(z, grid, "field");
  const auto first = z.begin() + static_cast<std::ptrdiff_t>(grid.index(line, 0));
  return {first, first + static_cast<std::ptrdiff_t>(grid.axial_size())};
}

}  // namespace efk
