#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "efk/nonlinearity.hpp"
#include "efk/ode1d.hpp"

namespace efk {

/// Strip R^{N-1} x [-L, L]: periodic transverse axes followed by one
/// Dirichlet axis. Fields are stored row-major in the order of dims(), so
/// the axial index runs fastest.
class StripGrid {
 public:
  /// Transverse sizes/spacings may be empty (pure axial problem).
  StripGrid(std::vector<std::size_t> transverse_sizes, std::vector<double> transverse_spacings,
            std::size_t axial_size, double axial_half_length);

  std::size_t transverse_axes() const { return tsize_.size(); }
  std::size_t transverse_size(std::size_t axis) const { return tsize_[axis]; }
  double transverse_spacing(std::size_t axis) const { return tspacing_[axis]; }
  /// Period of a transverse axis (size * spacing).
  double period(std::size_t axis) const { return static_cast<double>(tsize_[axis]) * tspacing_[axis]; }

  std::size_t axial_size() const { return axial_n_; }
  double axial_half_length() const { return axial_half_; }
  double axial_spacing() const { return 2.0 * axial_half_ / static_cast<double>(axial_n_ - 1); }
  double axial_coordinate(std::size_t j) const { return -axial_half_ + axial_spacing() * static_cast<double>(j); }

  /// Number of transverse points (product of transverse sizes, 1 if none).
  std::size_t lines() const { return lines_; }
  std::size_t size() const { return lines_ * axial_n_; }
  std::size_t index(std::size_t line, std::size_t j) const { return line * axial_n_ + j; }

  /// Transverse sizes then the axial size.
  std::vector<std::size_t> dims() const;
  /// Transverse spacings then the axial spacing.
  std::vector<double> spacings() const;

  /// Transverse multi-index of a line (one entry per transverse axis).
  std::vector<std::size_t> line_coords(std::size_t line) const;

  friend bool operator==(const StripGrid& a, const StripGrid& b) {
    return a.tsize_ == b.tsize_ && a.tspacing_ == b.tspacing_ && a.axial_n_ == b.axial_n_ &&
           a.axial_half_ == b.axial_half_;
  }

 private:
  std::vector<std::size_t> tsize_;
  std::vector<double> tspacing_;
  std::size_t axial_n_;
  double axial_half_;
  std::size_t lines_;
};

using Field = std::vector<double>;

struct SplitParams {
  double lambda = 0.0;
  double lambda_tilde = 0.0;
  double mu = 0.0;  // lambda * lambda_tilde
  double beta = 0.0;
  double omega = 0.0;
};

/// Roots of lambda^2 - beta lambda + omega = 0, smaller root first.
SplitParams split_params(double beta, double omega);

/// Discrete Laplacian at axial nodes 1 .. n-2; boundary rows are left 0.
Field laplacian(const Field& z, const StripGrid& grid);

/// Solves (Lap_h - c) z = rhs at interior rows with z = bc on the two axial
/// boundary rows (rhs is ignored there).
Field helmholtz_solve(double c, const Field& rhs, double bc_bottom, double bc_top, const StripGrid& grid);

struct SolutionField {
  StripGrid grid;
  Field u;
  Field v;
  double beta = 0.0;
  double lambda = 0.0;
  double bc_bottom = 0.0;
  double bc_top = 0.0;
  std::vector<double> residual_history;

  std::size_t iterations() const { return residual_history.size(); }
  double residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

/// Max of |Lap_h^2 u - beta Lap_h u - f(u)| over rows 2 .. n-3.
double residual_fourth_order(const StripGrid& grid, const Field& u, double beta, const Nonlinearity& nl);
double residual_fourth_order(const SolutionField& fld, const Nonlinearity& nl);

/// Max of |Lap_h u - lambda u - v| over rows 1 .. n-2.
double splitting_defect(const SolutionField& fld);

/// Damped Picard iteration over the two Helmholtz solves of the splitting.
/// Throws NoConvergence (with the residual history) after max_iter sweeps.
SolutionField solve_strip(const Nonlinearity& nl, double beta, const StripGrid& grid, double bc_bottom,
                          double bc_top, const Field& init, double damping, double tol, std::size_t max_iter);

enum class InitKind { Ramp, Bump, Constant, NoisyRamp };

InitKind parse_init_kind(const std::string& name);
const char* to_string(InitKind kind);

struct InitParams {
  double bc_bottom = -1.0;
  double bc_top = 1.0;
  double value = 0.0;    // constant level, also the base of the bump
  double height = 0.5;   // bump height above the base
  double radius = 5.0;   // bump support radius
  std::uint64_t seed = 0;
  double amplitude = 0.0;
};

/// Deterministic starting fields. Boundary rows always carry the bc values
/// (constant and bump use `value` as their level).
Field make_initial_guess(InitKind kind, const StripGrid& grid, const InitParams& params);

/// Copies a 1D profile along every transverse line; the profile must have
/// the axial node count of the grid.
Field extrude(const Profile1D& profile, const StripGrid& grid);

/// Field restricted to one transverse line.
std::vector<double> axial_trace(const Field& z, const StripGrid& grid, std::size_t line);

}  // namespace efk
