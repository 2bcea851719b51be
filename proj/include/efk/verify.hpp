#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "efk/nonlinearity.hpp"
#include "efk/ode1d.hpp"
#include "efk/strip.hpp"

namespace efk {

enum class Verdict { Passed, Failed, HypothesisFailed };

const char* to_string(Verdict v);

/// Node of the worst violation: grid multi-index (transverse..., axial) and
/// the matching coordinates. `note` labels witnesses that are not nodes.
struct Witness {
  std::vector<std::size_t> index;
  std::vector<double> position;
  std::string note;
};

using ContextValue = std::variant<double, std::int64_t, bool, std::string>;

struct VerificationReport {
  std::string check_name;
  bool passed = false;
  double margin = 0.0;
  std::optional<Witness> witness;
  std::vector<std::pair<std::string, ContextValue>> context;
  Verdict verdict = Verdict::Failed;

  bool hypothesis_failed() const { return verdict == Verdict::HypothesisFailed; }
  const ContextValue* find(const std::string& key) const;
};

/// One JSON object {check, passed, margin, witness, context} without a
/// trailing newline. The verdict is stored in context.
std::string to_json_line(const VerificationReport& r);

/// Non-owning view of a field on a strip grid; 1D profiles become a grid
/// without transverse axes.
class FieldView {
 public:
  FieldView(const StripGrid& grid, const Field& values);
  FieldView(const SolutionField& f);   // NOLINT(google-explicit-constructor)
  FieldView(const Profile1D& p);       // NOLINT(google-explicit-constructor)

  const StripGrid& grid() const { return grid_; }
  const Field& values() const { return *values_; }

 private:
  StripGrid grid_;
  const Field* values_;
};

/// alpha_- - tol <= u <= alpha_+ + tol. Below beta_f the bound is not
/// claimed and the report is hypothesis_failed.
VerificationReport check_apriori_bounds(const FieldView& fld, const Nonlinearity& nl, double beta,
                                        double tol = 1e-4);

/// tol minus the largest transverse oscillation over axial rows.
VerificationReport check_one_dimensionality(const FieldView& fld, double tol);

/// Smallest axial first difference; passes when >= -tol.
VerificationReport check_monotonicity(const FieldView& fld, double tol = 1e-9);

enum class HalfSpace { Upper, Lower };

/// Discrete half-space comparison: finds the plane A where the hypothesis
/// block holds, then checks z1 <= z2 and (Lap-lambda) z1 >= (Lap-lambda) z2
/// strictly beyond it.
VerificationReport check_comparison_halfspace(const FieldView& z1, const FieldView& z2, double lambda,
                                              const Nonlinearity& nl, double beta, HalfSpace side,
                                              double tol = 1e-8);

struct SlidingResult {
  double tau_star = 0.0;
  std::vector<double> xi_prime;
  std::vector<double> tau_grid;
  std::vector<double> violation_curve;  // min(u - u_tau) per tau
  double resolution = 0.0;     // tau spacing; the scan is k * resolution, k = 1..n_tau
  bool curve_monotone = true;
  std::vector<std::size_t> worst_index;  // node of the smallest u - u_tau
  std::vector<double> worst_position;
};

/// Scans u_tau(x', x_N) = u(x' + xi', x_N - tau) at tau = k tau_max / n_tau,
/// k = 1..n_tau. The axial shift interpolates linearly and pads with the
/// bottom row; xi' must be a multiple of the transverse spacings. tau_star
/// is 0 when no scanned tau violates, the next grid point after the last
/// violation otherwise, and +inf when the last one violates.
SlidingResult sliding_tau_star(const FieldView& fld, const std::vector<double>& xi_prime, double tau_max,
                               std::size_t n_tau, double tol = 1e-8);

/// Report form: margin is the smallest violation; passes iff tau_star = 0.
VerificationReport sliding_report(const SlidingResult& s, double tol = 1e-8);

enum class LiouvilleSide { Minus, Plus };

struct InitSpec {
  InitKind kind = InitKind::Constant;
  InitParams params;
};

struct StripSolveSettings {
  double damping = 0.5;
  double tol = 1e-10;
  std::size_t max_iter = 5000;
};

/// Solves with both axial limits at alpha_- (Minus) or alpha_+ (Plus) from
/// each start and checks that every solution is that constant. Converged
/// fields are appended to `fields` when given.
VerificationReport liouville_experiment(const Nonlinearity& nl, double beta, LiouvilleSide which,
                                        const StripGrid& grid, const std::vector<InitSpec>& inits, double tol,
                                        const StripSolveSettings& settings = {},
                                        std::vector<SolutionField>* fields = nullptr);

}  // namespace efk
