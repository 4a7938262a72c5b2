#pragma once

// Small dense semidefinite programs: linear matrix inequalities, linear
// equalities and sign constraints over a real decision vector y.
//
//   PSD blocks:   F0 + sum_k y_k F_k  >= 0
//   equalities:   g0 + G y = 0
//   inequalities: h0 + H y >= 0
//   nonneg:       y_i >= 0 for listed i

#include "lyapcert/matkit.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lyapcert::sdp {

struct PsdBlock {
  std::string label;
  Mat F0;
  std::vector<std::pair<std::size_t, Mat>> terms;

  Mat eval(const Vec& y) const;
};

struct EqBlock {
  std::string label;
  Vec g0;
  Mat G;

  Vec eval(const Vec& y) const { return g0 + G * y; }
};

struct IneqBlock {
  std::string label;
  Vec h0;
  Mat H;

  Vec eval(const Vec& y) const { return h0 + H * y; }
};

struct SdpProblem {
  std::size_t var_count = 0;
  std::vector<PsdBlock> psd;
  std::vector<EqBlock> eq;
  std::vector<IneqBlock> ineq;
  std::vector<std::size_t> nonneg;
  /// Linear objective for solve_max; empty or zero for feasibility.
  Vec objective;

  /// Throws InputError on bad dimensions, asymmetric blocks, duplicate labels
  /// or an empty variable set.
  void check() const;
};

enum class Status { Feasible, Infeasible, Marginal, MaxIterations };
std::string_view status_name(Status s);

struct SdpOutcome {
  Status status = Status::MaxIterations;
  std::optional<Vec> point;
  /// Phase-I optimum: largest t with every block >= tI and every sign
  /// constraint >= t.
  double margin = 0.0;
  std::size_t iterations = 0;
};

/// Inaccurate: the iteration stalled with small residuals but before the
/// gap closed to `tol`, typically on degenerate faces where the optimum is
/// attained only at the boundary of both cones.
enum class MaxStatus { Optimal, Inaccurate, Unbounded, Infeasible, MaxIterations };
std::string_view max_status_name(MaxStatus s);

struct MaxOutcome {
  MaxStatus status = MaxStatus::MaxIterations;
  double value = 0.0;
  /// Objective bound from the dual multipliers; an upper bound on the
  /// optimum up to their equality residual.
  double upper_bound = 0.0;
  Vec point;
  std::size_t iterations = 0;
};

struct SolverOptions {
  double feas_eps = 1e-8;
  double tol = 1e-9;
  std::size_t max_iter = 120;
  /// Phase-I bound |y_i| <= box keeps the auxiliary problem compact.
  double box = 1e4;
  /// Phase-I optima within this band trigger facial reduction.
  double face_band = 1e-6;
  /// Dual eigenvalues above face_rel_tol times the largest define the face.
  double face_rel_tol = 1e-6;
};

/// Seam for replacing the built-in solver.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string_view name() const = 0;
  virtual SdpOutcome feasibility(const SdpProblem& p, const SolverOptions& opt) const = 0;
  virtual MaxOutcome maximize(const SdpProblem& p, const SolverOptions& opt) const = 0;
};

/// Primal-dual interior point method (HKM direction, Mehrotra corrector).
class InteriorPointBackend final : public Backend {
 public:
  std::string_view name() const override { return "builtin-ipm"; }
  SdpOutcome feasibility(const SdpProblem& p, const SolverOptions& opt) const override;
  MaxOutcome maximize(const SdpProblem& p, const SolverOptions& opt) const override;
};

const Backend& default_backend();

SdpOutcome solve_feasibility(const SdpProblem& p, const SolverOptions& opt = {});
MaxOutcome solve_max(const SdpProblem& p, const SolverOptions& opt = {});

/// Smallest value over all constraints at y: min eigenvalue of each block,
/// each inequality row and each sign-constrained entry. Equalities are not
/// included; see max_eq_residual.
double constraint_margin(const SdpProblem& p, const Vec& y);
double max_eq_residual(const SdpProblem& p, const Vec& y);

/// Solution set of the equalities: y = y0 + V w with orthonormal V.
struct AffineSubspace {
  Vec y0;
  Mat V;
  bool consistent = true;
  double residual = 0.0;
};
AffineSubspace equality_subspace(const SdpProblem& p);

/// Symmetric basis element: E_ii, or E_ij + E_ji for i != j.
Mat sym_basis(Eigen::Index dim, Eigen::Index i, Eigen::Index j);

}  // namespace lyapcert::sdp
