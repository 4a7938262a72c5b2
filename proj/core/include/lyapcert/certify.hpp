#pragma once

// Lyapunov-inequality certificates: lower-bound presets, assembly of the
// C1-C3 semidefinite system, independent re-verification, the Slater check
// and the Gram-lifted worst-case problem used as a duality cross-check.

#include "lyapcert/interp.hpp"
#include "lyapcert/sdp.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lyapcert::certify {

enum class PresetKind { distance_to_solution, function_value_suboptimality, duality_gap };

struct Preset {
  PresetKind kind = PresetKind::distance_to_solution;
  /// 1-based component index for distance_to_solution.
  std::size_t index = 1;
};

/// "distance:i", "function_value" or "duality_gap".
Preset parse_preset(std::string_view text);
std::string preset_name(const Preset& p);

struct LowerBoundSpec {
  Mat P;
  Vec p;
  Mat T;
  Vec t;
};

LowerBoundSpec preset(const Preset& kind, const MethodRepresentation& rep);

/// Entries marked true are forced to zero.
struct StructureMask {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> Q;
  Eigen::Matrix<bool, Eigen::Dynamic, 1> q;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> S;
  Eigen::Matrix<bool, Eigen::Dynamic, 1> s;
};

/// Q = [[Qxx, 0], [0, 0]] with Qxx of size n; q, S, s free.
StructureMask restricted_mask(const MethodRepresentation& rep);
/// Duality-gap preset with P replaced by [[I_n, 0], [0, 0]].
LowerBoundSpec restricted_preset(const MethodRepresentation& rep);

struct LyapunovCertificate {
  double rho = 1.0;
  Mat Q;
  Vec q;
  Mat S;
  Vec s;
  /// Pair-major: entry k*m + l belongs to pair interp::kPairs[k], component l.
  Vec lambda_C1;
  /// Pair-major over interp::kStarPairs.
  Vec lambda_C2;
  Vec lambda_C3;
};

/// Positions of each unknown inside the decision vector of assemble().
struct Layout {
  std::size_t n = 0, m = 0, L = 0;
  std::size_t Q = 0, q = 0, S = 0, s = 0, l1 = 0, l2 = 0, l3 = 0, total = 0;

  explicit Layout(const MethodRepresentation& rep);
  /// Offset of the (i, j) entry (i <= j) of the upper triangle of an L x L
  /// symmetric unknown starting at `base`.
  std::size_t sym_index(std::size_t base, std::size_t i, std::size_t j) const;
};

struct Assembly {
  sdp::SdpProblem problem;
  /// Labels of blocks whose face was made explicit (see assemble).
  std::vector<std::string> reduced_blocks;
};

/// Builds the C1-C3 system at the given rate. Directions of the Gram
/// variable along which the iterates do not move and every interpolation
/// form vanishes (e.g. (0, N v, N v, v)) can force some blocks to be
/// singular on the whole feasible set; those blocks get the explicit
/// equalities F(y) Z = 0 so the solver sees a strictly feasible problem.
Assembly assemble(const MethodRepresentation& rep, const LowerBoundSpec& lb, double rho,
                  const StructureMask* mask = nullptr);

LyapunovCertificate extract(const MethodRepresentation& rep, const Vec& y, double rho);
Vec flatten(const MethodRepresentation& rep, const LyapunovCertificate& cert);

struct VerifyReport {
  bool passed = false;
  std::array<double, 3> min_eig{};
  std::array<double, 3> eq_residual{};
  double min_lambda = 0.0;
  std::vector<std::string> violations;
};

/// Rebuilds the three matrix inequalities and equalities from the raw
/// certificate and checks them with fixed tolerances.
VerifyReport verify_certificate(const MethodRepresentation& rep, const LowerBoundSpec& lb, double rho,
                                const LyapunovCertificate& cert);

/// The three LMI matrices of a certificate (C1, C2, C3).
std::array<Mat, 3> lmi_matrices(const MethodRepresentation& rep, const interp::StructureMatrices& st,
                                const LowerBoundSpec& lb, double rho, const LyapunovCertificate& cert);

struct SlaterReport {
  bool holds = false;
  double margin = 0.0;
  std::size_t dim_requirement = 0;
  sdp::MaxStatus status = sdp::MaxStatus::MaxIterations;
};

SlaterReport check_slater(const MethodRepresentation& rep);

/// Decision vector: upper triangle of G (row-major), then chi in R^{2m}.
sdp::SdpProblem assemble_primal_pep(const MethodRepresentation& rep, const Mat& Q_o, const Vec& q_o, const Mat& Q_p,
                                    const Vec& q_p, double trace_cap = 1e4);

struct PepObjective {
  Mat Q_o;
  Vec q_o;
  Mat Q_p;
  Vec q_p;
};

/// The objective whose worst case is nonpositive exactly when condition
/// `which` (1, 2 or 3) of the certificate holds.
PepObjective pep_objective(const LowerBoundSpec& lb, const LyapunovCertificate& cert, int which);

}  // namespace lyapcert::certify
