#pragma once

// Drivers: bisection for the smallest certifiable linear rate and
// feasibility sweeps over two-parameter grids at rho = 1.

#include "lyapcert/certify.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lyapcert::analyze {

/// Outcome of one assemble/solve/verify round.
struct PointCheck {
  sdp::Status status = sdp::Status::MaxIterations;
  double margin = 0.0;
  /// Present only when the solver point re-verified.
  std::optional<certify::LyapunovCertificate> certificate;

  bool feasible() const { return certificate.has_value(); }
};

PointCheck check_rate(const MethodRepresentation& rep, const certify::LowerBoundSpec& lb, double rho,
                      const certify::StructureMask* mask = nullptr, const sdp::SolverOptions& opt = {});

struct RateResult {
  std::optional<double> rho;
  std::optional<certify::LyapunovCertificate> certificate;
  /// Set when neither bracket produced a definite verdict.
  bool inconclusive = false;
  std::size_t solves = 0;
  std::vector<std::string> diagnostics;
};

/// Smallest rho in [0, 1 - tol] (to within tol) with a verified certificate.
/// Marginal and iteration-limited verdicts count as infeasible.
RateResult bisect_rho(const MethodRepresentation& rep, const certify::Preset& preset, double tol = 1e-3,
                      const sdp::SolverOptions& opt = {});
RateResult bisect_rho(const MethodRepresentation& rep, const certify::LowerBoundSpec& lb, double tol = 1e-3,
                      const sdp::SolverOptions& opt = {});

/// lo:hi:step, inclusive of hi up to rounding.
struct Axis {
  double lo = 0.0, hi = 0.0, step = 0.01;

  std::vector<double> values() const;
};
Axis parse_axis(std::string_view text);

/// Maps a grid point to zoo parameters.
///  chambolle_pock:   (p1, p2) = (tau1 = tau2, theta)
///  heavy_ball:       (delta, gamma)
///  prox_heavy_ball:  (delta1, gamma) with delta2 = 0, or (delta2, gamma)
///                    with delta1 = 0 when `second_momentum` is set
///  douglas_rachford: (gamma, lambda)
///  davis_yin:        (gamma, lambda)
std::vector<double> sweep_params(Family family, double p1, double p2, bool second_momentum = false);

struct RegionSpec {
  Family family = Family::chambolle_pock;
  Axis p1, p2;
  std::vector<FunctionClass> classes;
  /// Defaults to function value for m = 1 and duality gap otherwise.
  std::optional<certify::Preset> preset;
  bool restricted = false;
  bool second_momentum = false;
};

struct RegionCell {
  std::size_t index = 0;
  double p1 = 0.0, p2 = 0.0;
  bool feasible = false;
  sdp::Status status = sdp::Status::MaxIterations;
  std::string error;
};

/// Cells come back in row-major grid order (p1 outer). `sink`, when given,
/// receives each cell as it completes (from worker threads, serialized).
std::vector<RegionCell> sweep_region(const RegionSpec& spec, std::size_t jobs = 1,
                                     const std::function<void(const RegionCell&)>& sink = {},
                                     const sdp::SolverOptions& opt = {});

/// Runs f(i) for i in [0, count) on `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& f);

/// Worker count from LYAPCERT_JOBS when set, else `requested` (0 means the
/// hardware concurrency).
std::size_t resolve_jobs(std::size_t requested);

std::string format_number(double v);

struct RatePoint {
  double param = 0.0;
  std::optional<double> rho;
  std::string status;
};

void write_rate_csv(std::ostream& os, const std::vector<RatePoint>& rows);
void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells);
std::vector<RegionCell> read_region_csv(std::istream& is);

}  // namespace lyapcert::analyze
