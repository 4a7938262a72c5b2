#pragma once

// Concrete problem instances, trajectories of x+ = A x + B u, y = C x + D u
// on R^d, fixed points, and trajectory audits of Lyapunov certificates.

#include "lyapcert/certify.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lyapcert::simulate {

struct ComponentOracle {
  FunctionClass cls;
  std::string kind;
  std::size_t dim = 0;
  std::function<double(const Vec&)> value;
  /// Empty for nonsmooth components.
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&, double)> prox;
};

/// 1/2 (x - c)^T diag(h) (x - c) + b^T x; class F_{min h, max h} unless
/// `cls` is given (it must contain that range).
ComponentOracle quadratic(const Vec& h, const Vec& c, const Vec& b, std::optional<FunctionClass> cls = {});
/// a ||x - c||_1 + sigma/2 ||x||^2, class F_{sigma, inf}.
ComponentOracle abs_quadratic(double a, const Vec& c, double sigma);
/// Indicator of the box [lo, hi], class F_{0, inf}. Value is +inf outside.
ComponentOracle box_indicator(const Vec& lo, const Vec& hi);

/// Random member of `cls` on R^d drawn from the library above.
ComponentOracle random_instance(const FunctionClass& cls, std::size_t d, std::mt19937_64& rng);
std::vector<ComponentOracle> random_instances(const MethodRepresentation& rep, std::size_t d, std::mt19937_64& rng);

/// Stacked vectors: x = (x^(1), ..., x^(n)) with each x^(i) in R^d, and
/// likewise for u and y.
struct TrajectoryPoint {
  Vec x, u, y, F;
};

struct RunResult {
  std::vector<TrajectoryPoint> points;
  bool diverged = false;
  std::size_t diverged_at = 0;
  std::string error;
};

/// Each instance class must lie inside the method's class for that component.
/// K steps of the causal procedure: component i evaluates
/// v = C_i x + sum_{j<i} D_ij u_j, then takes a prox step with step -D_ii when
/// D_ii < 0 and a gradient evaluation otherwise. Requires D lower triangular.
/// Produces K + 1 points; a state that is non-finite or exceeds 1e12 (1 +
/// |x0|) stops the run with a divergence report.
RunResult run(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance, const Vec& x0,
              std::size_t K);

/// One evaluation of the outputs at state x (no state update).
TrajectoryPoint evaluate(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance, const Vec& x);

struct FixedPointResult {
  bool ok = false;
  TrajectoryPoint point;
  std::size_t iterations = 0;
  double step_residual = 0.0;
  double consensus_residual = 0.0;
  double sum_residual = 0.0;
  std::string error;
};

/// Iterates from x0 (zero when empty) until |x+ - x| <= 1e-12 (1 + |x|) or
/// `cap` steps, continues while the step keeps shrinking, then checks that all y components agree and the u components
/// sum to zero, both to 1e-8.
FixedPointResult find_fixed_point(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance,
                                  const Vec& x0 = {}, std::size_t cap = 1'000'000);

/// Quadratic form value of W on (x - x*, u, u*) summed over the d coordinates.
double lifted_form(const Mat& W, const TrajectoryPoint& p, const TrajectoryPoint& star, std::size_t n, std::size_t m);

struct AuditReport {
  bool passed = true;
  std::vector<double> V, R;
  /// max_k (V_{k+1} - rho V_k + R_k) / (1 + |V_k|)
  double max_lyapunov_violation = -std::numeric_limits<double>::infinity();
  double max_lower_bound_violation = -std::numeric_limits<double>::infinity();
  double max_gap_identity_error = 0.0;
  std::vector<std::string> violations;
};

/// Evaluates V and R along the trajectory and checks the decrease inequality
/// (slack 1e-7 (1 + |V_k|)), V >= P-form >= 0 and R >= T-form >= 0. With
/// `gap_identity` the T-form is also compared against
/// sum_i f_i(y_k^(i)) - f_i(y*) - <u*^(i), y_k^(i) - y*>.
AuditReport audit_certificate(const MethodRepresentation& rep, const std::vector<TrajectoryPoint>& trajectory,
                              const TrajectoryPoint& fixed_point, const certify::LyapunovCertificate& cert,
                              const certify::LowerBoundSpec& lb, double rho, bool gap_identity = false);

/// Header `k,x1,...,y1,...,u1,...,F1,...,V,R`; V and R columns are empty when
/// the report does not cover the row.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory, const AuditReport* audit);

}  // namespace lyapcert::simulate
