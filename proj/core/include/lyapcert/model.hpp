#pragma once

// Method representations x+ = A x + B u, y = C x + D u, u in subdiff f(y),
// their structural checks, and builders for the standard splitting methods.

#include "lyapcert/matkit.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lyapcert {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// sigma-strongly convex, beta-smooth functions (beta may be +infinity).
struct FunctionClass {
  double sigma = 0.0;
  double beta = kInf;

  bool smooth() const { return beta < kInf; }
  /// Throws InputError unless 0 <= sigma < beta <= inf.
  void check() const;
  bool operator==(const FunctionClass&) const = default;
};

struct MethodRepresentation {
  std::size_t n = 0;
  std::size_t m = 0;
  Mat A, B, C, D;
  std::vector<FunctionClass> classes;

  /// Throws InputError on inconsistent dimensions, non-finite entries, or
  /// invalid classes.
  void check() const;

  /// Reorders components: new component i is old component perm[i].
  MethodRepresentation permuted(std::span<const std::size_t> perm) const;
};

struct ValidationReport {
  bool fixed_point_encoding = false;
  bool range_condition = false;
  bool null_condition = false;
  bool well_posed = false;
  bool controllable = false;
  bool observable = false;
  /// 0-based component indices with [D]_ii < 0 (after the permutation below).
  std::vector<std::size_t> prox_components;
  /// 0-based component indices with finite beta (after the permutation).
  std::vector<std::size_t> differentiable_components;
  /// Reordering that makes D lower triangular; identity when already so.
  std::vector<std::size_t> permutation;
  std::vector<std::string> diagnostics;

  bool all_ok() const { return fixed_point_encoding && well_posed && controllable && observable; }
};

enum class Family { douglas_rachford, heavy_ball, prox_heavy_ball, davis_yin, chambolle_pock };

std::string_view family_name(Family f);
std::optional<Family> parse_family(std::string_view name);
/// Expected parameter count for each family.
std::size_t family_arity(Family f);
/// Component count m for each family.
std::size_t family_components(Family f);

/// Builds the state-space matrices of a standard method.
///  douglas_rachford: (gamma, lambda)
///  heavy_ball:       (gamma, delta)
///  prox_heavy_ball:  (gamma, delta1, delta2)
///  davis_yin:        (gamma, lambda); component 2 is the gradient component
///  chambolle_pock:   (tau1, tau2, theta)
MethodRepresentation zoo_build(Family family, std::span<const double> params,
                               std::span<const FunctionClass> classes);

/// N = [I; -1^T] in R^{m x (m-1)}; an m x 0 matrix when m = 1.
Mat sum_to_zero(std::size_t m);

/// Runs the fixed-point encoding, well-posedness and minimality checks.
/// Failures are reported in the result, never thrown.
ValidationReport validate(const MethodRepresentation& rep);

/// Applies report.permutation when validation found one; otherwise returns
/// the representation unchanged.
MethodRepresentation normalized(const MethodRepresentation& rep, const ValidationReport& report);

}  // namespace lyapcert
