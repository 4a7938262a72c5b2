#pragma once

// Interpolation blocks for F_{sigma,beta} and the lifting matrices that map
// the Gram variable zeta = (dx, u, u+, uhat*) onto pairs of iterates.

#include "lyapcert/model.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace lyapcert::interp {

/// The three iterates: current (o), next (p) and solution (s).
enum class Point { o, p, s };

struct Pair {
  Point i;
  Point j;
};

/// Fixed pair order used everywhere multipliers are stored.
inline constexpr std::array<Pair, 6> kPairs = {{{Point::o, Point::p},
                                                {Point::p, Point::o},
                                                {Point::o, Point::s},
                                                {Point::s, Point::o},
                                                {Point::p, Point::s},
                                                {Point::s, Point::p}}};
/// Indices into kPairs of the pairs that avoid the next iterate.
inline constexpr std::array<std::size_t, 2> kStarPairs = {2, 3};

std::string_view pair_label(std::size_t k);

struct InterpolationBlocks {
  std::vector<Mat> M;  // 3m x 3m, acting on (y_i - y_j, u_i, u_j)
  std::vector<Vec> a;  // -e_l
};

InterpolationBlocks build_blocks(std::span<const FunctionClass> classes);

struct Triplet {
  Vec y;
  double F = 0.0;
  Vec u;
};

/// Checks every ordered pair of the family against the interpolation
/// inequality of the class, with slack 1e-9 (1 + |F_i| + |F_j|).
bool check_interpolation(std::span<const Triplet> family, const FunctionClass& cls);

struct StructureMatrices {
  std::size_t n = 0;
  std::size_t m = 0;
  Mat N;                   // m x (m-1), empty when m = 1
  std::array<Mat, 6> E;    // 3m x (n+3m-1), indexed like kPairs
  std::array<Mat, 6> H;    // m x 2m
  Mat Sigma_o, Sigma_p;    // (n+2m) x (n+3m-1)
  /// Mlij[l][k] = E[k]^T M_l E[k];  alij[l][k] = H[k]^T a_l.
  std::vector<std::array<Mat, 6>> Mlij;
  std::vector<std::array<Vec, 6>> alij;

  std::size_t gram_dim() const { return n + 3 * m - 1; }
  std::size_t lyap_dim() const { return n + 2 * m; }
};

StructureMatrices build_structure(const MethodRepresentation& rep);

}  // namespace lyapcert::interp
