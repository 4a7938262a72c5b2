#pragma once

// Dense linear-algebra helpers shared by every module. Matrices are plain
// Eigen values; nothing here holds state.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lyapcert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Thrown for malformed user input (dimension mismatch, non-finite data,
/// invalid parameters).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

namespace matkit {

/// Relative factor of the numerical-rank threshold.
inline constexpr double kRankRelTol = 1e-9;

bool all_finite(const Mat& m);

/// True when max |m(i,j) - m(j,i)| <= 1e-12 * (1 + max |m|).
bool is_symmetric(const Mat& m);

/// Throws InputError unless `m` is finite and square-symmetric.
void require_symmetric(const Mat& m, const char* what = "matrix");

/// Numerical rank: count of singular values above
/// max(rows, cols) * sigma_max * 1e-9.
std::size_t rank_tol(const Mat& m);

std::vector<double> singular_values(const Mat& m);

/// Smallest eigenvalue of a symmetric matrix.
double min_eig(const Mat& s);

/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_radius(const Mat& s);

Mat kron(const Mat& a, const Mat& b);

/// (a + a^T) / 2.
Mat sym(const Mat& a);

/// Orthonormal basis of null(m) using the rank_tol threshold. Returns a
/// cols x k matrix (k may be zero).
Mat null_space(const Mat& m);

/// Orthonormal basis of ran(m) using the rank_tol threshold.
Mat range_basis(const Mat& m);

/// Minimum-norm least-squares solution of m x = rhs.
Mat lstsq(const Mat& m, const Mat& rhs);

/// Vertical / horizontal concatenation; empty operands are skipped.
Mat vstack(const std::vector<Mat>& parts);
Mat hstack(const std::vector<Mat>& parts);

/// Standard basis vector e_i in R^n (0-based i).
Vec unit(std::size_t n, std::size_t i);

/// Quadratic form z^T m z.
double quad(const Mat& m, const Vec& z);

}  // namespace matkit
}  // namespace lyapcert
