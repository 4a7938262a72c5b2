#include "lyapcert/matkit.hpp"

#include <algorithm>
#include <cmath>

namespace lyapcert::matkit {

bool all_finite(const Mat& m) { return m.allFinite(); }

bool is_symmetric(const Mat& m) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void require_symmetric(const Mat& m, const char* what) {
  if (!all_finite(m)) throw InputError(std::string(what) + ": non-finite entries");
  if (!is_symmetric(m)) throw InputError(std::string(what) + ": not symmetric");
}

std::vector<double> singular_values(const Mat& m) {
  if (m.size() == 0) return {};
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

namespace {

double rank_threshold(const Mat& m, double sigma_max) {
  return static_cast<double>(std::max(m.rows(), m.cols())) * sigma_max * kRankRelTol;
}

}  // namespace

std::size_t rank_tol(const Mat& m) {
  if (m.size() == 0) throw InputError("rank_tol: empty matrix");
  if (!all_finite(m)) throw InputError("rank_tol: non-finite entries");
  const auto s = singular_values(m);
  const double smax = s.empty() ? 0.0 : s.front();
  if (smax == 0.0) return 0;
  const double tau = rank_threshold(m, smax);
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [tau](double v) { return v > tau; }));
}

double min_eig(const Mat& s) {
  require_symmetric(s, "min_eig");
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double spectral_radius(const Mat& s) {
  if (s.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat kron(const Mat& a, const Mat& b) {
  if (a.size() == 0 || b.size() == 0) throw InputError("kron: empty operand");
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat null_space(const Mat& m) {
  const Eigen::Index n = m.cols();
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index r = 0;
  if (smax > 0.0) {
    const double tau = rank_threshold(m, smax);
    while (r < s.size() && s(r) > tau) ++r;
  }
  return svd.matrixV().rightCols(n - r);
}

Mat range_basis(const Mat& m) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const double smax = s(0);
  Eigen::Index r = 0;
  if (smax > 0.0) {
    const double tau = rank_threshold(m, smax);
    while (r < s.size() && s(r) > tau) ++r;
  }
  return svd.matrixU().leftCols(r);
}

Mat lstsq(const Mat& m, const Mat& rhs) {
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(m);
  cod.setThreshold(kRankRelTol * static_cast<double>(std::max(m.rows(), m.cols())));
  return cod.solve(rhs);
}

Mat vstack(const std::vector<Mat>& parts) {
  Eigen::Index rows = 0, cols = -1;
  for (const auto& p : parts) {
    if (p.rows() == 0) continue;
    if (cols >= 0 && p.cols() != cols) throw InputError("vstack: column mismatch");
    cols = p.cols();
    rows += p.rows();
  }
  if (cols < 0) return Mat(0, parts.empty() ? 0 : parts.front().cols());
  Mat out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    if (p.rows() == 0) continue;
    out.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return out;
}

Mat hstack(const std::vector<Mat>& parts) {
  Eigen::Index cols = 0, rows = -1;
  for (const auto& p : parts) {
    if (p.cols() == 0) continue;
    if (rows >= 0 && p.rows() != rows) throw InputError("hstack: row mismatch");
    rows = p.rows();
    cols += p.cols();
  }
  if (rows < 0) return Mat(parts.empty() ? 0 : parts.front().rows(), 0);
  Mat out(rows, cols);
  Eigen::Index c = 0;
  for (const auto& p : parts) {
    if (p.cols() == 0) continue;
    out.middleCols(c, p.cols()) = p;
    c += p.cols();
  }
  return out;
}

Vec unit(std::size_t n, std::size_t i) {
  Vec e = Vec::Zero(static_cast<Eigen::Index>(n));
  e(static_cast<Eigen::Index>(i)) = 1.0;
  return e;
}

double quad(const Mat& m, const Vec& z) { return z.dot(m * z); }

}  // namespace lyapcert::matkit
