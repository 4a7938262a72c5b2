#include "lyapcert/interp.hpp"

#include <cmath>

namespace lyapcert::interp {

std::string_view pair_label(std::size_t k) {
  static constexpr std::array<std::string_view, 6> labels = {"o+", "+o", "o*", "*o", "+*", "*+"};
  return labels.at(k);
}

InterpolationBlocks build_blocks(std::span<const FunctionClass> classes) {
  const std::size_t m = classes.size();
  if (m == 0) throw InputError("build_blocks: need at least one component");
  InterpolationBlocks out;
  for (std::size_t l = 0; l < m; ++l) {
    const auto& c = classes[l];
    c.check();
    const double s = c.sigma, b = c.beta;
    Mat core(3, 3);
    if (c.smooth()) {
      core << b * s, -s, b, -s, 1.0, -1.0, b, -1.0, 1.0;
      core /= 2.0 * (b - s);
    } else {
      core << s, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0;
      core /= 2.0;
    }
    const Vec e = matkit::unit(m, l);
    out.M.push_back(matkit::kron(core, Mat(e.asDiagonal())));
    out.a.push_back(-e);
  }
  return out;
}

bool check_interpolation(std::span<const Triplet> family, const FunctionClass& cls) {
  const double w = cls.smooth() ? 1.0 / (2.0 * (cls.beta - cls.sigma)) : 0.0;
  for (const auto& ti : family) {
    for (const auto& tj : family) {
      const Vec dy = ti.y - tj.y;
      const double rhs = tj.F + tj.u.dot(dy) + 0.5 * cls.sigma * dy.squaredNorm() +
                         w * (ti.u - tj.u - cls.sigma * dy).squaredNorm();
      if (ti.F < rhs - 1e-9 * (1.0 + std::abs(ti.F) + std::abs(tj.F))) return false;
    }
  }
  return true;
}

StructureMatrices build_structure(const MethodRepresentation& rep) {
  rep.check();
  StructureMatrices st;
  st.n = rep.n;
  st.m = rep.m;
  const auto n = static_cast<Eigen::Index>(rep.n);
  const auto m = static_cast<Eigen::Index>(rep.m);
  const Eigen::Index g = n + 3 * m - 1;
  const Mat& A = rep.A;
  const Mat& B = rep.B;
  const Mat& C = rep.C;
  const Mat& D = rep.D;
  const Mat N = sum_to_zero(rep.m);
  st.N = N;
  const Mat In = Mat::Identity(n, n);
  const Mat Im = Mat::Identity(m, m);

  // Row block of E: first block (y_i - y_j) given by four column pieces,
  // then selector rows for u_i and u_j.
  auto make_E = [&](const Mat& x, const Mat& u, const Mat& up, const Mat& us, const Mat& sel_i, const Mat& sel_j) {
    Mat E = Mat::Zero(3 * m, g);
    E.block(0, 0, m, n) = x;
    E.block(0, n, m, m) = u;
    E.block(0, n + m, m, m) = up;
    if (m > 1) E.block(0, n + 2 * m, m, m - 1) = us;
    E.block(m, 0, m, g) = sel_i;
    E.block(2 * m, 0, m, g) = sel_j;
    return E;
  };
  // Selectors for u, u+, u* = N uhat*.
  Mat sel_u = Mat::Zero(m, g), sel_up = Mat::Zero(m, g), sel_us = Mat::Zero(m, g);
  sel_u.block(0, n, m, m) = Im;
  sel_up.block(0, n + m, m, m) = Im;
  if (m > 1) sel_us.block(0, n + 2 * m, m, m - 1) = N;

  const Mat CB = C * B;
  const Mat DN = m > 1 ? Mat(D * N) : Mat(m, 0);
  const Mat CBN = m > 1 ? Mat(CB * N) : Mat(m, 0);

  st.E[0] = make_E(C * (In - A), D - CB, -D, CBN, sel_u, sel_up);
  st.E[1] = make_E(C * (A - In), CB - D, D, -CBN, sel_up, sel_u);
  st.E[2] = make_E(C, D, Mat::Zero(m, m), -DN, sel_u, sel_us);
  st.E[3] = make_E(-C, -D, Mat::Zero(m, m), DN, sel_us, sel_u);
  st.E[4] = make_E(C * A, CB, D, -DN - CBN, sel_up, sel_us);
  st.E[5] = make_E(-C * A, -CB, -D, DN + CBN, sel_us, sel_up);

  auto make_H = [&](double a, double b) {
    Mat H(m, 2 * m);
    H << a * Im, b * Im;
    return H;
  };
  st.H = {make_H(1, -1), make_H(-1, 1), make_H(1, 0), make_H(-1, 0), make_H(0, 1), make_H(0, -1)};

  const Eigen::Index l = n + 2 * m;
  st.Sigma_o = Mat::Zero(l, g);
  st.Sigma_o.block(0, 0, n + m, n + m).setIdentity();
  if (m > 1) st.Sigma_o.block(n + m, n + 2 * m, m, m - 1) = N;
  st.Sigma_p = Mat::Zero(l, g);
  st.Sigma_p.block(0, 0, n, n) = A;
  st.Sigma_p.block(0, n, n, m) = B;
  if (m > 1) st.Sigma_p.block(0, n + 2 * m, n, m - 1) = -B * N;
  st.Sigma_p.block(n, n + m, m, m) = Im;
  if (m > 1) st.Sigma_p.block(n + m, n + 2 * m, m, m - 1) = N;

  const InterpolationBlocks blocks = build_blocks(rep.classes);
  st.Mlij.resize(rep.m);
  st.alij.resize(rep.m);
  for (std::size_t li = 0; li < rep.m; ++li) {
    for (std::size_t k = 0; k < kPairs.size(); ++k) {
      st.Mlij[li][k] = matkit::sym(st.E[k].transpose() * blocks.M[li] * st.E[k]);
      st.alij[li][k] = st.H[k].transpose() * blocks.a[li];
    }
  }
  return st;
}

}  // namespace lyapcert::interp
