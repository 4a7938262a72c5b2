#include "lyapcert/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lyapcert {

void FunctionClass::check() const {
  if (!std::isfinite(sigma) || std::isnan(beta)) throw InputError("function class: non-finite modulus");
  if (sigma < 0.0) throw InputError("function class: sigma must be nonnegative");
  if (!(sigma < beta)) throw InputError("function class: requires sigma < beta");
}

void MethodRepresentation::check() const {
  const auto n_ = static_cast<Eigen::Index>(n);
  const auto m_ = static_cast<Eigen::Index>(m);
  if (n == 0 || m == 0) throw InputError("representation: n and m must be positive");
  if (A.rows() != n_ || A.cols() != n_) throw InputError("representation: A must be n x n");
  if (B.rows() != n_ || B.cols() != m_) throw InputError("representation: B must be n x m");
  if (C.rows() != m_ || C.cols() != n_) throw InputError("representation: C must be m x n");
  if (D.rows() != m_ || D.cols() != m_) throw InputError("representation: D must be m x m");
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite())
    throw InputError("representation: non-finite matrix entries");
  if (classes.size() != m) throw InputError("representation: need one function class per component");
  for (const auto& c : classes) c.check();
}

MethodRepresentation MethodRepresentation::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != m) throw InputError("permuted: permutation length must equal m");
  Mat P = Mat::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) = 1.0;
  MethodRepresentation out = *this;
  out.B = B * P.transpose();
  out.C = P * C;
  out.D = P * D * P.transpose();
  for (std::size_t i = 0; i < m; ++i) out.classes[i] = classes[perm[i]];
  return out;
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::douglas_rachford: return "douglas_rachford";
    case Family::heavy_ball: return "heavy_ball";
    case Family::prox_heavy_ball: return "prox_heavy_ball";
    case Family::davis_yin: return "davis_yin";
    case Family::chambolle_pock: return "chambolle_pock";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::douglas_rachford, Family::heavy_ball, Family::prox_heavy_ball, Family::davis_yin,
                   Family::chambolle_pock})
    if (family_name(f) == name) return f;
  return std::nullopt;
}

std::size_t family_arity(Family f) {
  switch (f) {
    case Family::douglas_rachford: return 2;
    case Family::heavy_ball: return 2;
    case Family::prox_heavy_ball: return 3;
    case Family::davis_yin: return 2;
    case Family::chambolle_pock: return 3;
  }
  return 0;
}

std::size_t family_components(Family f) {
  switch (f) {
    case Family::douglas_rachford: return 2;
    case Family::heavy_ball: return 1;
    case Family::prox_heavy_ball: return 2;
    case Family::davis_yin: return 3;
    case Family::chambolle_pock: return 2;
  }
  return 0;
}

namespace {

Mat rows(std::initializer_list<std::initializer_list<double>> init) {
  const auto r = static_cast<Eigen::Index>(init.size());
  const auto c = static_cast<Eigen::Index>(init.begin()->size());
  Mat out(r, c);
  Eigen::Index i = 0;
  for (const auto& row : init) {
    if (static_cast<Eigen::Index>(row.size()) != c) throw std::logic_error("ragged matrix literal");
    Eigen::Index j = 0;
    for (double v : row) out(i, j++) = v;
    ++i;
  }
  return out;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(name) + " must be positive");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw InputError(std::string(name) + " must be finite");
}

}  // namespace

MethodRepresentation zoo_build(Family family, std::span<const double> p, std::span<const FunctionClass> classes) {
  if (p.size() != family_arity(family)) {
    std::ostringstream os;
    os << family_name(family) << ": expected " << family_arity(family) << " parameters, got " << p.size();
    throw InputError(os.str());
  }
  if (classes.size() != family_components(family)) {
    std::ostringstream os;
    os << family_name(family) << ": expected " << family_components(family) << " function classes, got "
       << classes.size();
    throw InputError(os.str());
  }
  for (const auto& c : classes) c.check();

  MethodRepresentation rep;
  rep.classes.assign(classes.begin(), classes.end());
  switch (family) {
    case Family::douglas_rachford: {
      const double g = p[0], l = p[1];
      require_positive(g, "gamma");
      require_finite(l, "lambda");
      if (l == 0.0) throw InputError("lambda must be nonzero");
      rep.n = 1;
      rep.m = 2;
      rep.A = rows({{1.0}});
      rep.B = rows({{-g * l, -g * l}});
      rep.C = rows({{1.0}, {1.0}});
      rep.D = rows({{-g, 0.0}, {-2.0 * g, -g}});
      break;
    }
    case Family::heavy_ball: {
      const double g = p[0], d = p[1];
      require_positive(g, "gamma");
      require_finite(d, "delta");
      rep.n = 2;
      rep.m = 1;
      rep.A = rows({{1.0 + d, -d}, {1.0, 0.0}});
      rep.B = rows({{-g}, {0.0}});
      rep.C = rows({{1.0, 0.0}});
      rep.D = rows({{0.0}});
      break;
    }
    case Family::prox_heavy_ball: {
      const double g = p[0], d1 = p[1], d2 = p[2];
      require_positive(g, "gamma");
      require_finite(d1, "delta1");
      require_finite(d2, "delta2");
      rep.n = 2;
      rep.m = 2;
      rep.A = rows({{1.0 + d1 + d2, -d1 - d2}, {1.0, 0.0}});
      rep.B = rows({{-g, -g}, {0.0, 0.0}});
      rep.C = rows({{1.0, 0.0}, {1.0 + d1, -d1}});
      rep.D = rows({{0.0, 0.0}, {-g, -g}});
      break;
    }
    case Family::davis_yin: {
      const double g = p[0], l = p[1];
      require_positive(g, "gamma");
      require_positive(l, "lambda");
      if (!classes[1].smooth())
        throw InputError("davis_yin: the gradient component (component 2) needs a finite beta");
      rep.n = 1;
      rep.m = 3;
      rep.A = rows({{1.0}});
      rep.B = rows({{-g * l, -g * l, -g * l}});
      rep.C = rows({{1.0}, {1.0}, {1.0}});
      rep.D = rows({{-g, 0.0, 0.0}, {-g, 0.0, 0.0}, {-2.0 * g, -g, -g}});
      break;
    }
    case Family::chambolle_pock: {
      const double t1 = p[0], t2 = p[1], th = p[2];
      require_positive(t1, "tau1");
      require_positive(t2, "tau2");
      require_finite(th, "theta");
      rep.n = 2;
      rep.m = 2;
      rep.A = rows({{1.0, -t1}, {0.0, 0.0}});
      rep.B = rows({{-t1, 0.0}, {0.0, 1.0}});
      rep.C = rows({{1.0, -t1}, {1.0, 1.0 / t2 - t1 * (1.0 + th)}});
      rep.D = rows({{-t1, 0.0}, {-t1 * (1.0 + th), -1.0 / t2}});
      break;
    }
  }
  return rep;
}

Mat sum_to_zero(std::size_t m) {
  const auto m_ = static_cast<Eigen::Index>(m);
  if (m <= 1) return Mat(m_, 0);
  Mat N(m_, m_ - 1);
  N.topRows(m_ - 1).setIdentity();
  N.row(m_ - 1).setConstant(-1.0);
  return N;
}

namespace {

bool lower_triangular(const Mat& D) {
  for (Eigen::Index i = 0; i < D.rows(); ++i)
    for (Eigen::Index j = i + 1; j < D.cols(); ++j)
      if (D(i, j) != 0.0) return false;
  return true;
}

}  // namespace

ValidationReport validate(const MethodRepresentation& rep) {
  ValidationReport r;
  try {
    rep.check();
  } catch (const InputError& e) {
    r.diagnostics.emplace_back(e.what());
    return r;
  }
  const auto n = static_cast<Eigen::Index>(rep.n);
  const auto m = static_cast<Eigen::Index>(rep.m);
  const Mat I = Mat::Identity(n, n);
  const Mat N = sum_to_zero(rep.m);
  const Mat ones = Mat::Ones(m, 1);

  // ran [BN 0; DN -1] within ran [I-A; -C]
  const Mat Y = matkit::vstack({I - rep.A, -rep.C});
  Mat X;
  if (m > 1)
    X = matkit::hstack({matkit::vstack({rep.B * N, rep.D * N}), matkit::vstack({Mat::Zero(n, 1), -ones})});
  else
    X = matkit::vstack({Mat::Zero(n, 1), -ones});
  r.range_condition = matkit::rank_tol(matkit::hstack({Y, X})) == matkit::rank_tol(Y);

  // null [I-A, -B] within null [N^T C, N^T D; 0, 1^T]
  const Mat Xn = matkit::hstack({I - rep.A, -rep.B});
  Mat K = matkit::hstack({Mat::Zero(1, n), ones.transpose()});
  if (m > 1) K = matkit::vstack({matkit::hstack({N.transpose() * rep.C, N.transpose() * rep.D}), K});
  const std::size_t rank_xn = Xn.cwiseAbs().maxCoeff() == 0.0 ? 0 : matkit::rank_tol(Xn);
  r.null_condition = matkit::rank_tol(matkit::vstack({Xn, K})) == rank_xn;
  r.fixed_point_encoding = r.range_condition && r.null_condition;
  if (!r.range_condition) r.diagnostics.emplace_back("range condition fails: some solutions have no fixed point");
  if (!r.null_condition) r.diagnostics.emplace_back("null condition fails: some fixed points do not encode solutions");

  r.controllable = rank_xn == rep.n;
  r.observable = matkit::rank_tol(Y) == rep.n;
  if (!r.controllable) r.diagnostics.emplace_back("rank [I-A, -B] < n: representation not minimal (controllability)");
  if (!r.observable) r.diagnostics.emplace_back("rank [I-A; -C] < n: representation not minimal (observability)");

  // Well-posedness, trying every component ordering when D is not already
  // lower triangular. Identity comes first in lexicographic order.
  std::vector<std::size_t> perm(rep.m);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  if (rep.m > 6) {
    r.permutation = perm;
    if (!lower_triangular(rep.D)) r.diagnostics.emplace_back("m > 6: permutation search skipped");
  }
  bool found = false;
  do {
    Mat Dp(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) Dp(i, j) = rep.D(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]));
    if (lower_triangular(Dp)) {
      found = true;
      r.permutation = perm;
      break;
    }
  } while (rep.m <= 6 && std::next_permutation(perm.begin(), perm.end()));

  if (!found) {
    r.diagnostics.emplace_back("no component ordering makes D lower triangular");
    return r;
  }
  const MethodRepresentation pr = rep.permuted(r.permutation);
  bool diag_ok = true;
  for (std::size_t i = 0; i < rep.m; ++i) {
    const double d = pr.D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (d > 0.0) diag_ok = false;
    if (d < 0.0) r.prox_components.push_back(i);
    if (pr.classes[i].smooth()) r.differentiable_components.push_back(i);
  }
  bool covered = true;
  for (std::size_t i = 0; i < rep.m; ++i) {
    const bool in_d = std::find(r.prox_components.begin(), r.prox_components.end(), i) != r.prox_components.end();
    const bool in_s = std::find(r.differentiable_components.begin(), r.differentiable_components.end(), i) !=
                      r.differentiable_components.end();
    if (!in_d && !in_s) covered = false;
  }
  if (!diag_ok) r.diagnostics.emplace_back("D has a positive diagonal entry");
  if (!covered) r.diagnostics.emplace_back("a component has neither a prox step ([D]_ii < 0) nor a finite beta");
  r.well_posed = diag_ok && covered;
  return r;
}

MethodRepresentation normalized(const MethodRepresentation& rep, const ValidationReport& report) {
  if (report.permutation.size() != rep.m) return rep;
  return rep.permuted(report.permutation);
}

}  // namespace lyapcert
