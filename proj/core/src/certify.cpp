#include "lyapcert/certify.hpp"

#include <cmath>
#include <sstream>

namespace lyapcert::certify {

using interp::kPairs;
using interp::kStarPairs;

Preset parse_preset(std::string_view text) {
  if (text == "function_value" || text == "function_value_suboptimality")
    return {PresetKind::function_value_suboptimality, 1};
  if (text == "duality_gap") return {PresetKind::duality_gap, 1};
  if (text == "distance") return {PresetKind::distance_to_solution, 1};
  if (text.starts_with("distance:")) {
    const std::string idx(text.substr(9));
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(idx, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != idx.size() || v < 1) throw InputError("preset: bad component index in '" + std::string(text) + "'");
    return {PresetKind::distance_to_solution, static_cast<std::size_t>(v)};
  }
  throw InputError("unknown preset '" + std::string(text) + "'");
}

std::string preset_name(const Preset& p) {
  switch (p.kind) {
    case PresetKind::distance_to_solution: return "distance:" + std::to_string(p.index);
    case PresetKind::function_value_suboptimality: return "function_value";
    case PresetKind::duality_gap: return "duality_gap";
  }
  return "?";
}

namespace {

// [C D -D]: maps (dx, u, u*) to y - y*.
Mat output_map(const MethodRepresentation& rep) { return matkit::hstack({rep.C, rep.D, -rep.D}); }

}  // namespace

LowerBoundSpec preset(const Preset& kind, const MethodRepresentation& rep) {
  rep.check();
  const auto m = static_cast<Eigen::Index>(rep.m);
  const auto L = static_cast<Eigen::Index>(rep.n + 2 * rep.m);
  LowerBoundSpec lb{Mat::Zero(L, L), Vec::Zero(m), Mat::Zero(L, L), Vec::Zero(m)};
  switch (kind.kind) {
    case PresetKind::distance_to_solution: {
      if (kind.index < 1 || kind.index > rep.m) throw InputError("distance preset: component index out of range");
      const Mat W = output_map(rep);
      const Mat row = W.row(static_cast<Eigen::Index>(kind.index - 1));
      lb.P = row.transpose() * row;
      break;
    }
    case PresetKind::function_value_suboptimality:
      if (rep.m != 1) throw InputError("function value preset requires m = 1");
      lb.t = Vec::Ones(1);
      break;
    case PresetKind::duality_gap: {
      const Mat W = matkit::vstack(
          {output_map(rep), matkit::hstack({Mat::Zero(m, static_cast<Eigen::Index>(rep.n) + m), Mat::Identity(m, m)})});
      Mat mid = Mat::Zero(2 * m, 2 * m);
      mid.topRightCorner(m, m) = -0.5 * Mat::Identity(m, m);
      mid.bottomLeftCorner(m, m) = -0.5 * Mat::Identity(m, m);
      lb.T = W.transpose() * mid * W;
      lb.t = Vec::Ones(m);
      break;
    }
  }
  return lb;
}

StructureMask restricted_mask(const MethodRepresentation& rep) {
  const auto n = static_cast<Eigen::Index>(rep.n);
  const auto m = static_cast<Eigen::Index>(rep.m);
  const Eigen::Index L = n + 2 * m;
  StructureMask mask;
  mask.Q.setConstant(L, L, true);
  mask.Q.topLeftCorner(n, n).setConstant(false);
  mask.q.setConstant(m, false);
  mask.S.setConstant(L, L, false);
  mask.s.setConstant(m, false);
  return mask;
}

LowerBoundSpec restricted_preset(const MethodRepresentation& rep) {
  LowerBoundSpec lb = preset({PresetKind::duality_gap, 1}, rep);
  const auto n = static_cast<Eigen::Index>(rep.n);
  lb.P.setZero();
  lb.P.topLeftCorner(n, n).setIdentity();
  return lb;
}

Layout::Layout(const MethodRepresentation& rep) : n(rep.n), m(rep.m), L(rep.n + 2 * rep.m) {
  const std::size_t tri = L * (L + 1) / 2;
  Q = 0;
  q = Q + tri;
  S = q + m;
  s = S + tri;
  l1 = s + m;
  l2 = l1 + 6 * m;
  l3 = l2 + 2 * m;
  total = l3 + 2 * m;
}

std::size_t Layout::sym_index(std::size_t base, std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return base + i * L - i * (i - 1) / 2 + (j - i);
}

namespace {

std::size_t tri_offset(std::size_t L, std::size_t i, std::size_t j) {
  // Row-major upper triangle: rows 0..i-1 hold L + (L-1) + ... entries.
  return i * L - i * (i - 1) / 2 + (j - i);
}

// tr(M B) for the symmetric basis element B of entry (a, b).
double basis_trace(const Mat& M, Eigen::Index a, Eigen::Index b) { return a == b ? M(a, a) : 2.0 * M(a, b); }

Mat lift(const Mat& Sigma, const Mat& W) { return Sigma.transpose() * W * Sigma; }

std::string block_label(int c) { return "C" + std::to_string(c); }

void check_lb(const MethodRepresentation& rep, const LowerBoundSpec& lb) {
  const auto L = static_cast<Eigen::Index>(rep.n + 2 * rep.m);
  const auto m = static_cast<Eigen::Index>(rep.m);
  if (lb.P.rows() != L || lb.P.cols() != L || lb.T.rows() != L || lb.T.cols() != L || lb.p.size() != m ||
      lb.t.size() != m)
    throw InputError("lower-bound spec does not match the representation");
  matkit::require_symmetric(lb.P, "P");
  matkit::require_symmetric(lb.T, "T");
}

// Subspaces of the Gram variable on which the iterate does not move
// (Sigma_+ z = Sigma_o z, hence y+ = y and u+ = u) and every interpolation
// form vanishes. Per component l, with dy = y - y* and the two subgradients
// u, u*, the forms vanish when
//   dy = 0 and u = u*            (any class; beta = inf needs only dy = 0)
//   u = c dy / 2, u* = -c dy / 2 (c = sigma, or c = beta when finite).
std::vector<Mat> stationary_subspaces(const MethodRepresentation& rep, const interp::StructureMatrices& st) {
  const auto n = static_cast<Eigen::Index>(st.n);
  const auto m = static_cast<Eigen::Index>(st.m);
  const auto g = static_cast<Eigen::Index>(st.gram_dim());
  Mat sel_u = Mat::Zero(m, g), sel_us = Mat::Zero(m, g);
  sel_u.block(0, n, m, m).setIdentity();
  if (m > 1) sel_us.block(0, n + 2 * m, m, m - 1) = st.N;
  const Mat dy = st.E[2].topRows(m);

  std::vector<std::vector<Mat>> options(static_cast<std::size_t>(m));
  for (Eigen::Index l = 0; l < m; ++l) {
    const FunctionClass& cls = rep.classes[static_cast<std::size_t>(l)];
    auto& opts = options[static_cast<std::size_t>(l)];
    if (cls.smooth()) opts.push_back(matkit::vstack({dy.row(l), sel_u.row(l) - sel_us.row(l)}));
    else opts.push_back(dy.row(l));
    std::vector<double> cs{cls.sigma};
    if (cls.smooth()) cs.push_back(cls.beta);
    for (double cc : cs)
      opts.push_back(matkit::vstack({sel_u.row(l) - 0.5 * cc * dy.row(l), sel_us.row(l) + 0.5 * cc * dy.row(l)}));
  }

  std::vector<Mat> out;
  std::vector<std::size_t> pick(static_cast<std::size_t>(m), 0);
  while (true) {
    std::vector<Mat> rows{st.Sigma_p - st.Sigma_o};
    for (std::size_t l = 0; l < pick.size(); ++l) rows.push_back(options[l][pick[l]]);
    const Mat Z = matkit::null_space(matkit::vstack(rows));
    if (Z.cols() > 0) out.push_back(Z);
    std::size_t l = 0;
    while (l < pick.size() && ++pick[l] == options[l].size()) pick[l++] = 0;
    if (l == pick.size()) break;
  }
  return out;
}

// Blocks k whose trace along Z is forced to zero on the equality set: some
// c >= 0 (positive on the subset) makes sum_k c_k tr(Z^T F_k(y) Z) constant
// and zero there.
std::vector<std::size_t> forced_blocks(const sdp::SdpProblem& p, const Mat& Z) {
  const sdp::AffineSubspace sub = sdp::equality_subspace(p);
  if (!sub.consistent) return {};
  const std::size_t nb = p.psd.size();
  const Eigen::Index nw = sub.V.cols();
  std::vector<double> alpha(nb);
  Mat beta = Mat::Zero(nw, static_cast<Eigen::Index>(nb));
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& b = p.psd[k];
    alpha[k] = (Z.transpose() * b.eval(sub.y0) * Z).trace();
    Vec g = Vec::Zero(static_cast<Eigen::Index>(p.var_count));
    for (const auto& [i, F] : b.terms) g(static_cast<Eigen::Index>(i)) += (Z.transpose() * F * Z).trace();
    beta.col(static_cast<Eigen::Index>(k)) = sub.V.transpose() * g;
  }
  double scale0 = 1.0 + (nw > 0 ? beta.cwiseAbs().maxCoeff() : 0.0);
  for (double a : alpha) scale0 = std::max(scale0, 1.0 + std::abs(a));
  for (Eigen::Index k = 0; k < beta.cols(); ++k)
    if (beta.col(k).norm() <= 1e-10 * scale0) beta.col(k).setZero();
  std::vector<bool> forced(nb, false);
  for (unsigned subset = 1; subset < (1u << nb); ++subset) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < nb; ++k)
      if (subset & (1u << k)) idx.push_back(k);
    Mat Bs(nw, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) Bs.col(static_cast<Eigen::Index>(a)) = beta.col(static_cast<Eigen::Index>(idx[a]));
    Vec c;
    if (nw == 0 || Bs.cwiseAbs().maxCoeff() == 0.0) {
      if (idx.size() != 1) continue;
      c = Vec::Ones(1);
    } else {
      const Mat ns = matkit::null_space(Bs);
      if (ns.cols() != 1) continue;
      c = ns.col(0);
    }
    if (c.sum() < 0.0) c = -c;
    if (c.minCoeff() <= 1e-6 * c.cwiseAbs().maxCoeff()) continue;
    double val = 0.0, scale = 1.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      val += c(static_cast<Eigen::Index>(a)) * alpha[idx[a]];
      scale += std::abs(c(static_cast<Eigen::Index>(a)) * alpha[idx[a]]);
    }
    if (std::abs(val) > 1e-8 * scale) continue;
    for (std::size_t k : idx) forced[k] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < nb; ++k)
    if (forced[k]) out.push_back(k);
  return out;
}

}  // namespace

Assembly assemble(const MethodRepresentation& rep, const LowerBoundSpec& lb, double rho, const StructureMask* mask) {
  rep.check();
  check_lb(rep, lb);
  if (!(rho >= 0.0 && rho <= 1.0)) throw InputError("rho must lie in [0, 1]");
  const interp::StructureMatrices st = interp::build_structure(rep);
  const Layout lay(rep);
  const std::size_t m = rep.m, L = lay.L;
  const auto g = static_cast<Eigen::Index>(st.gram_dim());
  const auto mi = static_cast<Eigen::Index>(m);

  Assembly out;
  sdp::SdpProblem& p = out.problem;
  p.var_count = lay.total;
  sdp::PsdBlock c1{block_label(1), Mat::Zero(g, g), {}};
  sdp::PsdBlock c2{block_label(2), -lift(st.Sigma_o, lb.P), {}};
  sdp::PsdBlock c3{block_label(3), -lift(st.Sigma_o, lb.T), {}};
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i; j < L; ++j) {
      const Mat B = sdp::sym_basis(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      const Mat Bo = lift(st.Sigma_o, B);
      const Mat Bp = lift(st.Sigma_p, B);
      const std::size_t off = tri_offset(L, i, j);
      c1.terms.emplace_back(lay.Q + off, rho * Bo - Bp);
      c1.terms.emplace_back(lay.S + off, -Bo);
      c2.terms.emplace_back(lay.Q + off, Bo);
      c3.terms.emplace_back(lay.S + off, Bo);
    }
  for (std::size_t k = 0; k < kPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) c1.terms.emplace_back(lay.l1 + k * m + l, st.Mlij[l][k]);
  for (std::size_t k = 0; k < kStarPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) {
      c2.terms.emplace_back(lay.l2 + k * m + l, st.Mlij[l][kStarPairs[k]]);
      c3.terms.emplace_back(lay.l3 + k * m + l, st.Mlij[l][kStarPairs[k]]);
    }
  p.psd = {std::move(c1), std::move(c2), std::move(c3)};

  const auto nv = static_cast<Eigen::Index>(lay.total);
  sdp::EqBlock e1{"eq" + block_label(1), Vec::Zero(2 * mi), Mat::Zero(2 * mi, nv)};
  sdp::EqBlock e2{"eq" + block_label(2), Vec::Zero(2 * mi), Mat::Zero(2 * mi, nv)};
  sdp::EqBlock e3{"eq" + block_label(3), Vec::Zero(2 * mi), Mat::Zero(2 * mi, nv)};
  e2.g0.head(mi) = -lb.p;
  e3.g0.head(mi) = -lb.t;
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    e1.G(ii, static_cast<Eigen::Index>(lay.q + i)) = rho;
    e1.G(mi + ii, static_cast<Eigen::Index>(lay.q + i)) = -1.0;
    e1.G(ii, static_cast<Eigen::Index>(lay.s + i)) = -1.0;
    e2.G(ii, static_cast<Eigen::Index>(lay.q + i)) = 1.0;
    e3.G(ii, static_cast<Eigen::Index>(lay.s + i)) = 1.0;
  }
  for (std::size_t k = 0; k < kPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) e1.G.col(static_cast<Eigen::Index>(lay.l1 + k * m + l)) = st.alij[l][k];
  for (std::size_t k = 0; k < kStarPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) {
      e2.G.col(static_cast<Eigen::Index>(lay.l2 + k * m + l)) = st.alij[l][kStarPairs[k]];
      e3.G.col(static_cast<Eigen::Index>(lay.l3 + k * m + l)) = st.alij[l][kStarPairs[k]];
    }
  p.eq = {std::move(e1), std::move(e2), std::move(e3)};

  if (mask) {
    const auto Li = static_cast<Eigen::Index>(L);
    if (mask->Q.rows() != Li || mask->Q.cols() != Li || mask->S.rows() != Li || mask->S.cols() != Li ||
        mask->q.size() != mi || mask->s.size() != mi)
      throw InputError("structure mask does not match the representation");
    std::vector<std::size_t> zeros;
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = i; j < L; ++j) {
        const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
        if (mask->Q(ii, jj) != mask->Q(jj, ii) || mask->S(ii, jj) != mask->S(jj, ii))
          throw InputError("structure mask must be symmetric");
        if (mask->Q(ii, jj)) zeros.push_back(lay.Q + tri_offset(L, i, j));
        if (mask->S(ii, jj)) zeros.push_back(lay.S + tri_offset(L, i, j));
      }
    for (std::size_t i = 0; i < m; ++i) {
      if (mask->q(static_cast<Eigen::Index>(i))) zeros.push_back(lay.q + i);
      if (mask->s(static_cast<Eigen::Index>(i))) zeros.push_back(lay.s + i);
    }
    if (!zeros.empty()) {
      sdp::EqBlock em{"mask", Vec::Zero(static_cast<Eigen::Index>(zeros.size())),
                      Mat::Zero(static_cast<Eigen::Index>(zeros.size()), nv)};
      for (std::size_t r = 0; r < zeros.size(); ++r)
        em.G(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(zeros[r])) = 1.0;
      p.eq.push_back(std::move(em));
    }
  }

  for (std::size_t i = lay.l1; i < lay.total; ++i) p.nonneg.push_back(i);

  for (const Mat& Z : stationary_subspaces(rep, st)) {
    for (std::size_t k : forced_blocks(p, Z)) {
      const auto& b = p.psd[k];
      const Eigen::Index rows = g * Z.cols();
      sdp::EqBlock ef{"face" + std::to_string(p.eq.size()) + b.label, Vec::Zero(rows), Mat::Zero(rows, nv)};
      const Mat FZ0 = b.F0 * Z;
      ef.g0 = Eigen::Map<const Vec>(FZ0.data(), rows);
      for (const auto& [i, F] : b.terms) {
        const Mat FZ = F * Z;
        ef.G.col(static_cast<Eigen::Index>(i)) += Eigen::Map<const Vec>(FZ.data(), rows);
      }
      out.reduced_blocks.push_back(b.label);
      p.eq.push_back(std::move(ef));
    }
  }
  return out;
}

LyapunovCertificate extract(const MethodRepresentation& rep, const Vec& y, double rho) {
  const Layout lay(rep);
  if (static_cast<std::size_t>(y.size()) != lay.total) throw InputError("extract: decision vector has wrong length");
  const auto L = static_cast<Eigen::Index>(lay.L);
  const auto m = static_cast<Eigen::Index>(lay.m);
  LyapunovCertificate c;
  c.rho = rho;
  c.Q.resize(L, L);
  c.S.resize(L, L);
  for (std::size_t i = 0; i < lay.L; ++i)
    for (std::size_t j = i; j < lay.L; ++j) {
      const std::size_t off = tri_offset(lay.L, i, j);
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      c.Q(ii, jj) = c.Q(jj, ii) = y(static_cast<Eigen::Index>(lay.Q + off));
      c.S(ii, jj) = c.S(jj, ii) = y(static_cast<Eigen::Index>(lay.S + off));
    }
  c.q = y.segment(static_cast<Eigen::Index>(lay.q), m);
  c.s = y.segment(static_cast<Eigen::Index>(lay.s), m);
  c.lambda_C1 = y.segment(static_cast<Eigen::Index>(lay.l1), 6 * m);
  c.lambda_C2 = y.segment(static_cast<Eigen::Index>(lay.l2), 2 * m);
  c.lambda_C3 = y.segment(static_cast<Eigen::Index>(lay.l3), 2 * m);
  return c;
}

Vec flatten(const MethodRepresentation& rep, const LyapunovCertificate& c) {
  const Layout lay(rep);
  const auto m = static_cast<Eigen::Index>(lay.m);
  Vec y(static_cast<Eigen::Index>(lay.total));
  for (std::size_t i = 0; i < lay.L; ++i)
    for (std::size_t j = i; j < lay.L; ++j) {
      const std::size_t off = tri_offset(lay.L, i, j);
      y(static_cast<Eigen::Index>(lay.Q + off)) = c.Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      y(static_cast<Eigen::Index>(lay.S + off)) = c.S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  y.segment(static_cast<Eigen::Index>(lay.q), m) = c.q;
  y.segment(static_cast<Eigen::Index>(lay.s), m) = c.s;
  y.segment(static_cast<Eigen::Index>(lay.l1), 6 * m) = c.lambda_C1;
  y.segment(static_cast<Eigen::Index>(lay.l2), 2 * m) = c.lambda_C2;
  y.segment(static_cast<Eigen::Index>(lay.l3), 2 * m) = c.lambda_C3;
  return y;
}

std::array<Mat, 3> lmi_matrices(const MethodRepresentation& rep, const interp::StructureMatrices& st,
                                const LowerBoundSpec& lb, double rho, const LyapunovCertificate& c) {
  const std::size_t m = rep.m;
  std::array<Mat, 3> F;
  F[0] = lift(st.Sigma_o, rho * c.Q - c.S) - lift(st.Sigma_p, c.Q);
  F[1] = lift(st.Sigma_o, c.Q - lb.P);
  F[2] = lift(st.Sigma_o, c.S - lb.T);
  for (std::size_t k = 0; k < kPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) F[0] += c.lambda_C1(static_cast<Eigen::Index>(k * m + l)) * st.Mlij[l][k];
  for (std::size_t k = 0; k < kStarPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) {
      F[1] += c.lambda_C2(static_cast<Eigen::Index>(k * m + l)) * st.Mlij[l][kStarPairs[k]];
      F[2] += c.lambda_C3(static_cast<Eigen::Index>(k * m + l)) * st.Mlij[l][kStarPairs[k]];
    }
  for (auto& f : F) f = matkit::sym(f);
  return F;
}

VerifyReport verify_certificate(const MethodRepresentation& rep, const LowerBoundSpec& lb, double rho,
                                const LyapunovCertificate& c) {
  VerifyReport r;
  const auto L = static_cast<Eigen::Index>(rep.n + 2 * rep.m);
  const auto m = static_cast<Eigen::Index>(rep.m);
  if (c.Q.rows() != L || c.Q.cols() != L || c.S.rows() != L || c.S.cols() != L || c.q.size() != m ||
      c.s.size() != m || c.lambda_C1.size() != 6 * m || c.lambda_C2.size() != 2 * m || c.lambda_C3.size() != 2 * m) {
    r.violations.emplace_back("certificate dimensions do not match the representation");
    return r;
  }
  if (!c.Q.allFinite() || !c.S.allFinite() || !c.q.allFinite() || !c.s.allFinite() || !c.lambda_C1.allFinite() ||
      !c.lambda_C2.allFinite() || !c.lambda_C3.allFinite()) {
    r.violations.emplace_back("certificate has non-finite entries");
    return r;
  }
  const interp::StructureMatrices st = interp::build_structure(rep);
  const auto F = lmi_matrices(rep, st, lb, rho, c);
  for (int k = 0; k < 3; ++k) {
    const double me = matkit::min_eig(F[static_cast<std::size_t>(k)]);
    const double sr = matkit::spectral_radius(F[static_cast<std::size_t>(k)]);
    r.min_eig[static_cast<std::size_t>(k)] = me;
    if (me < -1e-7 * (1.0 + sr)) {
      std::ostringstream os;
      os << block_label(k + 1) << " matrix inequality violated (min eigenvalue " << me << ")";
      r.violations.push_back(os.str());
    }
  }
  std::array<Vec, 3> res;
  res[0] = Vec::Zero(2 * m);
  res[0].head(m) = rho * c.q - c.s;
  res[0].tail(m) = -c.q;
  res[1] = Vec::Zero(2 * m);
  res[1].head(m) = c.q - lb.p;
  res[2] = Vec::Zero(2 * m);
  res[2].head(m) = c.s - lb.t;
  const std::size_t mm = rep.m;
  for (std::size_t k = 0; k < kPairs.size(); ++k)
    for (std::size_t l = 0; l < mm; ++l) res[0] += c.lambda_C1(static_cast<Eigen::Index>(k * mm + l)) * st.alij[l][k];
  for (std::size_t k = 0; k < kStarPairs.size(); ++k)
    for (std::size_t l = 0; l < mm; ++l) {
      res[1] += c.lambda_C2(static_cast<Eigen::Index>(k * mm + l)) * st.alij[l][kStarPairs[k]];
      res[2] += c.lambda_C3(static_cast<Eigen::Index>(k * mm + l)) * st.alij[l][kStarPairs[k]];
    }
  for (int k = 0; k < 3; ++k) {
    const double e = res[static_cast<std::size_t>(k)].lpNorm<Eigen::Infinity>();
    r.eq_residual[static_cast<std::size_t>(k)] = e;
    if (e > 1e-7) {
      std::ostringstream os;
      os << block_label(k + 1) << " equality violated (residual " << e << ")";
      r.violations.push_back(os.str());
    }
  }
  r.min_lambda = std::min({c.lambda_C1.minCoeff(), c.lambda_C2.minCoeff(), c.lambda_C3.minCoeff()});
  auto check_sign = [&](const Vec& v, int k) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) < -1e-10) {
        std::ostringstream os;
        os << "lambda_" << block_label(k) << "[" << i << "] negative (" << v(i) << ")";
        r.violations.push_back(os.str());
      }
  };
  check_sign(c.lambda_C1, 1);
  check_sign(c.lambda_C2, 2);
  check_sign(c.lambda_C3, 3);
  r.passed = r.violations.empty();
  return r;
}

namespace {

// Gram-lifted constraint rows shared by the Slater problem and the primal
// worst-case problem. Variables: upper triangle of G, then chi, then extras.
sdp::IneqBlock interpolation_rows(const interp::StructureMatrices& st, Eigen::Index nv, double slack_coef,
                                  Eigen::Index slack_index) {
  const std::size_t m = st.m;
  const auto g = static_cast<Eigen::Index>(st.gram_dim());
  const Eigen::Index tri = g * (g + 1) / 2;
  const auto rows = static_cast<Eigen::Index>(6 * m);
  sdp::IneqBlock b{"interpolation", Vec::Zero(rows), Mat::Zero(rows, nv)};
  for (std::size_t k = 0; k < kPairs.size(); ++k)
    for (std::size_t l = 0; l < m; ++l) {
      const auto r = static_cast<Eigen::Index>(k * m + l);
      const Mat& M = st.Mlij[l][k];
      for (Eigen::Index a = 0; a < g; ++a)
        for (Eigen::Index c = a; c < g; ++c)
          b.H(r, static_cast<Eigen::Index>(tri_offset(static_cast<std::size_t>(g), static_cast<std::size_t>(a),
                                                      static_cast<std::size_t>(c)))) = -basis_trace(M, a, c);
      b.H.block(r, tri, 1, static_cast<Eigen::Index>(2 * m)) = -st.alij[l][k].transpose();
      if (slack_index >= 0) b.H(r, slack_index) = slack_coef;
    }
  return b;
}

sdp::IneqBlock trace_row(Eigen::Index g, Eigen::Index nv, double cap) {
  sdp::IneqBlock b{"trace", Vec::Constant(1, cap), Mat::Zero(1, nv)};
  for (Eigen::Index a = 0; a < g; ++a)
    b.H(0, static_cast<Eigen::Index>(tri_offset(static_cast<std::size_t>(g), static_cast<std::size_t>(a),
                                                static_cast<std::size_t>(a)))) = -1.0;
  return b;
}

sdp::PsdBlock gram_block(Eigen::Index g, Eigen::Index slack_index) {
  sdp::PsdBlock b{"G", Mat::Zero(g, g), {}};
  for (Eigen::Index a = 0; a < g; ++a)
    for (Eigen::Index c = a; c < g; ++c)
      b.terms.emplace_back(
          tri_offset(static_cast<std::size_t>(g), static_cast<std::size_t>(a), static_cast<std::size_t>(c)),
          sdp::sym_basis(g, a, c));
  if (slack_index >= 0) b.terms.emplace_back(static_cast<std::size_t>(slack_index), -Mat::Identity(g, g));
  return b;
}

}  // namespace

SlaterReport check_slater(const MethodRepresentation& rep) {
  const interp::StructureMatrices st = interp::build_structure(rep);
  const auto g = static_cast<Eigen::Index>(st.gram_dim());
  const Eigen::Index tri = g * (g + 1) / 2;
  const Eigen::Index slack = tri + static_cast<Eigen::Index>(2 * rep.m);
  const Eigen::Index nv = slack + 1;
  sdp::SdpProblem p;
  p.var_count = static_cast<std::size_t>(nv);
  p.psd.push_back(gram_block(g, slack));
  p.ineq.push_back(interpolation_rows(st, nv, -1.0, slack));
  p.ineq.push_back(trace_row(g, nv, static_cast<double>(g)));
  p.objective = Vec::Zero(nv);
  p.objective(slack) = 1.0;
  const sdp::MaxOutcome res = sdp::solve_max(p);
  SlaterReport r;
  r.status = res.status;
  r.margin = res.value;
  r.dim_requirement = st.gram_dim();
  r.holds = res.status == sdp::MaxStatus::Optimal && res.value > 1e-7;
  return r;
}

sdp::SdpProblem assemble_primal_pep(const MethodRepresentation& rep, const Mat& Q_o, const Vec& q_o, const Mat& Q_p,
                                    const Vec& q_p, double trace_cap) {
  if (!(trace_cap > 0.0)) throw InputError("trace cap must be positive");
  const auto L = static_cast<Eigen::Index>(rep.n + 2 * rep.m);
  const auto m = static_cast<Eigen::Index>(rep.m);
  if (Q_o.rows() != L || Q_o.cols() != L || Q_p.rows() != L || Q_p.cols() != L || q_o.size() != m || q_p.size() != m)
    throw InputError("primal PEP objective does not match the representation");
  const interp::StructureMatrices st = interp::build_structure(rep);
  const auto g = static_cast<Eigen::Index>(st.gram_dim());
  const Eigen::Index tri = g * (g + 1) / 2;
  const Eigen::Index nv = tri + 2 * m;
  sdp::SdpProblem p;
  p.var_count = static_cast<std::size_t>(nv);
  p.psd.push_back(gram_block(g, -1));
  p.ineq.push_back(interpolation_rows(st, nv, 0.0, -1));
  p.ineq.push_back(trace_row(g, nv, trace_cap));
  const Mat bQ = matkit::sym(lift(st.Sigma_o, Q_o) + lift(st.Sigma_p, Q_p));
  p.objective = Vec::Zero(nv);
  for (Eigen::Index a = 0; a < g; ++a)
    for (Eigen::Index c = a; c < g; ++c)
      p.objective(static_cast<Eigen::Index>(tri_offset(static_cast<std::size_t>(g), static_cast<std::size_t>(a),
                                                       static_cast<std::size_t>(c)))) = basis_trace(bQ, a, c);
  p.objective.segment(tri, m) = q_o;
  p.objective.segment(tri + m, m) = q_p;
  return p;
}

PepObjective pep_objective(const LowerBoundSpec& lb, const LyapunovCertificate& c, int which) {
  const Eigen::Index L = c.Q.rows();
  const Eigen::Index m = c.q.size();
  switch (which) {
    case 1: return {c.S - c.rho * c.Q, c.s - c.rho * c.q, c.Q, c.q};
    case 2: return {lb.P - c.Q, lb.p - c.q, Mat::Zero(L, L), Vec::Zero(m)};
    case 3: return {lb.T - c.S, lb.t - c.s, Mat::Zero(L, L), Vec::Zero(m)};
    default: throw InputError("pep_objective: condition must be 1, 2 or 3");
  }
}

}  // namespace lyapcert::certify
