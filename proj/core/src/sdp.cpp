#include "lyapcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace lyapcert::sdp {

Mat PsdBlock::eval(const Vec& y) const {
  Mat out = F0;
  for (const auto& [k, F] : terms) out += y(static_cast<Eigen::Index>(k)) * F;
  return out;
}

void SdpProblem::check() const {
  if (var_count == 0) throw InputError("sdp: problem has no variables");
  const auto nv = static_cast<Eigen::Index>(var_count);
  std::set<std::string> labels;
  auto add_label = [&](const std::string& l) {
    if (!labels.insert(l).second) throw InputError("sdp: duplicate label '" + l + "'");
  };
  for (const auto& b : psd) {
    add_label(b.label);
    matkit::require_symmetric(b.F0, "sdp block constant");
    for (const auto& [k, F] : b.terms) {
      if (k >= var_count) throw InputError("sdp: block '" + b.label + "' references a missing variable");
      if (F.rows() != b.F0.rows() || F.cols() != b.F0.cols())
        throw InputError("sdp: block '" + b.label + "' has inconsistent term size");
      matkit::require_symmetric(F, "sdp block term");
    }
  }
  for (const auto& e : eq) {
    add_label(e.label);
    if (e.G.cols() != nv || e.G.rows() != e.g0.size())
      throw InputError("sdp: equality '" + e.label + "' is misdimensioned");
    if (!e.G.allFinite() || !e.g0.allFinite()) throw InputError("sdp: non-finite equality data");
  }
  for (const auto& e : ineq) {
    add_label(e.label);
    if (e.H.cols() != nv || e.H.rows() != e.h0.size())
      throw InputError("sdp: inequality '" + e.label + "' is misdimensioned");
    if (!e.H.allFinite() || !e.h0.allFinite()) throw InputError("sdp: non-finite inequality data");
  }
  for (std::size_t i : nonneg)
    if (i >= var_count) throw InputError("sdp: sign constraint on a missing variable");
  if (objective.size() != 0 && objective.size() != nv) throw InputError("sdp: objective has wrong length");
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Feasible: return "Feasible";
    case Status::Infeasible: return "Infeasible";
    case Status::Marginal: return "Marginal";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "?";
}

std::string_view max_status_name(MaxStatus s) {
  switch (s) {
    case MaxStatus::Optimal: return "Optimal";
    case MaxStatus::Inaccurate: return "Inaccurate";
    case MaxStatus::Unbounded: return "Unbounded";
    case MaxStatus::Infeasible: return "Infeasible";
    case MaxStatus::MaxIterations: return "MaxIterations";
  }
  return "?";
}

Mat sym_basis(Eigen::Index dim, Eigen::Index i, Eigen::Index j) {
  Mat E = Mat::Zero(dim, dim);
  E(i, j) = 1.0;
  E(j, i) = 1.0;
  return E;
}

double constraint_margin(const SdpProblem& p, const Vec& y) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& b : p.psd)
    if (b.F0.size() > 0) t = std::min(t, matkit::min_eig(matkit::sym(b.eval(y))));
  for (const auto& e : p.ineq)
    if (e.h0.size() > 0) t = std::min(t, e.eval(y).minCoeff());
  for (std::size_t i : p.nonneg) t = std::min(t, y(static_cast<Eigen::Index>(i)));
  return t;
}

double max_eq_residual(const SdpProblem& p, const Vec& y) {
  double r = 0.0;
  for (const auto& e : p.eq)
    if (e.g0.size() > 0) r = std::max(r, e.eval(y).lpNorm<Eigen::Infinity>());
  return r;
}

AffineSubspace equality_subspace(const SdpProblem& p) {
  AffineSubspace out;
  const auto nv = static_cast<Eigen::Index>(p.var_count);
  Eigen::Index rows = 0;
  for (const auto& e : p.eq) rows += e.g0.size();
  if (rows == 0) {
    out.y0 = Vec::Zero(nv);
    out.V = Mat::Identity(nv, nv);
    return out;
  }
  Mat G(rows, nv);
  Vec g(rows);
  Eigen::Index at = 0;
  for (const auto& e : p.eq) {
    G.middleRows(at, e.g0.size()) = e.G;
    g.segment(at, e.g0.size()) = e.g0;
    at += e.g0.size();
  }
  out.y0 = matkit::lstsq(G, -g);
  out.residual = (G * out.y0 + g).lpNorm<Eigen::Infinity>();
  const double scale = 1.0 + g.lpNorm<Eigen::Infinity>() + G.cwiseAbs().maxCoeff() * out.y0.lpNorm<Eigen::Infinity>();
  out.consistent = out.residual <= 1e-9 * scale;
  out.V = matkit::null_space(G);
  return out;
}

namespace {

// Problem after eliminating equalities (y = y0 + V w) and removing the common
// kernel of every block (blocks are compressed to U^T F U).
struct Reduction {
  bool consistent = true;
  double eq_residual = 0.0;
  Vec y0;
  Mat V;
  std::vector<Mat> U;
  std::vector<Mat> blk0;
  std::vector<std::vector<Mat>> blk;  // [block][w index]; zero-size when negligible
  Vec lp0;                            // sign rows then inequality rows
  Mat lp;

  Eigen::Index nw() const { return V.cols(); }
};

Reduction reduce(const SdpProblem& p) {
  Reduction r;
  {
    AffineSubspace sub = equality_subspace(p);
    r.consistent = sub.consistent;
    r.eq_residual = sub.residual;
    r.y0 = std::move(sub.y0);
    r.V = std::move(sub.V);
  }
  const Eigen::Index nw = r.V.cols();

  for (const auto& b : p.psd) {
    const Eigen::Index d = b.F0.rows();
    Mat G0 = b.eval(r.y0);
    std::vector<Mat> Gj(static_cast<std::size_t>(nw), Mat::Zero(d, d));
    for (const auto& [k, F] : b.terms)
      for (Eigen::Index j = 0; j < nw; ++j) {
        const double v = r.V(static_cast<Eigen::Index>(k), j);
        if (v != 0.0) Gj[static_cast<std::size_t>(j)] += v * F;
      }
    double big = G0.norm();
    for (const auto& M : Gj) big = std::max(big, M.norm());
    // Common kernel: left null space of [G0 G1 ... ].
    std::vector<Mat> parts{G0};
    for (auto& M : Gj) {
      if (M.norm() <= 1e-13 * big) M.setZero();
      else parts.push_back(M);
    }
    Mat U;
    if (big == 0.0) {
      U = Mat(d, 0);
    } else {
      const Mat stack = matkit::hstack(parts);
      Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeFullU);
      const Vec& s = svd.singularValues();
      Eigen::Index keep = 0;
      while (keep < s.size() && s(keep) > 1e-10 * s(0)) ++keep;
      U = svd.matrixU().leftCols(keep);
    }
    r.U.push_back(U);
    r.blk0.push_back(matkit::sym(U.transpose() * G0 * U));
    std::vector<Mat> red;
    red.reserve(Gj.size());
    for (const auto& M : Gj) {
      if (M.isZero(0.0) || U.cols() == 0) red.emplace_back();
      else red.push_back(matkit::sym(U.transpose() * M * U));
    }
    r.blk.push_back(std::move(red));
  }

  Eigen::Index lrows = static_cast<Eigen::Index>(p.nonneg.size());
  for (const auto& e : p.ineq) lrows += e.h0.size();
  r.lp0.resize(lrows);
  r.lp.resize(lrows, nw);
  Eigen::Index at = 0;
  for (std::size_t i : p.nonneg) {
    const auto ii = static_cast<Eigen::Index>(i);
    r.lp0(at) = r.y0(ii);
    r.lp.row(at) = r.V.row(ii);
    ++at;
  }
  for (const auto& e : p.ineq) {
    r.lp0.segment(at, e.h0.size()) = e.h0 + e.H * r.y0;
    r.lp.middleRows(at, e.h0.size()) = e.H * r.V;
    at += e.h0.size();
  }
  return r;
}

double reduced_margin(const Reduction& r, const Vec& w) {
  double t = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < r.blk0.size(); ++k) {
    if (r.blk0[k].rows() == 0) continue;
    Mat F = r.blk0[k];
    for (Eigen::Index j = 0; j < w.size(); ++j)
      if (r.blk[k][static_cast<std::size_t>(j)].size() > 0) F += w(j) * r.blk[k][static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Mat> es(F, Eigen::EigenvaluesOnly);
    t = std::min(t, es.eigenvalues()(0));
  }
  if (r.lp0.size() > 0) t = std::min(t, (r.lp0 + r.lp * w).minCoeff());
  return t;
}

// Conic data in the form: maximize b^T v  s.t.  C - sum_j v_j A_j in K,
// K = product of PSD cones and one nonnegative orthant.
struct ConeData {
  std::vector<Mat> C;
  std::vector<std::vector<Mat>> A;  // [block][var]; zero-size = zero
  Vec c_lp;
  Mat A_lp;
  Vec b;
};

struct IpmResult {
  Vec y;
  double pobj = 0.0;
  double dobj = 0.0;
  double pinf = 0.0;
  double dinf = 0.0;
  std::size_t iters = 0;
  bool converged = false;
  std::vector<Mat> X;
  Vec x;
};

double step_to_boundary(const Mat& X, const Mat& dX) {
  Eigen::LLT<Mat> llt(X);
  if (llt.info() != Eigen::Success) return 0.0;
  Mat W = llt.matrixL().solve(dX);
  W = llt.matrixL().solve(W.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(matkit::sym(W), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double step_to_boundary(const Vec& x, const Vec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

double inner(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

IpmResult run_ipm(const ConeData& d, const SolverOptions& opt) {
  const Eigen::Index nv = d.b.size();
  const std::size_t nb = d.C.size();
  const Eigen::Index nl = d.c_lp.size();
  double nu = static_cast<double>(nl);
  for (const auto& C : d.C) nu += static_cast<double>(C.rows());

  double normC2 = d.c_lp.squaredNorm();
  for (const auto& C : d.C) normC2 += C.squaredNorm();
  const double normC = std::sqrt(normC2);
  const double normb = d.b.norm();

  std::vector<Mat> X(nb), Z(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Eigen::Index n = d.C[k].rows();
    const double sn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, sn), eta = std::max({10.0, sn, d.C[k].norm()});
    for (Eigen::Index j = 0; j < nv; ++j) {
      const Mat& Aj = d.A[k][static_cast<std::size_t>(j)];
      if (Aj.size() == 0) continue;
      const double na = Aj.norm();
      xi = std::max(xi, sn * (1.0 + std::abs(d.b(j))) / (1.0 + na));
      eta = std::max(eta, na);
    }
    X[k] = xi * Mat::Identity(n, n);
    Z[k] = eta * Mat::Identity(n, n);
  }
  Vec x, z;
  {
    double xi = 10.0, eta = std::max(10.0, d.c_lp.size() ? d.c_lp.lpNorm<Eigen::Infinity>() : 0.0);
    for (Eigen::Index j = 0; j < nv && nl > 0; ++j) {
      const double na = d.A_lp.col(j).norm();
      if (na == 0.0) continue;
      xi = std::max(xi, (1.0 + std::abs(d.b(j))) / (1.0 + na));
      eta = std::max(eta, na);
    }
    x = Vec::Constant(nl, xi);
    z = Vec::Constant(nl, eta);
  }
  Vec y = Vec::Zero(nv);

  auto Aty = [&](const Vec& v, std::vector<Mat>& S, Vec& s) {
    S.resize(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      S[k] = Mat::Zero(d.C[k].rows(), d.C[k].cols());
      for (Eigen::Index j = 0; j < nv; ++j) {
        const Mat& Aj = d.A[k][static_cast<std::size_t>(j)];
        if (Aj.size() > 0 && v(j) != 0.0) S[k] += v(j) * Aj;
      }
    }
    s = nl > 0 ? Vec(d.A_lp * v) : Vec();
  };
  auto AX = [&](const std::vector<Mat>& Xs, const Vec& xs) {
    Vec out = nl > 0 ? Vec(d.A_lp.transpose() * xs) : Vec::Zero(nv);
    for (std::size_t k = 0; k < nb; ++k)
      for (Eigen::Index j = 0; j < nv; ++j) {
        const Mat& Aj = d.A[k][static_cast<std::size_t>(j)];
        if (Aj.size() > 0) out(j) += inner(Aj, Xs[k]);
      }
    return out;
  };

  IpmResult res;
  double prev_step = 1.0;
  int stalled = 0;
  std::vector<Mat> Zinv(nb), Rd(nb), S(nb);
  Vec rd, s;
  for (std::size_t it = 0; it <= opt.max_iter; ++it) {
    res.iters = it;
    Aty(y, S, s);
    for (std::size_t k = 0; k < nb; ++k) {
      Rd[k] = d.C[k] - Z[k] - S[k];
      Eigen::LLT<Mat> llt(Z[k]);
      Zinv[k] = llt.solve(Mat::Identity(Z[k].rows(), Z[k].cols()));
      Zinv[k] = matkit::sym(Zinv[k]);
    }
    rd = nl > 0 ? Vec(d.c_lp - z - s) : Vec();
    const Vec rp = d.b - AX(X, x);
    double pobj = nl > 0 ? d.c_lp.dot(x) : 0.0, gap = nl > 0 ? x.dot(z) : 0.0, rd2 = rd.squaredNorm();
    for (std::size_t k = 0; k < nb; ++k) {
      pobj += inner(d.C[k], X[k]);
      gap += inner(X[k], Z[k]);
      rd2 += Rd[k].squaredNorm();
    }
    const double dobj = d.b.dot(y);
    const double mu = gap / nu;
    res.y = y;
    res.X = X;
    res.x = x;
    res.pobj = pobj;
    res.dobj = dobj;
    res.pinf = rp.norm() / (1.0 + normb);
    res.dinf = std::sqrt(rd2) / (1.0 + normC);
    const double relgap = std::max(std::abs(pobj - dobj), gap) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (res.pinf <= opt.tol && res.dinf <= opt.tol && relgap <= opt.tol) {
      res.converged = true;
      break;
    }
    if (it == opt.max_iter || !std::isfinite(mu)) break;

    // Schur complement M_ij = <A_i, X A_j Z^-1>.
    Mat M = Mat::Zero(nv, nv);
    std::vector<Mat> T(static_cast<std::size_t>(nv));
    for (std::size_t k = 0; k < nb; ++k) {
      std::vector<Eigen::Index> nz;
      for (Eigen::Index j = 0; j < nv; ++j)
        if (d.A[k][static_cast<std::size_t>(j)].size() > 0) nz.push_back(j);
      for (Eigen::Index j : nz) T[static_cast<std::size_t>(j)] = X[k] * d.A[k][static_cast<std::size_t>(j)] * Zinv[k];
      for (std::size_t a = 0; a < nz.size(); ++a)
        for (std::size_t c = a; c < nz.size(); ++c) {
          const Eigen::Index i = nz[a], j = nz[c];
          const double v = d.A[k][static_cast<std::size_t>(i)].cwiseProduct(T[static_cast<std::size_t>(j)].transpose()).sum();
          M(i, j) += v;
          if (i != j) M(j, i) += v;
        }
    }
    if (nl > 0) M += d.A_lp.transpose() * (x.cwiseQuotient(z)).asDiagonal() * d.A_lp;
    M = matkit::sym(M);
    Eigen::LLT<Mat> chol(M);
    if (chol.info() != Eigen::Success) {
      const double reg = 1e-12 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
      chol.compute(M + reg * Mat::Identity(nv, nv));
      if (chol.info() != Eigen::Success) break;
    }

    struct Dir {
      Vec dy, dx, dz;
      std::vector<Mat> dX, dZ;
    };
    auto direction = [&](double smu, const Dir* pred) {
      Dir out;
      std::vector<Mat> R(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        R[k] = smu * Zinv[k] - X[k] - X[k] * Rd[k] * Zinv[k];
        if (pred) R[k] -= pred->dX[k] * pred->dZ[k] * Zinv[k];
      }
      Vec r;
      if (nl > 0) {
        r = (Vec::Constant(nl, smu) - x.cwiseProduct(rd)).cwiseQuotient(z) - x;
        if (pred) r -= pred->dx.cwiseProduct(pred->dz).cwiseQuotient(z);
      }
      const Vec rhs = rp - AX(R, r);
      out.dy = chol.solve(rhs);
      for (int pass = 0; pass < 3; ++pass) out.dy += chol.solve(rhs - M * out.dy);
      std::vector<Mat> Sd;
      Vec sd;
      Aty(out.dy, Sd, sd);
      out.dZ.resize(nb);
      out.dX.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        out.dZ[k] = Rd[k] - Sd[k];
        out.dX[k] = matkit::sym(R[k] + X[k] * Sd[k] * Zinv[k]);
      }
      if (nl > 0) {
        out.dz = rd - sd;
        out.dx = r + x.cwiseProduct(sd).cwiseQuotient(z);
      }
      return out;
    };
    auto steps = [&](const Dir& dir, double& ap, double& ad) {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t k = 0; k < nb; ++k) {
        ap = std::min(ap, step_to_boundary(X[k], dir.dX[k]));
        ad = std::min(ad, step_to_boundary(Z[k], dir.dZ[k]));
      }
      if (nl > 0) {
        ap = std::min(ap, step_to_boundary(x, dir.dx));
        ad = std::min(ad, step_to_boundary(z, dir.dz));
      }
    };

    const Dir pred = direction(0.0, nullptr);
    double ap, ad;
    steps(pred, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double gap_aff = nl > 0 ? (x + ap * pred.dx).dot(z + ad * pred.dz) : 0.0;
    for (std::size_t k = 0; k < nb; ++k) gap_aff += inner(X[k] + ap * pred.dX[k], Z[k] + ad * pred.dZ[k]);
    const double expon = std::max(1.0, 3.0 * std::min(ap, ad) * std::min(ap, ad));
    const double sigma = std::min(1.0, std::pow(std::max(0.0, gap_aff / gap), expon));

    const Dir dir = direction(sigma * mu, &pred);
    steps(dir, ap, ad);
    const double gamma = 0.9 + 0.09 * prev_step;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    prev_step = std::min(ap, ad);
    stalled = std::min(ap, ad) < 1e-8 ? stalled + 1 : 0;
    if (stalled >= 3) break;
    for (std::size_t k = 0; k < nb; ++k) {
      X[k] = matkit::sym(X[k] + ap * dir.dX[k]);
      Z[k] = matkit::sym(Z[k] + ad * dir.dZ[k]);
    }
    if (nl > 0) {
      x += ap * dir.dx;
      z += ad * dir.dz;
    }
    y += ad * dir.dy;
  }
  return res;
}

void add_block_data(const Reduction& r, ConeData& d, Eigen::Index extra_vars) {
  const Eigen::Index nw = r.nw();
  for (std::size_t k = 0; k < r.blk0.size(); ++k) {
    if (r.blk0[k].rows() == 0) continue;
    d.C.push_back(r.blk0[k]);
    std::vector<Mat> A(static_cast<std::size_t>(nw + extra_vars));
    for (Eigen::Index j = 0; j < nw; ++j) {
      const Mat& G = r.blk[k][static_cast<std::size_t>(j)];
      if (G.size() > 0) A[static_cast<std::size_t>(j)] = -G;
    }
    d.A.push_back(std::move(A));
  }
}

struct PhaseOne {
  SdpOutcome out;
  Reduction r;
  IpmResult res;
};

PhaseOne phase_one(const SdpProblem& p, const SolverOptions& opt) {
  PhaseOne po;
  po.r = reduce(p);
  const Reduction& r = po.r;
  SdpOutcome& out = po.out;
  if (!r.consistent) {
    out.status = Status::Infeasible;
    out.margin = -r.eq_residual;
    return po;
  }
  const Eigen::Index nw = r.nw();
  const Eigen::Index nv = nw + 1;  // (w, t)
  ConeData d;
  add_block_data(r, d, 1);
  for (std::size_t k = 0; k < d.C.size(); ++k) d.A[k].back() = Mat::Identity(d.C[k].rows(), d.C[k].cols());

  const Eigen::Index nm = r.lp0.size();
  const auto ny = static_cast<Eigen::Index>(p.var_count);
  const Eigen::Index nl = nm + 2 * ny + 1;
  d.c_lp.resize(nl);
  d.A_lp = Mat::Zero(nl, nv);
  d.c_lp.head(nm) = r.lp0;
  d.A_lp.block(0, 0, nm, nw) = -r.lp;
  d.A_lp.block(0, nw, nm, 1).setOnes();
  d.c_lp.segment(nm, ny) = Vec::Constant(ny, opt.box) - r.y0;
  d.A_lp.block(nm, 0, ny, nw) = r.V;
  d.c_lp.segment(nm + ny, ny) = Vec::Constant(ny, opt.box) + r.y0;
  d.A_lp.block(nm + ny, 0, ny, nw) = -r.V;
  d.c_lp(nl - 1) = 1.0;
  d.A_lp(nl - 1, nw) = 1.0;
  d.b = Vec::Zero(nv);
  d.b(nw) = 1.0;

  po.res = run_ipm(d, opt);
  const IpmResult& res = po.res;
  out.iterations = res.iters;
  const Vec w = res.y.head(nw);
  const double t_actual = reduced_margin(r, w);
  const Vec point = r.y0 + r.V * w;
  if (t_actual >= opt.feas_eps) {
    out.status = Status::Feasible;
    out.margin = t_actual;
    out.point = point;
  } else if (res.pinf <= 1e-6 && res.pobj <= -opt.feas_eps) {
    out.status = Status::Infeasible;
    out.margin = res.pobj;
  } else if (res.converged) {
    out.status = Status::Marginal;
    out.margin = res.dobj;
    out.point = point;
  } else {
    out.status = Status::MaxIterations;
    out.margin = res.dobj;
    out.point = point;
  }
  return po;
}

// Dual multipliers of a phase-I problem whose optimum is zero certify a face:
// <C, X> = 0 with X >= 0 forces F_k(y) X_k = 0 and zero rows wherever x_i > 0
// for every feasible y. Returns false when nothing new can be imposed.
bool restrict_to_face(const PhaseOne& po, SdpProblem& q, double rel_tol) {
  const Reduction& r = po.r;
  const IpmResult& res = po.res;
  if (res.X.empty() && res.x.size() == 0) return false;
  double scale = 0.0;
  for (const auto& X : res.X) scale = std::max(scale, X.norm());
  const Eigen::Index nm = r.lp0.size();
  if (nm > 0) scale = std::max(scale, res.x.head(nm).lpNorm<Eigen::Infinity>());
  if (scale == 0.0) return false;
  const double cut = rel_tol * scale;
  // The box rows must not carry the certificate.
  if (res.x.size() > nm + 1 && res.x.segment(nm, res.x.size() - nm - 1).lpNorm<Eigen::Infinity>() > cut) return false;

  bool changed = false;
  std::size_t xi = 0;
  for (std::size_t k = 0; k < r.blk0.size(); ++k) {
    if (r.blk0[k].rows() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Mat> es(res.X[xi++]);
    const Vec& ev = es.eigenvalues();
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (ev(i) > cut) cols.push_back(i);
    if (cols.empty()) continue;
    Mat Zr(ev.size(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) Zr.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(cols[i]);
    const Mat Z = r.U[k] * Zr;
    const PsdBlock& b = q.psd[k];
    const Eigen::Index d = b.F0.rows(), c = Z.cols();
    EqBlock e;
    e.label = "face:" + b.label + ":" + std::to_string(q.eq.size());
    e.g0 = (b.F0 * Z).reshaped();
    e.G = Mat::Zero(d * c, static_cast<Eigen::Index>(q.var_count));
    for (const auto& [j, F] : b.terms) e.G.col(static_cast<Eigen::Index>(j)) += (F * Z).reshaped();
    q.eq.push_back(std::move(e));
    changed = true;
  }

  std::vector<std::size_t> keep_nonneg;
  Eigen::Index at = 0;
  for (std::size_t i : q.nonneg) {
    if (res.x(at++) > cut) {
      EqBlock e;
      e.label = "face:y" + std::to_string(i);
      e.g0 = Vec::Zero(1);
      e.G = Mat::Zero(1, static_cast<Eigen::Index>(q.var_count));
      e.G(0, static_cast<Eigen::Index>(i)) = 1.0;
      q.eq.push_back(std::move(e));
      changed = true;
    } else {
      keep_nonneg.push_back(i);
    }
  }
  q.nonneg = std::move(keep_nonneg);
  for (auto& ib : q.ineq) {
    std::vector<Eigen::Index> keep, drop;
    for (Eigen::Index i = 0; i < ib.h0.size(); ++i) (res.x(at++) > cut ? drop : keep).push_back(i);
    if (drop.empty()) continue;
    EqBlock e;
    e.label = "face:" + ib.label + ":" + std::to_string(q.eq.size());
    e.g0 = ib.h0(drop);
    e.G = ib.H(drop, Eigen::all);
    q.eq.push_back(std::move(e));
    ib.h0 = Vec(ib.h0(keep));
    ib.H = Mat(ib.H(keep, Eigen::all));
    changed = true;
  }
  std::erase_if(q.ineq, [](const IneqBlock& ib) { return ib.h0.size() == 0; });
  return changed;
}

}  // namespace

SdpOutcome InteriorPointBackend::feasibility(const SdpProblem& p, const SolverOptions& opt) const {
  p.check();
  PhaseOne po = phase_one(p, opt);
  SdpProblem q = p;
  // A phase-I optimum at zero means the feasible set (if any) lies in a proper
  // face. Restrict to the face certified by the dual multipliers and retry; a
  // point found there satisfies the original constraints.
  for (int round = 0; round < 4; ++round) {
    const Status st = po.out.status;
    if (st == Status::Feasible || st == Status::Infeasible) break;
    if (std::abs(po.out.margin) > opt.face_band) break;
    SdpProblem next = q;
    if (!restrict_to_face(po, next, opt.face_rel_tol)) break;
    PhaseOne trial = phase_one(next, opt);
    trial.out.iterations += po.out.iterations;
    if (trial.out.status == Status::Feasible) {
      const Vec& y = *trial.out.point;
      const double tol = 1e-9 * (1.0 + y.lpNorm<Eigen::Infinity>());
      if (constraint_margin(p, y) < -tol || max_eq_residual(p, y) > tol) break;
    }
    q = std::move(next);
    po = std::move(trial);
  }
  return po.out;
}

MaxOutcome InteriorPointBackend::maximize(const SdpProblem& p, const SolverOptions& opt) const {
  p.check();
  MaxOutcome out;
  const Reduction r = reduce(p);
  if (!r.consistent) {
    out.status = MaxStatus::Infeasible;
    return out;
  }
  const auto ny = static_cast<Eigen::Index>(p.var_count);
  const Vec obj = p.objective.size() ? p.objective : Vec::Zero(ny);
  ConeData d;
  add_block_data(r, d, 0);
  d.c_lp = r.lp0;
  d.A_lp = -r.lp;
  d.b = r.V.transpose() * obj;
  const double offset = obj.dot(r.y0);
  const IpmResult res = run_ipm(d, opt);
  out.iterations = res.iters;
  out.point = r.y0 + r.V * res.y;
  out.value = res.dobj + offset;
  out.upper_bound = res.pobj + offset;
  if (res.converged) {
    out.status = MaxStatus::Optimal;
  } else if (res.dobj > 1e10 || res.y.lpNorm<Eigen::Infinity>() > 1e10) {
    out.status = MaxStatus::Unbounded;
  } else if (res.pobj < -1e10) {
    out.status = MaxStatus::Infeasible;
  } else if (res.pinf <= 1e-4 && res.dinf <= 1e-4) {
    out.status = MaxStatus::Inaccurate;
  } else {
    out.status = MaxStatus::MaxIterations;
  }
  return out;
}

const Backend& default_backend() {
  static const InteriorPointBackend backend;
  return backend;
}

SdpOutcome solve_feasibility(const SdpProblem& p, const SolverOptions& opt) {
  return default_backend().feasibility(p, opt);
}

MaxOutcome solve_max(const SdpProblem& p, const SolverOptions& opt) { return default_backend().maximize(p, opt); }

}  // namespace lyapcert::sdp
