#include "lyapcert/simulate.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace lyapcert::simulate {

namespace {

Vec soft(const Vec& v, double k) { return v.cwiseSign().cwiseProduct((v.cwiseAbs().array() - k).max(0.0).matrix()); }

Eigen::Index dim_of(const Vec& x, std::size_t blocks) {
  if (blocks == 0 || x.size() % static_cast<Eigen::Index>(blocks) != 0)
    throw InputError("state length is not a multiple of the block count");
  return x.size() / static_cast<Eigen::Index>(blocks);
}

void require_causal(const MethodRepresentation& rep) {
  for (Eigen::Index i = 0; i < rep.D.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < rep.D.cols(); ++j)
      if (rep.D(i, j) != 0.0) throw InputError("run: D must be lower triangular (normalize the representation)");
    if (rep.D(i, i) > 0.0) throw InputError("run: positive diagonal entry in D");
  }
}

}  // namespace

ComponentOracle quadratic(const Vec& h, const Vec& c, const Vec& b, std::optional<FunctionClass> cls) {
  if (h.size() != c.size() || h.size() != b.size() || h.size() == 0) throw InputError("quadratic: size mismatch");
  if (h.minCoeff() < 0.0) throw InputError("quadratic: curvature must be nonnegative");
  const FunctionClass natural{h.minCoeff(), h.maxCoeff() > h.minCoeff() ? h.maxCoeff() : h.minCoeff() + 1.0};
  FunctionClass k = cls.value_or(natural);
  k.check();
  if (k.sigma > h.minCoeff() + 1e-12 || k.beta < h.maxCoeff() - 1e-12) throw InputError("quadratic: class does not contain the curvature range");
  ComponentOracle o;
  o.cls = k;
  o.kind = "quadratic";
  o.dim = static_cast<std::size_t>(h.size());
  o.value = [h, c, b](const Vec& x) { return 0.5 * (x - c).cwiseProduct(h).dot(x - c) + b.dot(x); };
  o.grad = [h, c, b](const Vec& x) { return Vec(h.cwiseProduct(x - c) + b); };
  o.prox = [h, c, b](const Vec& v, double g) {
    return Vec((v + g * (h.cwiseProduct(c) - b)).cwiseQuotient((Vec::Ones(h.size()) + g * h)));
  };
  return o;
}

ComponentOracle abs_quadratic(double a, const Vec& c, double sigma) {
  if (!(a >= 0.0) || !(sigma >= 0.0)) throw InputError("abs_quadratic: a and sigma must be nonnegative");
  if (c.size() == 0) throw InputError("abs_quadratic: empty center");
  ComponentOracle o;
  o.cls = {sigma, kInf};
  o.kind = "abs_quadratic";
  o.dim = static_cast<std::size_t>(c.size());
  o.value = [a, c, sigma](const Vec& x) { return a * (x - c).lpNorm<1>() + 0.5 * sigma * x.squaredNorm(); };
  o.prox = [a, c, sigma](const Vec& v, double g) {
    const double s = 1.0 + g * sigma;
    return Vec(c + soft((v - c - g * sigma * c) / s, g * a / s));
  };
  return o;
}

ComponentOracle box_indicator(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size() || lo.size() == 0 || (hi - lo).minCoeff() < 0.0) throw InputError("box_indicator: need lo <= hi");
  ComponentOracle o;
  o.cls = {0.0, kInf};
  o.kind = "box_indicator";
  o.dim = static_cast<std::size_t>(lo.size());
  o.value = [lo, hi](const Vec& x) {
    const double tol = 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>());
    return ((x - lo).minCoeff() >= -tol && (hi - x).minCoeff() >= -tol) ? 0.0 : kInf;
  };
  o.prox = [lo, hi](const Vec& v, double) { return Vec(v.cwiseMax(lo).cwiseMin(hi)); };
  return o;
}

ComponentOracle random_instance(const FunctionClass& cls, std::size_t d, std::mt19937_64& rng) {
  cls.check();
  const auto dd = static_cast<Eigen::Index>(d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](double lo, double hi) {
    Vec v(dd);
    for (Eigen::Index i = 0; i < dd; ++i) v(i) = lo + (hi - lo) * unit(rng);
    return v;
  };
  auto normal = [&] {
    Vec v(dd);
    for (Eigen::Index i = 0; i < dd; ++i) v(i) = gauss(rng);
    return v;
  };
  if (cls.smooth()) {
    const Vec h = draw(cls.sigma + 0.05 * (cls.beta - cls.sigma), cls.beta);
    return quadratic(h, normal(), Vec::Zero(dd), cls);
  }
  const int kinds = cls.sigma == 0.0 ? 3 : 2;
  const int kind = std::uniform_int_distribution<int>(0, kinds - 1)(rng);
  if (kind == 0) {
    const Vec h = draw(cls.sigma + 0.2, cls.sigma + 2.0);
    return quadratic(h, normal(), Vec::Zero(dd), cls);
  }
  if (kind == 1) {
    const double a = 0.1 + 0.9 * unit(rng);
    const Vec c = normal();
    return abs_quadratic(a, c, cls.sigma + 0.2 + 0.8 * unit(rng));
  }
  const Vec lo = draw(-2.0, -0.1), hi = draw(0.1, 2.0);
  return box_indicator(lo, hi);
}

std::vector<ComponentOracle> random_instances(const MethodRepresentation& rep, std::size_t d, std::mt19937_64& rng) {
  std::vector<ComponentOracle> out;
  out.reserve(rep.m);
  for (const auto& c : rep.classes) out.push_back(random_instance(c, d, rng));
  return out;
}

TrajectoryPoint evaluate(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance, const Vec& x) {
  if (instance.size() != rep.m) throw InputError("evaluate: instance has the wrong number of components");
  const Eigen::Index d = dim_of(x, rep.n);
  const auto m = static_cast<Eigen::Index>(rep.m);
  const auto n = static_cast<Eigen::Index>(rep.n);
  TrajectoryPoint p;
  p.x = x;
  p.u = Vec::Zero(m * d);
  p.y = Vec::Zero(m * d);
  p.F = Vec::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Vec v = Vec::Zero(d);
    for (Eigen::Index j = 0; j < n; ++j)
      if (rep.C(i, j) != 0.0) v += rep.C(i, j) * x.segment(j * d, d);
    for (Eigen::Index j = 0; j < i; ++j)
      if (rep.D(i, j) != 0.0) v += rep.D(i, j) * p.u.segment(j * d, d);
    const ComponentOracle& f = instance[static_cast<std::size_t>(i)];
    const double dii = rep.D(i, i);
    if (dii < 0.0) {
      const Vec y = f.prox(v, -dii);
      p.y.segment(i * d, d) = y;
      p.u.segment(i * d, d) = (v - y) / (-dii);
    } else {
      if (!f.grad) throw InputError("evaluate: component " + std::to_string(i + 1) + " needs a gradient");
      p.y.segment(i * d, d) = v;
      p.u.segment(i * d, d) = f.grad(v);
    }
    p.F(i) = f.value(p.y.segment(i * d, d));
  }
  return p;
}

namespace {

Vec step(const MethodRepresentation& rep, const TrajectoryPoint& p) {
  const Eigen::Index d = dim_of(p.x, rep.n);
  const auto n = static_cast<Eigen::Index>(rep.n);
  const auto m = static_cast<Eigen::Index>(rep.m);
  Vec next = Vec::Zero(n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      if (rep.A(i, j) != 0.0) next.segment(i * d, d) += rep.A(i, j) * p.x.segment(j * d, d);
    for (Eigen::Index j = 0; j < m; ++j)
      if (rep.B(i, j) != 0.0) next.segment(i * d, d) += rep.B(i, j) * p.u.segment(j * d, d);
  }
  return next;
}

}  // namespace

RunResult run(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance, const Vec& x0,
              std::size_t K) {
  rep.check();
  require_causal(rep);
  if (instance.size() != rep.m) throw InputError("run: instance has the wrong number of components");
  for (std::size_t i = 0; i < rep.m; ++i)
    if (instance[i].cls.sigma < rep.classes[i].sigma || instance[i].cls.beta > rep.classes[i].beta)
      throw InputError("run: component " + std::to_string(i + 1) + " lies outside the method's class");
  RunResult rr;
  rr.points.reserve(K + 1);
  const double limit = 1e12 * (1.0 + x0.norm());
  Vec x = x0;
  for (std::size_t k = 0; k <= K; ++k) {
    if (!x.allFinite() || x.norm() > limit) {
      rr.diverged = true;
      rr.diverged_at = k;
      rr.error = "state diverged at iteration " + std::to_string(k);
      return rr;
    }
    try {
      rr.points.push_back(evaluate(rep, instance, x));
    } catch (const std::exception& e) {
      rr.error = e.what();
      rr.diverged_at = k;
      return rr;
    }
    if (k < K) x = step(rep, rr.points.back());
  }
  return rr;
}

FixedPointResult find_fixed_point(const MethodRepresentation& rep, const std::vector<ComponentOracle>& instance,
                                  const Vec& x0, std::size_t cap) {
  rep.check();
  require_causal(rep);
  FixedPointResult fr;
  if (instance.empty()) throw InputError("find_fixed_point: empty instance");
  const auto d = static_cast<Eigen::Index>(instance.front().dim);
  Vec x = x0.size() ? x0 : Vec::Zero(static_cast<Eigen::Index>(rep.n) * d);
  for (std::size_t k = 0; k < cap; ++k) {
    const TrajectoryPoint p = evaluate(rep, instance, x);
    const Vec next = step(rep, p);
    fr.iterations = k + 1;
    if (!next.allFinite()) {
      fr.error = "non-finite state at iteration " + std::to_string(k);
      return fr;
    }
    fr.step_residual = (next - x).norm();
    const bool done = fr.step_residual <= 1e-12 * (1.0 + x.norm());
    x = next;
    if (done) break;
  }
  // Polish: keep iterating while the step still shrinks so the fixed point is
  // accurate to rounding rather than to the stopping tolerance.
  if (fr.step_residual <= 1e-12 * (1.0 + x.norm())) {
    double best = fr.step_residual;
    int flat = 0;
    for (std::size_t k = 0; k < 100'000 && flat < 50 && best > 0.0; ++k) {
      const Vec next = step(rep, evaluate(rep, instance, x));
      const double r = (next - x).norm();
      x = next;
      if (r < 0.9 * best) {
        best = r;
        flat = 0;
      } else {
        ++flat;
      }
    }
    fr.step_residual = std::min(fr.step_residual, best);
  }
  fr.point = evaluate(rep, instance, x);
  const auto m = static_cast<Eigen::Index>(rep.m);
  Vec usum = Vec::Zero(d);
  const Vec ylast = fr.point.y.segment((m - 1) * d, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    usum += fr.point.u.segment(i * d, d);
    fr.consensus_residual = std::max(fr.consensus_residual, (fr.point.y.segment(i * d, d) - ylast).norm());
  }
  fr.sum_residual = usum.norm();
  if (fr.step_residual > 1e-12 * (1.0 + x.norm())) {
    fr.error = "no convergence within " + std::to_string(cap) + " iterations (step " + std::to_string(fr.step_residual) + ")";
    return fr;
  }
  if (fr.consensus_residual > 1e-8 || fr.sum_residual > 1e-8) {
    fr.error = "limit is not a solution (consensus " + std::to_string(fr.consensus_residual) + ", sum " +
               std::to_string(fr.sum_residual) + ")";
    return fr;
  }
  fr.ok = true;
  return fr;
}

double lifted_form(const Mat& W, const TrajectoryPoint& p, const TrajectoryPoint& star, std::size_t n, std::size_t m) {
  const auto nn = static_cast<Eigen::Index>(n), mm = static_cast<Eigen::Index>(m);
  const Eigen::Index d = dim_of(p.x, n);
  if (W.rows() != nn + 2 * mm || W.cols() != nn + 2 * mm) throw InputError("lifted_form: W has the wrong size");
  Mat Z(nn + 2 * mm, d);
  for (Eigen::Index i = 0; i < nn; ++i) Z.row(i) = (p.x.segment(i * d, d) - star.x.segment(i * d, d)).transpose();
  for (Eigen::Index i = 0; i < mm; ++i) {
    Z.row(nn + i) = p.u.segment(i * d, d).transpose();
    Z.row(nn + mm + i) = star.u.segment(i * d, d).transpose();
  }
  return (Z.transpose() * W * Z).trace();
}

AuditReport audit_certificate(const MethodRepresentation& rep, const std::vector<TrajectoryPoint>& trajectory,
                              const TrajectoryPoint& fixed_point, const certify::LyapunovCertificate& cert,
                              const certify::LowerBoundSpec& lb, double rho, bool gap_identity) {
  AuditReport ar;
  const std::size_t n = rep.n, m = rep.m;
  const auto mm = static_cast<Eigen::Index>(m);
  const Eigen::Index d = trajectory.empty() ? 0 : dim_of(trajectory.front().x, n);
  auto note = [&](double excess, const std::string& what, std::size_t k) {
    if (excess > 0.0) {
      ar.passed = false;
      if (ar.violations.size() < 20) ar.violations.push_back(what + " at k=" + std::to_string(k));
    }
  };
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const TrajectoryPoint& p = trajectory[k];
    const Vec dF = p.F - fixed_point.F;
    const double V = lifted_form(cert.Q, p, fixed_point, n, m) + cert.q.dot(dF);
    const double R = lifted_form(cert.S, p, fixed_point, n, m) + cert.s.dot(dF);
    const double Pf = lifted_form(lb.P, p, fixed_point, n, m) + lb.p.dot(dF);
    const double Tf = lifted_form(lb.T, p, fixed_point, n, m) + lb.t.dot(dF);
    ar.V.push_back(V);
    ar.R.push_back(R);
    const double tv = 1e-7 * (1.0 + std::abs(V)), tr = 1e-7 * (1.0 + std::abs(R));
    ar.max_lower_bound_violation = std::max({ar.max_lower_bound_violation, (Pf - V) / (1.0 + std::abs(V)),
                                             -Pf / (1.0 + std::abs(V)), (Tf - R) / (1.0 + std::abs(R)),
                                             -Tf / (1.0 + std::abs(R))});
    note(Pf - V - tv, "V below its lower bound", k);
    note(-Pf - tv, "negative V lower bound", k);
    note(Tf - R - tr, "R below its lower bound", k);
    note(-Tf - tr, "negative R lower bound", k);
    if (gap_identity) {
      double gap = 0.0;
      for (Eigen::Index i = 0; i < mm; ++i)
        gap += p.F(i) - fixed_point.F(i) -
               fixed_point.u.segment(i * d, d).dot(p.y.segment(i * d, d) - fixed_point.y.segment(i * d, d));
      const double err = std::abs(gap - Tf) / (1.0 + std::abs(gap));
      ar.max_gap_identity_error = std::max(ar.max_gap_identity_error, err);
      note(err - 1e-7, "duality-gap identity mismatch", k);
    }
  }
  for (std::size_t k = 0; k + 1 < ar.V.size(); ++k) {
    const double excess = ar.V[k + 1] - rho * ar.V[k] + ar.R[k];
    ar.max_lyapunov_violation = std::max(ar.max_lyapunov_violation, excess / (1.0 + std::abs(ar.V[k])));
    note(excess - 1e-7 * (1.0 + std::abs(ar.V[k])), "Lyapunov decrease violated", k);
  }
  return ar;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryPoint>& trajectory, const AuditReport* audit) {
  if (trajectory.empty()) {
    os << "k,V,R\n";
    return;
  }
  const TrajectoryPoint& f = trajectory.front();
  os << 'k';
  for (Eigen::Index i = 0; i < f.x.size(); ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < f.y.size(); ++i) os << ",y" << i + 1;
  for (Eigen::Index i = 0; i < f.u.size(); ++i) os << ",u" << i + 1;
  for (Eigen::Index i = 0; i < f.F.size(); ++i) os << ",F" << i + 1;
  os << ",V,R\n";
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const TrajectoryPoint& p = trajectory[k];
    os << k;
    for (const Vec* v : {&p.x, &p.y, &p.u, &p.F})
      for (Eigen::Index i = 0; i < v->size(); ++i) os << ',' << (*v)(i);
    if (audit && k < audit->V.size()) os << ',' << audit->V[k] << ',' << audit->R[k] << '\n';
    else os << ",,\n";
  }
  os.precision(old);
}

}  // namespace lyapcert::simulate
