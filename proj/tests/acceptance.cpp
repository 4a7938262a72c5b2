// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include "lyapcert/analyze.hpp"
#include "lyapcert/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace lyapcert;

namespace {

const certify::Preset kDistance{certify::PresetKind::distance_to_solution, 1};
const certify::Preset kValue{certify::PresetKind::function_value_suboptimality, 1};
const certify::Preset kGap{certify::PresetKind::duality_gap, 1};

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    pass = false;
    detail << " [" << why << "]";
  }
};

/// A certificate collected for the duality cross-check.
struct Collected {
  std::string name;
  MethodRepresentation rep;
  certify::LowerBoundSpec lb;
  certify::LyapunovCertificate cert;
};

std::vector<Collected> g_certificates;

MethodRepresentation build(Family f, std::vector<double> params, std::vector<FunctionClass> classes) {
  MethodRepresentation rep = zoo_build(f, params, classes);
  return normalized(rep, validate(rep));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Bisects and stores the certificate; returns the rate or NaN.
double certified_rate(const std::string& name, const MethodRepresentation& rep, const certify::Preset& preset) {
  auto lb = certify::preset(preset, rep);
  auto r = analyze::bisect_rho(rep, lb);
  if (!r.rho || !r.certificate) return std::nan("");
  g_certificates.push_back({name, rep, lb, *r.certificate});
  return *r.rho;
}

/// Region verdict at (p1, p2); on a mismatch the four neighbours one cell
/// away decide whether the published boundary merely shifted by a cell.
bool region_verdict(Family f, const std::vector<FunctionClass>& classes, const certify::Preset& preset, double p1,
                    double p2, bool expect, double cell, const std::string& name, std::string& note) {
  auto check = [&](double a, double b) {
    auto rep = build(f, analyze::sweep_params(f, a, b), classes);
    auto lb = certify::preset(preset, rep);
    auto pc = analyze::check_rate(rep, lb, 1.0);
    if (pc.feasible() && a == p1 && b == p2) g_certificates.push_back({name, rep, lb, *pc.certificate});
    return pc.feasible();
  };
  if (check(p1, p2) == expect) return true;
  for (auto [a, b] : {std::pair{p1 - cell, p2}, {p1 + cell, p2}, {p1, p2 - cell}, {p1, p2 + cell}}) {
    if (check(a, b) == expect) {
      note += " shifted one cell at (" + analyze::format_number(p1) + ", " + analyze::format_number(p2) + ")";
      return true;
    }
  }
  return false;
}

/// Worst one-step squared contraction of the first output over random 1-D
/// quadratic instances. All maps are affine, so one step from any start
/// gives the exact factor.
double empirical_contraction(const MethodRepresentation& rep, const std::vector<std::pair<double, double>>& curvature,
                             std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss;
  double worst = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    std::vector<simulate::ComponentOracle> inst;
    for (std::size_t i = 0; i < rep.m; ++i) {
      auto [lo, hi] = curvature[i];
      // Endpoints carry the extreme factors, so sample them with some weight.
      const double r = unit(rng);
      const double h = r < 0.15 ? lo : r < 0.3 ? hi : lo + (hi - lo) * unit(rng);
      inst.push_back(simulate::quadratic(Vec::Constant(1, h), Vec::Constant(1, gauss(rng)), Vec::Zero(1),
                                         rep.classes[i]));
    }
    auto fp = simulate::find_fixed_point(rep, inst);
    if (!fp.ok) continue;
    Vec x0 = fp.point.x;
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += gauss(rng);
    auto run = simulate::run(rep, inst, x0, 1);
    const double d0 = std::pow(run.points[0].y(0) - fp.point.y(0), 2);
    const double d1 = std::pow(run.points[1].y(0) - fp.point.y(0), 2);
    if (d0 > 1e-12) worst = std::max(worst, d1 / d0);
  }
  return worst;
}

Verdict criterion1() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  auto rep = build(Family::heavy_ball, {0.1, 0.0}, {{1, 10}});
  const double rho = certified_rate("gradient", rep, kDistance);
  const double oracle = std::pow(std::max(std::abs(1 - 0.1 * 1), std::abs(1 - 0.1 * 10)), 2);
  const double t = seconds_since(t0);
  v.detail << "rho=" << analyze::format_number(rho) << " oracle=" << oracle << " time=" << analyze::format_number(t)
           << "s";
  if (!(rho >= 0.808 && rho <= 0.812)) v.fail("rate outside [0.808, 0.812]");
  if (t >= 10) v.fail("slower than 10 s");
  return v;
}

Verdict criterion2() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<FunctionClass> cls = {{0.05, 50}, {0.05, 50}};
  struct Point {
    double tau, theta, expect;
  };
  for (auto p : {Point{0.99, 1.0, 0.9266}, Point{1.6, 0.22, 0.8812}, Point{1.5, 0.35, 0.8891}}) {
    auto rep = build(Family::chambolle_pock, {p.tau, p.tau, p.theta}, cls);
    const double rho = certified_rate("chambolle_pock", rep, kDistance);
    v.detail << "(" << p.tau << "," << p.theta << ")->" << analyze::format_number(rho) << " ";
    if (!(std::abs(rho - p.expect) <= 0.003)) v.fail("rate off at tau=" + analyze::format_number(p.tau));
  }
  const double t = seconds_since(t0);
  v.detail << "time=" << analyze::format_number(t) << "s";
  if (t >= 60) v.fail("slower than 1 min");
  return v;
}

Verdict criterion3() {
  Verdict v;
  const std::vector<FunctionClass> cls = {{0, kInf}, {0, kInf}};
  struct Point {
    double tau, theta;
    bool feasible;
  };
  std::string note;
  for (auto p : {Point{1.15, 1.0, true}, Point{1.5, 0.35, true}, Point{0.5, 7.5, true}, Point{1.25, 1.0, false},
                 Point{0.5, 8.0, false}}) {
    const bool ok = region_verdict(Family::chambolle_pock, cls, kGap, p.tau, p.theta, p.feasible, 0.01,
                                   "chambolle_pock region", note);
    v.detail << "(" << p.tau << "," << p.theta << ")=" << (p.feasible ? "feasible" : "infeasible")
             << (ok ? "" : "?") << " ";
    if (!ok) v.fail("wrong verdict at tau=" + analyze::format_number(p.tau));
  }
  v.detail << note;
  return v;
}

Verdict criterion4() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  const std::size_t jobs = analyze::resolve_jobs(0);
  const double tau_cell = 0.01;
  analyze::RegionSpec coarse;
  coarse.family = Family::chambolle_pock;
  coarse.classes = {{0, kInf}, {0, kInf}};
  coarse.restricted = true;
  coarse.p1 = {0.5, 1.75, tau_cell};
  coarse.p2 = {-0.5, 8.0, 0.1};
  analyze::RegionSpec band = coarse;
  band.p2 = {0.9, 1.1, 0.01};
  std::size_t cells = 0, feasible = 0, extra = 0, missing = 0;
  for (const auto& spec : {coarse, band}) {
    for (const auto& c : analyze::sweep_region(spec, jobs)) {
      ++cells;
      const double theta_cell = spec.p2.step;
      const bool near_theta = std::abs(c.p2 - 1.0) <= theta_cell + 1e-9;
      const bool exact_theta = std::abs(c.p2 - 1.0) <= 1e-9;
      const bool inside_tau = c.p1 * c.p1 < 1.0;
      const bool near_tau = c.p1 <= 1.0 + tau_cell + 1e-9;
      if (c.feasible) {
        ++feasible;
        if (!(near_theta && near_tau)) ++extra;
      } else if (exact_theta && inside_tau && c.p1 < 1.0 - tau_cell - 1e-9) {
        ++missing;
      }
    }
  }
  v.detail << "cells=" << cells << " feasible=" << feasible << " outside=" << extra << " missing=" << missing
           << " time=" << analyze::format_number(seconds_since(t0)) << "s";
  if (extra) v.fail("feasible cells beyond one cell of the classical region");
  if (missing) v.fail("classical cells not recovered");
  return v;
}

Verdict criterion5() {
  Verdict v;
  for (double g : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    auto rep = build(Family::douglas_rachford, {g, 1.0}, {{1, 2}, {0, kInf}});
    const double rho = certified_rate("douglas_rachford", rep, kDistance);
    const double emp = empirical_contraction(rep, {{1, 2}, {0, 1e3}}, 200, 100 + static_cast<std::uint64_t>(g * 4));
    v.detail << "g=" << g << ":" << analyze::format_number(rho) << ">=" << analyze::format_number(emp) << " ";
    if (!(rho < 1.0)) v.fail("no rate below 1 at gamma=" + analyze::format_number(g));
    if (!(emp <= rho + 1e-6)) v.fail("empirical contraction above the rate at gamma=" + analyze::format_number(g));
  }
  return v;
}

Verdict criterion6() {
  Verdict v;
  for (double b1 : {5.0, 10.0, 20.0}) {
    auto rep = build(Family::davis_yin, {0.5, 1.0}, {{0, b1}, {1, 2}, {0, kInf}});
    const double rho = certified_rate("davis_yin", rep, kDistance);
    const double emp =
        empirical_contraction(rep, {{0, b1}, {1, 2}, {0, 1e3}}, 200, 200 + static_cast<std::uint64_t>(b1));
    v.detail << "b1=" << b1 << ":" << analyze::format_number(rho) << ">=" << analyze::format_number(emp) << " ";
    if (!(rho < 1.0)) v.fail("no rate below 1 at beta1=" + analyze::format_number(b1));
    if (!(emp <= rho + 1e-6)) v.fail("empirical contraction above the rate at beta1=" + analyze::format_number(b1));
  }
  return v;
}

Verdict criterion7() {
  Verdict v;
  double worst = -kInf;
  std::size_t solved = 0, inaccurate = 0;
  for (const auto& c : g_certificates) {
    for (int which = 1; which <= 3; ++which) {
      auto o = certify::pep_objective(c.lb, c.cert, which);
      // The sign of the optimum is scale free; normalize the objective.
      const double scale = std::max({o.Q_o.cwiseAbs().maxCoeff(), o.Q_p.cwiseAbs().maxCoeff(),
                                     o.q_o.size() ? o.q_o.cwiseAbs().maxCoeff() : 0.0,
                                     o.q_p.size() ? o.q_p.cwiseAbs().maxCoeff() : 0.0});
      if (scale > 0.0) {
        o.Q_o /= scale;
        o.Q_p /= scale;
        o.q_o /= scale;
        o.q_p /= scale;
      }
      const auto out = sdp::solve_max(certify::assemble_primal_pep(c.rep, o.Q_o, o.q_o, o.Q_p, o.q_p, 1e4));
      ++solved;
      inaccurate += out.status == sdp::MaxStatus::Inaccurate;
      if (out.status != sdp::MaxStatus::Optimal && out.status != sdp::MaxStatus::Inaccurate) {
        v.fail(c.name + " condition " + std::to_string(which) + ": " + std::string(sdp::max_status_name(out.status)));
        continue;
      }
      const double value = std::max(out.value, out.upper_bound);
      worst = std::max(worst, value);
      if (value > 1e-2) v.fail(c.name + " condition " + std::to_string(which));
    }
  }
  v.detail << "certificates=" << g_certificates.size() << " problems=" << solved << " inaccurate=" << inaccurate
           << " worst_scaled=" << analyze::format_number(worst);
  if (g_certificates.empty()) v.fail("no certificates collected");
  return v;
}

Verdict criterion8() {
  Verdict v;
  struct Case {
    std::string name;
    MethodRepresentation rep;
    certify::Preset preset;
    std::optional<double> rho;
  };
  const std::vector<Case> cases = {
      {"gradient", build(Family::heavy_ball, {0.1, 0.0}, {{1, 10}}), kDistance, {}},
      {"heavy_ball", build(Family::heavy_ball, {0.1, 0.2}, {{1, 10}}), kDistance, {}},
      {"heavy_ball_value", build(Family::heavy_ball, {1.0, 0.2}, {{0, 1}}), kValue, 1.0},
      {"douglas_rachford", build(Family::douglas_rachford, {1.0, 1.0}, {{1, 2}, {0, kInf}}), kDistance, {}},
      {"prox_heavy_ball", build(Family::prox_heavy_ball, {0.5, 0.2, 0.0}, {{0, 1}, {0, kInf}}), kGap, 1.0},
      {"davis_yin", build(Family::davis_yin, {0.5, 1.0}, {{0, 10}, {1, 2}, {0, kInf}}), kDistance, {}},
      {"chambolle_pock", build(Family::chambolle_pock, {0.99, 0.99, 1.0}, {{0.05, 50}, {0.05, 50}}), kDistance, {}},
      {"chambolle_pock_gap", build(Family::chambolle_pock, {1.5, 1.5, 0.35}, {{0, kInf}, {0, kInf}}), kGap, 1.0},
  };
  for (const auto& cs : cases) {
    const auto lb = certify::preset(cs.preset, cs.rep);
    std::optional<certify::LyapunovCertificate> cert;
    double rho = 1.0;
    if (cs.rho) {
      auto pc = analyze::check_rate(cs.rep, lb, *cs.rho);
      cert = pc.certificate;
      rho = *cs.rho;
    } else {
      auto r = analyze::bisect_rho(cs.rep, lb);
      cert = r.certificate;
      rho = r.rho.value_or(1.0);
    }
    if (!cert) {
      v.fail(cs.name + ": no certificate");
      continue;
    }
    const bool gap = cs.preset.kind == certify::PresetKind::duality_gap;
    std::size_t passed = 0, no_fp = 0;
    double worst = -kInf;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::mt19937_64 rng(seed);
      auto inst = simulate::random_instances(cs.rep, 2, rng);
      auto fp = simulate::find_fixed_point(cs.rep, inst);
      if (!fp.ok) {
        ++no_fp;
        continue;
      }
      std::normal_distribution<double> g;
      Vec x0 = fp.point.x;
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) += g(rng);
      auto run = simulate::run(cs.rep, inst, x0, 200);
      if (run.diverged || !run.error.empty()) continue;
      auto au = simulate::audit_certificate(cs.rep, run.points, fp.point, *cert, lb, rho, gap);
      worst = std::max(worst, au.max_lyapunov_violation);
      passed += au.passed;
    }
    v.detail << cs.name << "@" << analyze::format_number(rho) << "=" << passed << "/100 ";
    if (passed != 100) v.fail(cs.name + ": " + std::to_string(100 - passed) + " failed (" + std::to_string(no_fp) +
                              " without fixed point)");
  }
  return v;
}

Verdict criterion9() {
  Verdict v;
  auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::pair<Family, std::vector<double>>> zoo = {
      {Family::douglas_rachford, {1.0, 1.0}},
      {Family::heavy_ball, {0.1, 0.3}},
      {Family::prox_heavy_ball, {0.5, 0.2, 0.1}},
      {Family::davis_yin, {0.5, 1.0}},
      {Family::chambolle_pock, {0.5, 0.5, 1.0}},
  };
  const std::vector<std::vector<FunctionClass>> classes = {
      {{1, 2}, {0, kInf}}, {{1, 10}}, {{0, 1}, {0, kInf}}, {{0, 10}, {1, 2}, {0, kInf}}, {{0, kInf}, {0, kInf}}};
  for (std::size_t i = 0; i < zoo.size(); ++i) {
    auto rep = zoo_build(zoo[i].first, zoo[i].second, classes[i]);
    auto a = validate(rep), b = validate(rep);
    const bool same = a.all_ok() == b.all_ok() && a.permutation == b.permutation;
    v.detail << family_name(zoo[i].first) << "=" << (a.all_ok() ? "ok" : "bad") << " ";
    if (!a.all_ok() || !same) v.fail(std::string(family_name(zoo[i].first)));
  }
  MethodRepresentation id;
  id.n = id.m = 1;
  id.A = Mat::Identity(1, 1);
  id.B = Mat::Zero(1, 1);
  id.C = Mat::Identity(1, 1);
  id.D = Mat::Zero(1, 1);
  id.classes = {{0, kInf}};
  const bool rejected = !validate(id).fixed_point_encoding;
  v.detail << "identity=" << (rejected ? "rejected" : "accepted");
  if (!rejected) v.fail("counterexample accepted");
  const double t = seconds_since(t0);
  v.detail << " time=" << analyze::format_number(t) << "s";
  if (t >= 1.0) v.fail("slower than 1 s");
  return v;
}

Verdict criterion10() {
  Verdict v;
  std::string note;
  const std::vector<FunctionClass> cls = {{0, 1}};
  for (auto [d, g] : {std::pair{0.0, 1.0}, {0.2, 0.8}, {-0.5, 0.5}}) {
    const bool ok = region_verdict(Family::heavy_ball, cls, kValue, d, g, true, 0.01, "heavy_ball region", note);
    v.detail << "(" << d << "," << g << ")" << (ok ? "=feasible " : "=infeasible ");
    if (!ok) v.fail("infeasible at delta=" + analyze::format_number(d));
  }
  v.detail << note;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}, {10, criterion10},
  };
  // Criterion 7 checks every certificate gathered by 1-6, so it runs last.
  std::vector<std::pair<int, Verdict>> results;
  for (const auto& [id, f] : criteria)
    if (id != 7) results.emplace_back(id, f());
  results.emplace_back(7, criterion7());
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  int failures = 0;
  for (const auto& [id, v] : results) {
    std::printf("criterion %d: %s %s\n", id, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    failures += !v.pass;
  }
  std::fflush(stdout);
  return failures ? 1 : 0;
}
