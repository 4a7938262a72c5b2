#include "lyapcert/analyze.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace lyapcert::analyze {

namespace {

void apply_mask(const certify::StructureMask& mask, certify::LyapunovCertificate& c) {
  for (Eigen::Index i = 0; i < c.Q.rows(); ++i)
    for (Eigen::Index j = 0; j < c.Q.cols(); ++j)
      if (mask.Q(i, j)) c.Q(i, j) = 0.0;
  for (Eigen::Index i = 0; i < c.S.rows(); ++i)
    for (Eigen::Index j = 0; j < c.S.cols(); ++j)
      if (mask.S(i, j)) c.S(i, j) = 0.0;
  for (Eigen::Index i = 0; i < c.q.size(); ++i)
    if (mask.q(i)) c.q(i) = 0.0;
  for (Eigen::Index i = 0; i < c.s.size(); ++i)
    if (mask.s(i)) c.s(i) = 0.0;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("not a number: '" + std::string(s) + "'");
  return v;
}

}  // namespace

PointCheck check_rate(const MethodRepresentation& rep, const certify::LowerBoundSpec& lb, double rho,
                      const certify::StructureMask* mask, const sdp::SolverOptions& opt) {
  PointCheck pc;
  const certify::Assembly as = certify::assemble(rep, lb, rho, mask);
  const sdp::SdpOutcome out = sdp::solve_feasibility(as.problem, opt);
  pc.status = out.status;
  pc.margin = out.margin;
  if (out.status != sdp::Status::Feasible || !out.point) return pc;
  certify::LyapunovCertificate cert = certify::extract(rep, *out.point, rho);
  if (mask) apply_mask(*mask, cert);
  if (certify::verify_certificate(rep, lb, rho, cert).passed) pc.certificate = std::move(cert);
  else pc.status = sdp::Status::Marginal;
  return pc;
}

RateResult bisect_rho(const MethodRepresentation& rep, const certify::Preset& preset, double tol,
                      const sdp::SolverOptions& opt) {
  return bisect_rho(rep, certify::preset(preset, rep), tol, opt);
}

RateResult bisect_rho(const MethodRepresentation& rep, const certify::LowerBoundSpec& lb, double tol,
                      const sdp::SolverOptions& opt) {
  if (!(tol > 0.0 && tol < 0.5)) throw InputError("bisect_rho: tol must lie in (0, 0.5)");
  RateResult rr;
  double hi = 1.0 - tol;
  PointCheck top = check_rate(rep, lb, hi, nullptr, opt);
  ++rr.solves;
  if (!top.feasible()) {
    if (top.status != sdp::Status::Infeasible) {
      rr.inconclusive = true;
      rr.diagnostics.push_back("rho=" + format_number(hi) + ": solver returned " +
                               std::string(sdp::status_name(top.status)) + " (margin " + format_number(top.margin) + ")");
    }
    return rr;
  }
  rr.certificate = std::move(top.certificate);
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    PointCheck pc = check_rate(rep, lb, mid, nullptr, opt);
    ++rr.solves;
    if (pc.feasible()) {
      hi = mid;
      rr.certificate = std::move(pc.certificate);
    } else {
      lo = mid;
      if (pc.status == sdp::Status::Marginal || pc.status == sdp::Status::MaxIterations)
        rr.diagnostics.push_back("rho=" + format_number(mid) + ": " + std::string(sdp::status_name(pc.status)) +
                                 " counted as infeasible");
    }
  }
  rr.rho = hi;
  return rr;
}

std::vector<double> Axis::values() const {
  if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
    throw InputError("axis needs finite lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + static_cast<double>(i) * step;
  return out;
}

Axis parse_axis(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw InputError("axis must be lo:hi:step, got '" + std::string(text) + "'");
  Axis a{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
  (void)a.values();
  return a;
}

std::vector<double> sweep_params(Family family, double p1, double p2, bool second_momentum) {
  switch (family) {
    case Family::chambolle_pock: return {p1, p1, p2};
    case Family::heavy_ball: return {p2, p1};
    case Family::prox_heavy_ball: return second_momentum ? std::vector<double>{p2, 0.0, p1} : std::vector<double>{p2, p1, 0.0};
    case Family::douglas_rachford:
    case Family::davis_yin: return {p1, p2};
  }
  throw InputError("sweep_params: unknown family");
}

std::vector<RegionCell> sweep_region(const RegionSpec& spec, std::size_t jobs,
                                     const std::function<void(const RegionCell&)>& sink,
                                     const sdp::SolverOptions& opt) {
  if (spec.classes.size() != family_components(spec.family))
    throw InputError("sweep_region: expected " + std::to_string(family_components(spec.family)) + " function classes");
  if (spec.restricted && spec.family != Family::chambolle_pock)
    throw InputError("sweep_region: the restricted mask is defined for chambolle_pock only");
  const std::vector<double> v1 = spec.p1.values(), v2 = spec.p2.values();
  const certify::Preset preset = spec.preset.value_or(
      spec.classes.size() == 1 ? certify::Preset{certify::PresetKind::function_value_suboptimality, 1}
                               : certify::Preset{certify::PresetKind::duality_gap, 1});
  std::vector<RegionCell> cells(v1.size() * v2.size());
  std::mutex sink_mutex;
  parallel_for(cells.size(), jobs, [&](std::size_t idx) {
    RegionCell& c = cells[idx];
    c.index = idx;
    c.p1 = v1[idx / v2.size()];
    c.p2 = v2[idx % v2.size()];
    try {
      const std::vector<double> params = sweep_params(spec.family, c.p1, c.p2, spec.second_momentum);
      const MethodRepresentation rep = zoo_build(spec.family, params, spec.classes);
      if (spec.restricted) {
        const certify::StructureMask mask = certify::restricted_mask(rep);
        const PointCheck pc = check_rate(rep, certify::restricted_preset(rep), 1.0, &mask, opt);
        c.feasible = pc.feasible();
        c.status = pc.status;
      } else {
        const PointCheck pc = check_rate(rep, certify::preset(preset, rep), 1.0, nullptr, opt);
        c.feasible = pc.feasible();
        c.status = pc.status;
      }
    } catch (const std::exception& e) {
      c.error = e.what();
      c.feasible = false;
    }
    if (sink) {
      std::lock_guard lock(sink_mutex);
      sink(c);
    }
  });
  return cells;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
}

std::size_t resolve_jobs(std::size_t requested) {
  if (const char* env = std::getenv("LYAPCERT_JOBS"); env && *env) {
    std::size_t v = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void write_rate_csv(std::ostream& os, const std::vector<RatePoint>& rows) {
  os << "param,rho,status\n";
  for (const auto& r : rows) os << format_number(r.param) << ',' << (r.rho ? format_number(*r.rho) : "") << ',' << r.status << '\n';
}

void write_region_csv(std::ostream& os, const std::vector<RegionCell>& cells) {
  os << "p1,p2,feasible\n";
  for (const auto& c : cells) os << format_number(c.p1) << ',' << format_number(c.p2) << ',' << (c.feasible ? 1 : 0) << '\n';
}

std::vector<RegionCell> read_region_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "p1,p2,feasible") throw InputError("region csv: missing header");
  std::vector<RegionCell> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto a = line.find(','), b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) throw InputError("region csv: bad row '" + line + "'");
    RegionCell c;
    c.index = out.size();
    c.p1 = parse_double(std::string_view(line).substr(0, a));
    c.p2 = parse_double(std::string_view(line).substr(a + 1, b - a - 1));
    const std::string_view f = std::string_view(line).substr(b + 1);
    if (f != "0" && f != "1") throw InputError("region csv: feasible must be 0 or 1");
    c.feasible = f == "1";
    out.push_back(c);
  }
  return out;
}

}  // namespace lyapcert::analyze
