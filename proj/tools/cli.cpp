#include "cli.hpp"

#include "CLI11.hpp"
#include "lyapcert/analyze.hpp"
#include "lyapcert/io.hpp"
#include "lyapcert/simulate.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace lyapcert::cli {

namespace {

struct Failure {
  int code;
  std::string message;
};

FunctionClass parse_class(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InputError("class must be sigma:beta, got '" + text + "'");
  FunctionClass c;
  try {
    c.sigma = std::stod(text.substr(0, colon));
    const std::string b = text.substr(colon + 1);
    c.beta = b == "inf" ? kInf : std::stod(b);
  } catch (const std::logic_error&) {
    throw InputError("class must be sigma:beta, got '" + text + "'");
  }
  c.check();
  return c;
}

std::vector<FunctionClass> default_classes(Family f) {
  switch (f) {
    case Family::douglas_rachford: return {{1.0, 2.0}, {0.0, kInf}};
    case Family::heavy_ball: return {{0.0, 1.0}};
    case Family::prox_heavy_ball: return {{0.0, 1.0}, {0.0, kInf}};
    case Family::davis_yin: return {{0.0, 10.0}, {1.0, 2.0}, {0.0, kInf}};
    case Family::chambolle_pock: return {{0.0, kInf}, {0.0, kInf}};
  }
  return {};
}

MethodRepresentation load_checked(const std::string& path, std::ostream& err) {
  const MethodRepresentation rep = io::parse_method(io::read_file(path));
  const ValidationReport vr = validate(rep);
  if (!vr.all_ok()) {
    for (const auto& d : vr.diagnostics) err << d << '\n';
    throw Failure{kFailed, "method failed validation; run `validate` for details"};
  }
  return normalized(rep, vr);
}

std::ostream& open_out(const std::string& path, std::ofstream& file, std::ostream& fallback) {
  if (path.empty() || path == "-") return fallback;
  file.open(path);
  if (!file) throw InputError("cannot write '" + path + "'");
  return file;
}

std::string pass(bool ok) { return ok ? "PASS" : "FAIL"; }

int cmd_validate(const std::string& path, std::ostream& out) {
  const MethodRepresentation rep = io::parse_method(io::read_file(path));
  const ValidationReport vr = validate(rep);
  out << "fixed-point encoding: " << pass(vr.fixed_point_encoding) << '\n';
  out << "  range condition: " << pass(vr.range_condition) << '\n';
  out << "  null condition: " << pass(vr.null_condition) << '\n';
  out << "well-posedness: " << pass(vr.well_posed) << '\n';
  out << "controllability: " << pass(vr.controllable) << '\n';
  out << "observability: " << pass(vr.observable) << '\n';
  auto list = [&](const char* name, const std::vector<std::size_t>& v) {
    out << name << ':';
    for (std::size_t i : v) out << ' ' << i + 1;
    out << '\n';
  };
  list("prox components", vr.prox_components);
  list("gradient components", vr.differentiable_components);
  list("permutation", vr.permutation);
  for (const auto& d : vr.diagnostics) out << "note: " << d << '\n';
  return vr.all_ok() ? kOk : kFailed;
}

int cmd_rate(const std::string& path, const std::string& preset, double tol, const std::string& csv, double param,
             std::ostream& out, std::ostream& err) {
  const MethodRepresentation rep = load_checked(path, err);
  const analyze::RateResult rr = analyze::bisect_rho(rep, certify::parse_preset(preset), tol);
  for (const auto& d : rr.diagnostics) err << "note: " << d << '\n';
  std::string status = rr.rho ? "ok" : (rr.inconclusive ? "inconclusive" : "infeasible");
  if (rr.rho) out << "rho=" << analyze::format_number(*rr.rho) << '\n';
  else out << "rho=none (" << status << ")\n";
  if (!csv.empty()) {
    std::ofstream f;
    analyze::write_rate_csv(open_out(csv, f, out), {{param, rr.rho, status}});
  }
  if (rr.rho) return kOk;
  return rr.inconclusive ? kInconclusive : kFailed;
}

int cmd_region(const std::string& family_name, const std::string& p1, const std::string& p2, const std::string& preset,
               const std::string& mask, const std::vector<std::string>& classes, bool second, const std::string& csv,
               std::size_t jobs, std::ostream& out, std::ostream& err) {
  const auto fam = parse_family(family_name);
  if (!fam) throw Failure{kUsage, "unknown family '" + family_name + "'"};
  analyze::RegionSpec spec;
  spec.family = *fam;
  spec.p1 = analyze::parse_axis(p1);
  spec.p2 = analyze::parse_axis(p2);
  if (!preset.empty()) spec.preset = certify::parse_preset(preset);
  if (!mask.empty() && mask != "restricted") throw Failure{kUsage, "--mask accepts only 'restricted'"};
  spec.restricted = mask == "restricted";
  spec.second_momentum = second;
  if (classes.empty()) {
    spec.classes = default_classes(*fam);
  } else {
    for (const auto& c : classes) spec.classes.push_back(parse_class(c));
  }
  const auto cells = analyze::sweep_region(spec, analyze::resolve_jobs(jobs));
  std::size_t feasible = 0, errors = 0;
  for (const auto& c : cells) {
    feasible += c.feasible ? 1 : 0;
    if (!c.error.empty()) {
      if (++errors <= 5) err << "cell (" << c.p1 << ", " << c.p2 << "): " << c.error << '\n';
    }
  }
  std::ofstream f;
  analyze::write_region_csv(open_out(csv, f, out), cells);
  err << feasible << " of " << cells.size() << " cells feasible";
  if (errors) err << ", " << errors << " failed";
  err << '\n';
  return errors == cells.size() ? kFailed : kOk;
}

int cmd_certify(const std::string& path, double rho, const std::string& preset, const std::string& mask,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
  const MethodRepresentation rep = load_checked(path, err);
  if (!(rho >= 0.0 && rho <= 1.0)) throw Failure{kUsage, "--rho must lie in [0, 1]"};
  const certify::Preset p = certify::parse_preset(preset);
  analyze::PointCheck pc;
  if (mask == "restricted") {
    if (rep.m != 2) throw Failure{kUsage, "--mask restricted applies to chambolle_pock only"};
    const certify::StructureMask sm = certify::restricted_mask(rep);
    pc = analyze::check_rate(rep, certify::restricted_preset(rep), rho, &sm);
  } else if (mask.empty()) {
    pc = analyze::check_rate(rep, certify::preset(p, rep), rho);
  } else {
    throw Failure{kUsage, "--mask accepts only 'restricted'"};
  }
  out << "status=" << sdp::status_name(pc.status) << " margin=" << analyze::format_number(pc.margin) << '\n';
  if (!pc.feasible())
    return pc.status == sdp::Status::Infeasible ? kFailed : kInconclusive;
  const std::string json = io::certificate_to_json(*pc.certificate, mask.empty() ? std::optional(p) : std::nullopt);
  if (out_path.empty() || out_path == "-") out << json << '\n';
  else io::write_file(out_path, json);
  err << "certificate verified\n";
  return kOk;
}

int cmd_audit(const std::string& method_path, const std::string& cert_path, std::size_t instances, std::uint64_t seed,
              std::size_t steps, std::size_t dim, const std::string& preset_opt, const std::string& trajectory_path,
              std::size_t jobs, std::ostream& out, std::ostream& err) {
  const MethodRepresentation rep = load_checked(method_path, err);
  const io::CertificateFile cf = io::parse_certificate(io::read_file(cert_path), rep);
  const certify::Preset preset = !preset_opt.empty() ? certify::parse_preset(preset_opt)
                                                     : cf.preset.value_or(certify::Preset{});
  const certify::LowerBoundSpec lb = certify::preset(preset, rep);
  const double rho = cf.certificate.rho;
  const certify::VerifyReport vr = certify::verify_certificate(rep, lb, rho, cf.certificate);
  if (!vr.passed) {
    for (const auto& v : vr.violations) err << "verify: " << v << '\n';
    out << "certificate: FAIL\n";
    return kFailed;
  }
  const bool gap = preset.kind == certify::PresetKind::duality_gap;
  std::atomic<std::size_t> passed{0}, no_fixed_point{0};
  std::mutex mu;
  double worst = -std::numeric_limits<double>::infinity();
  std::vector<std::string> notes;
  analyze::parallel_for(instances, analyze::resolve_jobs(jobs), [&](std::size_t i) {
    std::mt19937_64 rng(seed + i);
    const auto inst = simulate::random_instances(rep, dim, rng);
    const auto fp = simulate::find_fixed_point(rep, inst);
    if (!fp.ok) {
      ++no_fixed_point;
      std::lock_guard lock(mu);
      notes.push_back("instance " + std::to_string(i) + ": " + fp.error);
      return;
    }
    Vec x0(static_cast<Eigen::Index>(rep.n * dim));
    std::normal_distribution<double> g;
    for (Eigen::Index j = 0; j < x0.size(); ++j) x0(j) = fp.point.x(j) + g(rng);
    const auto tr = simulate::run(rep, inst, x0, steps);
    if (!tr.error.empty()) {
      std::lock_guard lock(mu);
      notes.push_back("instance " + std::to_string(i) + ": " + tr.error);
      return;
    }
    const auto ar = simulate::audit_certificate(rep, tr.points, fp.point, cf.certificate, lb, rho, gap);
    std::lock_guard lock(mu);
    worst = std::max(worst, ar.max_lyapunov_violation);
    if (ar.passed) ++passed;
    else notes.push_back("instance " + std::to_string(i) + ": " + ar.violations.front());
    if (i == 0 && !trajectory_path.empty()) {
      std::ofstream f(trajectory_path);
      if (f) simulate::write_trajectory_csv(f, tr.points, &ar);
      else notes.push_back("cannot write '" + trajectory_path + "'");
    }
  });
  for (std::size_t i = 0; i < notes.size() && i < 10; ++i) err << notes[i] << '\n';
  out << "instances=" << instances << " passed=" << passed.load() << " no_fixed_point=" << no_fixed_point.load()
      << " worst_relative_excess=" << analyze::format_number(worst) << '\n';
  return passed.load() == instances ? kOk : kFailed;
}

// Figure datasets. Grids coarser than the 0.01 spacing are used by default;
// --fine switches the region grids to 0.01.
struct Repro {
  std::filesystem::path dir;
  std::size_t jobs;
  bool fine;
  std::ostream& err;

  void rates(const std::string& file, const std::vector<double>& params,
             const std::function<MethodRepresentation(double)>& build, const certify::Preset& preset) {
    std::vector<analyze::RatePoint> rows(params.size());
    analyze::parallel_for(params.size(), jobs, [&](std::size_t i) {
      rows[i].param = params[i];
      try {
        const MethodRepresentation rep0 = build(params[i]);
        const MethodRepresentation rep = normalized(rep0, validate(rep0));
        const auto rr = analyze::bisect_rho(rep, preset);
        rows[i].rho = rr.rho;
        rows[i].status = rr.rho ? "ok" : (rr.inconclusive ? "inconclusive" : "infeasible");
      } catch (const std::exception&) {
        rows[i].status = "error";
      }
    });
    std::ofstream f(dir / file);
    if (!f) throw InputError("cannot write '" + (dir / file).string() + "'");
    analyze::write_rate_csv(f, rows);
    err << "wrote " << (dir / file).string() << '\n';
  }

  void region(const std::string& file, analyze::RegionSpec spec) {
    const auto cells = analyze::sweep_region(spec, jobs);
    std::ofstream f(dir / file);
    if (!f) throw InputError("cannot write '" + (dir / file).string() + "'");
    analyze::write_region_csv(f, cells);
    err << "wrote " << (dir / file).string() << '\n';
  }

  static std::vector<double> range(double lo, double hi, double step) { return analyze::Axis{lo, hi, step}.values(); }
};

int cmd_repro(const std::string& target, const std::string& dir, std::size_t jobs, bool fine, std::ostream& err) {
  std::filesystem::create_directories(dir);
  Repro r{dir, analyze::resolve_jobs(jobs), fine, err};
  const certify::Preset dist{certify::PresetKind::distance_to_solution, 1};
  const certify::Preset fval{certify::PresetKind::function_value_suboptimality, 1};
  const double hb_step = fine ? 0.01 : 0.025;
  if (target == "fig1") {
    r.rates("fig1.csv", Repro::range(0.05, 5.0, fine ? 0.025 : 0.05), [](double g) {
      return zoo_build(Family::douglas_rachford, std::vector<double>{g, 1.0},
                       std::vector<FunctionClass>{{1.0, 2.0}, {0.0, kInf}});
    }, dist);
  } else if (target == "fig2a") {
    analyze::RegionSpec s;
    s.family = Family::heavy_ball;
    s.p1 = {-1.0, 1.0, hb_step};
    s.p2 = {hb_step, 3.0, hb_step};
    s.classes = {{0.0, 1.0}};
    s.preset = fval;
    r.region("fig2a.csv", s);
  } else if (target == "fig2b") {
    analyze::RegionSpec s;
    s.family = Family::prox_heavy_ball;
    s.p1 = {-1.0, 1.0, hb_step};
    s.p2 = {hb_step, 3.0, hb_step};
    s.classes = {{0.0, 1.0}, {0.0, kInf}};
    r.region("fig2b_delta1.csv", s);
    s.second_momentum = true;
    r.region("fig2b_delta2.csv", s);
  } else if (target == "fig2c") {
    r.rates("fig2c.csv", Repro::range(-0.6, 1.0, fine ? 0.01 : 0.02), [](double d) {
      return zoo_build(Family::heavy_ball, std::vector<double>{0.1, d}, std::vector<FunctionClass>{{1.0, 10.0}});
    }, dist);
  } else if (target == "fig3") {
    r.rates("fig3.csv", Repro::range(0.5, 40.0, fine ? 0.25 : 0.5), [](double b1) {
      return zoo_build(Family::davis_yin, std::vector<double>{0.5, 1.0},
                       std::vector<FunctionClass>{{0.0, b1}, {1.0, 2.0}, {0.0, kInf}});
    }, dist);
  } else if (target == "fig4a") {
    analyze::RegionSpec s;
    s.family = Family::chambolle_pock;
    s.p1 = {0.5, 1.75, fine ? 0.01 : 0.025};
    s.p2 = {-0.5, 8.0, fine ? 0.01 : 0.1};
    s.classes = {{0.0, kInf}, {0.0, kInf}};
    r.region("fig4a.csv", s);
    s.restricted = true;
    r.region("fig4a_restricted.csv", s);
  } else if (target == "fig4b") {
    const auto taus = Repro::range(0.5, 1.75, fine ? 0.025 : 0.05);
    const auto thetas = Repro::range(-0.5, 8.0, fine ? 0.1 : 0.25);
    struct Cell {
      double tau, theta;
      std::optional<double> rho;
      std::string status;
    };
    std::vector<Cell> cells(taus.size() * thetas.size());
    analyze::parallel_for(cells.size(), r.jobs, [&](std::size_t i) {
      Cell& c = cells[i];
      c.tau = taus[i / thetas.size()];
      c.theta = thetas[i % thetas.size()];
      try {
        const auto rep = zoo_build(Family::chambolle_pock, std::vector<double>{c.tau, c.tau, c.theta},
                                   std::vector<FunctionClass>{{0.05, 50.0}, {0.05, 50.0}});
        const auto rr = analyze::bisect_rho(rep, dist);
        c.rho = rr.rho;
        c.status = rr.rho ? "ok" : (rr.inconclusive ? "inconclusive" : "infeasible");
      } catch (const std::exception&) {
        c.status = "error";
      }
    });
    const auto path = r.dir / "fig4b.csv";
    std::ofstream f(path);
    if (!f) throw InputError("cannot write '" + path.string() + "'");
    f << "p1,p2,rho,status\n";
    for (const auto& c : cells)
      f << analyze::format_number(c.tau) << ',' << analyze::format_number(c.theta) << ','
        << (c.rho ? analyze::format_number(*c.rho) : "") << ',' << c.status << '\n';
    err << "wrote " << path.string() << '\n';
  } else {
    throw Failure{kUsage, "unknown repro target '" + target + "'"};
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quadratic Lyapunov certificates for first-order methods", "lyapcert"};
  app.require_subcommand(1);
  std::size_t jobs = 0;
  app.add_option("--jobs", jobs, "Worker threads (LYAPCERT_JOBS overrides; 0 = all cores)");

  std::string method, cert, preset, csv, mask, family, p1, p2, traj, target, dir = ".";
  std::vector<std::string> classes;
  double tol = 1e-3, rho = 1.0, param = 0.0;
  std::size_t instances = 100, steps = 200, dim = 2;
  std::uint64_t seed = 0;
  bool second = false, fine = false;

  auto* v = app.add_subcommand("validate", "Check the structural assumptions of a method");
  v->add_option("method", method, "Method JSON")->required();

  auto* r = app.add_subcommand("rate", "Bisect for the smallest certifiable linear rate");
  r->add_option("method", method, "Method JSON")->required();
  r->add_option("--preset", preset, "distance:i, function_value or duality_gap")->default_val("distance:1");
  r->add_option("--tol", tol, "Bisection tolerance")->default_val(1e-3);
  r->add_option("--out", csv, "Rate CSV output");
  r->add_option("--param", param, "Value written to the CSV param column")->default_val(0.0);

  auto* g = app.add_subcommand("region", "Sweep a parameter grid at rho = 1");
  g->add_option("family", family, "Method family")->required();
  g->add_option("--p1", p1, "lo:hi:step")->required();
  g->add_option("--p2", p2, "lo:hi:step")->required();
  g->add_option("--preset", preset, "Lower-bound preset (default by component count)");
  g->add_option("--mask", mask, "'restricted' (chambolle_pock only)");
  g->add_option("--class", classes, "sigma:beta per component, in order");
  g->add_flag("--second-momentum", second, "prox_heavy_ball: sweep delta2 with delta1 = 0");
  g->add_option("--out", csv, "Region CSV output (stdout when absent)");

  auto* c = app.add_subcommand("certify", "Synthesize and verify a certificate");
  c->add_option("method", method, "Method JSON")->required();
  c->add_option("--rho", rho, "Rate")->required();
  c->add_option("--preset", preset, "Lower-bound preset")->default_val("distance:1");
  c->add_option("--mask", mask, "'restricted' (chambolle_pock only)");
  c->add_option("--out", csv, "Certificate JSON output (stdout when absent)");

  auto* a = app.add_subcommand("audit", "Check a certificate along simulated trajectories");
  a->add_option("method", method, "Method JSON")->required();
  a->add_option("certificate", cert, "Certificate JSON")->required();
  a->add_option("--instances", instances, "Random instances")->default_val(100);
  a->add_option("--seed", seed, "Base seed")->default_val(0);
  a->add_option("--steps", steps, "Iterations per trajectory")->default_val(200);
  a->add_option("--dim", dim, "Dimension of each variable")->default_val(2);
  a->add_option("--preset", preset, "Overrides the preset stored in the certificate");
  a->add_option("--trajectory", traj, "CSV dump of the first trajectory");

  auto* p = app.add_subcommand("repro", "Regenerate a figure dataset");
  p->add_option("target", target, "fig1|fig2a|fig2b|fig2c|fig3|fig4a|fig4b")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2a", "fig2b", "fig2c", "fig3", "fig4a", "fig4b"}));
  p->add_option("--out-dir", dir, "Output directory")->default_val(".");
  p->add_flag("--fine", fine, "Use the 0.01 region grid");

  std::vector<std::string> argv_store{"lyapcert"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*v) return cmd_validate(method, out);
    if (*r) return cmd_rate(method, preset, tol, csv, param, out, err);
    if (*g) return cmd_region(family, p1, p2, preset, mask, classes, second, csv, jobs, out, err);
    if (*c) return cmd_certify(method, rho, preset, mask, csv, out, err);
    if (*a) return cmd_audit(method, cert, instances, seed, steps, dim, preset, traj, jobs, out, err);
    if (*p) return cmd_repro(target, dir, jobs, fine, err);
  } catch (const Failure& f) {
    err << f.message << '\n';
    return f.code;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace lyapcert::cli
