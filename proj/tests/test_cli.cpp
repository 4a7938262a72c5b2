#include "cli.hpp"

#include "lyapcert/analyze.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lyapcert;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string method(const char* name) { return std::string(LYAPCERT_METHODS_DIR) + "/" + name + ".json"; }

fs::path scratch_dir(const char* name) {
  fs::path p = fs::temp_directory_path() / ("lyapcert_cli_" + std::string(name));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, ValidateZooMethod) {
  auto r = run_cli({"validate", method("chambolle_pock")});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("fixed-point encoding: PASS"), std::string::npos);
}

TEST(Cli, ValidateCounterexample) {
  auto r = run_cli({"validate", method("identity")});
  EXPECT_EQ(r.code, cli::kFailed);
  EXPECT_NE(r.out.find("fixed-point encoding: FAIL"), std::string::npos);
}

TEST(Cli, RateOnGradientMethod) {
  auto dir = scratch_dir("rate");
  auto csv = (dir / "rate.csv").string();
  auto r = run_cli({"rate", method("gradient"), "--out", csv});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out.rfind("rho=0.81", 0), 0u) << r.out;
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "param,rho,status");
}

TEST(Cli, CertifyThenAudit) {
  auto dir = scratch_dir("audit");
  auto cert = (dir / "cert.json").string();
  auto c = run_cli({"certify", method("douglas_rachford"), "--rho", "0.6", "--preset", "distance:1", "--out", cert});
  ASSERT_EQ(c.code, cli::kOk) << c.err;
  auto a = run_cli({"audit", method("douglas_rachford"), cert, "--instances", "10", "--seed", "3"});
  EXPECT_EQ(a.code, cli::kOk) << a.err;
  EXPECT_NE(a.out.find("passed=10"), std::string::npos) << a.out;
}

TEST(Cli, CertifyInfeasibleRate) {
  auto r = run_cli({"certify", method("gradient"), "--rho", "0.7", "--preset", "distance:1"});
  EXPECT_EQ(r.code, cli::kFailed);
}

TEST(Cli, RegionCsvRoundTrip) {
  auto dir = scratch_dir("region");
  auto csv = (dir / "cp.csv").string();
  auto r = run_cli({"region", "chambolle_pock", "--p1", "0.9:1.2:0.1", "--p2", "1:1:0.1", "--out", csv});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  std::ifstream in(csv);
  auto cells = analyze::read_region_csv(in);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_TRUE(cells[0].feasible);
  EXPECT_FALSE(cells[3].feasible);
  std::ostringstream again;
  analyze::write_region_csv(again, cells);
  std::ifstream raw(csv);
  std::stringstream original;
  original << raw.rdbuf();
  EXPECT_EQ(again.str(), original.str());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"rate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"region", "chambolle_pock", "--p1", "1:0:0.1", "--p2", "0:1:0.5"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"region", "heavy_ball", "--p1", "0:0:0.1", "--p2", "0.5:0.5:0.1", "--mask", "restricted"}).code,
            cli::kUsage);
}

TEST(Cli, MissingFileIsUsageError) { EXPECT_EQ(run_cli({"validate", "/nonexistent.json"}).code, cli::kUsage); }

TEST(Cli, ReproSmallTarget) {
  auto dir = scratch_dir("repro");
  auto r = run_cli({"repro", "fig2c", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_TRUE(fs::exists(dir / "fig2c.csv"));
}
