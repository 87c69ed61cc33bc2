#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "legendrian/errors.hpp"

using namespace legendrian;
using namespace legendrian::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json tiny_config() {
  return {{"N", 4},
          {"grid_radii", 17},
          {"grid_angles", 64},
          {"radius_resolution", 48},
          {"boundary_samples", 16},
          {"samples_per_region", 2000},
          {"degrees", {16, 32}},
          {"bump", "identity"},
          {"mesh_resolution", 5}};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("legendrian_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "legendrian");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

const json* find_check(const json& report, const std::string& name) {
  for (const auto& c : report.at("checks"))
    if (c.at("name") == name) return &c;
  return nullptr;
}

// Shared tiny diagnostic run.
const fs::path& tiny_run() {
  static const fs::path dir = [] {
    fs::path d = scratch("tiny");
    std::ostringstream log;
    cmd_construct(parse_config(tiny_config()), d, log);
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Config, DefaultsMatchTheDriver) {
  RunConfig c = parse_config(json::object());
  EXPECT_EQ(c.n, 10);
  EXPECT_DOUBLE_EQ(c.eps, 0.05);
  EXPECT_DOUBLE_EQ(c.s, 0.2);
  EXPECT_EQ(c.rounds, 1);
  EXPECT_EQ(c.initial.phi1.coeff(0), Complex(1.0));
  EXPECT_EQ(c.initial.phi2.coeff(1), Complex(0.5));
}

TEST(Config, AcceptsRealAndComplexCoefficients) {
  RunConfig c = parse_config({{"initial", {{"phi1", {1, {0, 2}}}, {"phi2", {{0.5, -1}}}}}});
  EXPECT_EQ(c.initial.phi1.coeff(1), Complex(0, 2));
  EXPECT_EQ(c.initial.phi2.coeff(0), Complex(0.5, -1));
}

TEST(Config, RejectsInvalidDocuments) {
  EXPECT_THROW(parse_config({{"colour", 1}}), UsageError);
  EXPECT_THROW(parse_config({{"rounds", 0}}), UsageError);
  EXPECT_THROW(parse_config({{"eps", -0.1}}), UsageError);
  EXPECT_THROW(parse_config({{"s", 0.5}}), UsageError);
  EXPECT_THROW(parse_config({{"singular_tol", 0.0}}), UsageError);
  EXPECT_THROW(parse_config({{"N", "ten"}}), UsageError);
  EXPECT_THROW(parse_config({{"bump", "wide"}}), UsageError);
  EXPECT_THROW(parse_config({{"exports", {"r4"}}}), UsageError);
  EXPECT_THROW(parse_config({{"format", "stl"}}), UsageError);
  EXPECT_THROW(parse_config({{"initial", {{"phi1", {1}}}}}), UsageError);
  EXPECT_THROW(parse_config({{"initial", {{"phi1", {1}}, {"phi2", {"x"}}}}}), UsageError);
  EXPECT_THROW(parse_config(json::array()), UsageError);
}

TEST(Config, RecordedConfigReparsesToItself) {
  RunConfig c = parse_config(tiny_config());
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Construct, ManifestRecordsTwoNSteps) {
  json m = json::parse(slurp(tiny_run() / "manifest.json"));
  ASSERT_EQ(m.at("report").at("rounds").size(), 1u);
  EXPECT_EQ(m.at("report").at("rounds")[0].at("steps").size(), 8u);
  EXPECT_EQ(m.at("status"), "diagnostic");
  EXPECT_EQ(m.at("config").at("degree_cap"), holo::kDefaultDegreeCap);
  EXPECT_TRUE(fs::exists(tiny_run() / "initial.bin"));
  EXPECT_TRUE(fs::exists(tiny_run() / "last.json"));
}

TEST(Construct, IdenticalConfigsGiveIdenticalManifests) {
  fs::path again = scratch("tiny_again");
  std::ostringstream log;
  cmd_construct(parse_config(tiny_config()), again, log);
  EXPECT_EQ(slurp(again / "manifest.json"), slurp(tiny_run() / "manifest.json"));
  EXPECT_EQ(slurp(again / "last.bin"), slurp(tiny_run() / "last.bin"));
}

TEST(Construct, DiagnosticRunsDoNotExitCleanly) {
  fs::path d = scratch("exit");
  std::ostringstream log;
  EXPECT_EQ(cmd_construct(parse_config(tiny_config()), d, log), kExitFailure);
}

TEST(Construct, FailedCertificationLeavesAMachineReadableRecord) {
  json cfg = tiny_config();
  cfg["bump"] = "standard";
  fs::path d = scratch("failed");
  std::ostringstream log;
  EXPECT_EQ(cmd_construct(parse_config(cfg), d, log), kExitFailure);
  json m = json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(m.at("status"), "certificate_failure");
  EXPECT_EQ(m.at("failure").at("step"), 1);
  EXPECT_FALSE(m.at("failure").at("margins").at("certified").get<bool>());
  json r = verify_report(d / "last");
  EXPECT_FALSE(r.at("passed").get<bool>());
  EXPECT_FALSE(find_check(r, "round0.runge_certificates")->at("passed").get<bool>());
}

TEST(Construct, ThreeRoundsStayBelowTheComposedBound) {
  json cfg = tiny_config();
  cfg["rounds"] = 3;
  fs::path d = scratch("rounds");
  std::ostringstream log;
  cmd_construct(parse_config(cfg), d, log);
  json rep = json::parse(slurp(d / "manifest.json")).at("report");
  ASSERT_TRUE(rep.at("completed").get<bool>());
  ASSERT_EQ(rep.at("tau").size(), 4u);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_LE(rep.at("sup_norm")[k].get<double>(), rep.at("tau")[k].get<double>() + 1e-12);
}

TEST(Construct, RejectsADegenerateInitialPair) {
  json cfg = tiny_config();
  cfg["initial"] = {{"phi1", {0}}, {"phi2", {0}}};
  std::ostringstream log;
  EXPECT_THROW(cmd_construct(parse_config(cfg), scratch("degenerate"), log), UsageError);
}

TEST(Verify, FreshOutputPassesEveryCurveAndCertificateCheck) {
  json r = verify_report(tiny_run() / "last");
  for (const auto& c : r.at("checks")) {
    std::string name = c.at("name");
    // nothing was modified, so the radius cannot grow
    if (name == "round0.radius_growth") {
      EXPECT_FALSE(c.at("passed").get<bool>());
      continue;
    }
    EXPECT_TRUE(c.at("passed").get<bool>()) << name;
  }
  EXPECT_NE(find_check(r, "snapshot_digest"), nullptr);
  EXPECT_NE(find_check(r, "metric_estimate"), nullptr);
}

TEST(Verify, IsIdempotent) {
  std::string before = slurp(tiny_run() / "manifest.json");
  json a = verify_report(tiny_run() / "last.json");
  json b = verify_report(tiny_run() / "last.bin");
  EXPECT_EQ(a, b);
  EXPECT_EQ(slurp(tiny_run() / "manifest.json"), before);
}

TEST(Verify, CorruptedGridByteIsDetected) {
  fs::path d = scratch("corrupt");
  fs::copy(tiny_run(), d, fs::copy_options::recursive);
  {
    std::fstream f(d / "last.bin", std::ios::in | std::ios::out | std::ios::binary);
    // high byte of the real part of m11 at some interior node
    f.seekp(8 * 8 * 200 + 7);
    char c = 0;
    f.read(&c, 1);
    f.seekp(8 * 8 * 200 + 7);
    c ^= 0x10;
    f.write(&c, 1);
  }
  json r = verify_report(d / "last");
  EXPECT_FALSE(r.at("passed").get<bool>());
  EXPECT_FALSE(find_check(r, "snapshot_digest")->at("passed").get<bool>());
  EXPECT_FALSE(find_check(r, "det_drift")->at("passed").get<bool>());
  EXPECT_FALSE(find_check(r, "reintegration_agreement")->at("passed").get<bool>());

  // a low mantissa bit is below every invariant; only the digest sees it
  fs::copy_file(tiny_run() / "last.bin", d / "last.bin", fs::copy_options::overwrite_existing);
  {
    std::fstream f(d / "last.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8 * 8 * 200);
    char c = 0;
    f.read(&c, 1);
    f.seekp(8 * 8 * 200);
    c ^= 0x01;
    f.write(&c, 1);
  }
  r = verify_report(d / "last");
  EXPECT_FALSE(find_check(r, "snapshot_digest")->at("passed").get<bool>());
}

TEST(Verify, TruncatedSamplesAreAFormatError) {
  fs::path d = scratch("truncated");
  fs::copy(tiny_run(), d, fs::copy_options::recursive);
  fs::resize_file(d / "last.bin", 100);
  EXPECT_THROW(verify_report(d / "last"), FormatError);
  EXPECT_EQ(run_args({"verify", (d / "last").string()}), kExitUsage);
}

TEST(Export, AllThreeTargetsWithSidecars) {
  fs::path d = scratch("export");
  std::ostringstream log;
  for (auto t : {fronts::Target::H3PoincareBall, fronts::Target::DeSitter, fronts::Target::AffineR3}) {
    EXPECT_EQ(cmd_export(tiny_run() / "last", t, fronts::MeshFormat::Ply, 9, d, log), kExitOk);
    fs::path mesh = d / ("front_" + fronts::to_string(t) + ".ply");
    ASSERT_TRUE(fs::exists(mesh));
    json side = json::parse(slurp(mesh.string() + ".json"));
    EXPECT_EQ(side.at("target"), fronts::to_string(t));
    EXPECT_EQ(side.at("run").at("resolution"), 9);
  }
}

TEST(Export, IdentityCurveIsRejected) {
  fs::path d = scratch("identity");
  fs::create_directories(d);
  holo::HoloPair zero{holo::HoloFunction::constant(0.0), holo::HoloFunction::constant(0.0)};
  contact::LegendrianCurve c = contact::integrate(zero, 0.0, Mat2::identity(), contact::PolarGrid(5, 8));
  contact::write_curve(c, d / "id.json", d / "id.bin");
  std::ostringstream log;
  try {
    cmd_export(d / "id", fronts::Target::H3PoincareBall, fronts::MeshFormat::Obj, 5, d, log);
    FAIL() << "export of a constant curve succeeded";
  } catch (const DegenerateDataError& e) {
    EXPECT_NE(std::string(e.what()).find("immersion required"), std::string::npos);
  }
  EXPECT_FALSE(fs::exists(d / "front_h3.obj"));
  EXPECT_EQ(run_args({"export", (d / "id").string(), "--target", "h3", "--out", d.string()}), kExitFailure);
}

TEST(Export, MatchesTheGoldenMesh) {
  fs::path d = scratch("golden");
  std::ostringstream log;
  cmd_export(tiny_run() / "last", fronts::Target::H3PoincareBall, fronts::MeshFormat::Obj, 5, d, log);
  std::ifstream got(d / "front_h3.obj");
  std::ifstream want(fs::path(LEGENDRIAN_GOLDEN_DIR) / "tiny_front_h3.obj");
  ASSERT_TRUE(want) << "golden file missing";
  std::string a, b;
  int lines = 0;
  while (std::getline(want, b)) {
    ASSERT_TRUE(std::getline(got, a)) << "line " << lines;
    ++lines;
    std::istringstream sa(a), sb(b);
    std::string ta, tb;
    sa >> ta;
    sb >> tb;
    ASSERT_EQ(ta, tb) << "line " << lines;
    if (ta == "v") {
      for (int k = 0; k < 3; ++k) {
        double x = 0, y = 0;
        sa >> x;
        sb >> y;
        EXPECT_NEAR(x, y, 1e-12) << "line " << lines;
      }
    } else {
      EXPECT_EQ(a, b) << "line " << lines;
    }
  }
  EXPECT_FALSE(std::getline(got, a)) << "extra lines";
  EXPECT_GT(lines, 0);
}

TEST(Run, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run_args({}), kExitUsage);
  EXPECT_EQ(run_args({"paint"}), kExitUsage);
  EXPECT_EQ(run_args({"export", "x", "--target", "r4", "--out", "y"}), kExitUsage);
  EXPECT_EQ(run_args({"construct", "--out", scratch("usage").string(), "--format", "stl"}), kExitUsage);
  EXPECT_EQ(run_args({"verify", scratch("missing").string()}), kExitUsage);
}

TEST(Run, ConstructThroughTheCommandLine) {
  fs::path d = scratch("argv");
  fs::create_directories(d);
  fs::path cfg = d / "config.json";
  std::ofstream(cfg) << tiny_config().dump();
  fs::path out = d / "out";
  EXPECT_EQ(run_args({"construct", "--config", cfg.string(), "--out", out.string(), "--format", "obj"}),
            kExitFailure);
  json m = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(m.at("config").at("format"), "obj");
  EXPECT_EQ(run_args({"export", (out / "last").string(), "--target", "desitter", "--format", "obj", "--out",
                      out.string(), "--resolution", "4"}),
            kExitOk);
  EXPECT_TRUE(fs::exists(out / "front_desitter.obj"));
}
