#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "legendrian/errors.hpp"
#include "legendrian/geometry.hpp"

namespace legendrian::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kResidualLimit = 1e-8;
constexpr double kDetLimit = 1e-9;
constexpr double kOriginLimit = 1e-10;
constexpr double kReintegrationLimit = 1e-9;

const std::set<std::string> kConfigKeys = {
    "initial",           "N",        "eps",          "s",           "rounds",         "grid_radii",
    "grid_angles",       "radius_resolution",        "boundary_samples", "samples_per_region",
    "boundary_density",  "degrees",  "degree_cap",   "bump",        "exports",        "format",
    "mesh_resolution",   "singular_tol"};

Complex parse_coefficient(const json& c) {
  if (c.is_number()) return {c.get<double>(), 0.0};
  if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
    return {c[0].get<double>(), c[1].get<double>()};
  throw UsageError("coefficient must be a number or [re, im]: " + c.dump());
}

holo::HoloFunction parse_function(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) throw UsageError(std::string("initial.") + name + " must be a non-empty array");
  std::vector<Complex> c;
  for (const auto& e : j) c.push_back(parse_coefficient(e));
  for (const auto& z : c)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw UsageError(std::string("initial.") + name + " has a non-finite coefficient");
  return holo::HoloFunction(std::move(c), std::max(holo::kDefaultDegreeCap, j.size()));
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw UsageError("config key '" + key + "': " + e.what());
  }
}

// FNV-1a over the file contents, as 16 hex digits.
std::string file_digest(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_json(const json& j, const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(p.filename().string() + ": " + e.what());
  }
}

// JSON writes non-finite doubles as null.
double number(const json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

struct Check {
  std::string name;
  double value;
  double limit;
  bool passed;
};

// value <= limit, false for NaN
Check upper(std::string name, double value, double limit) { return {std::move(name), value, limit, value <= limit}; }
// value >= limit
Check lower(std::string name, double value, double limit) { return {std::move(name), value, limit, value >= limit}; }

json to_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"passed", c.passed}};
}

std::string extension(fronts::MeshFormat f) { return f == fronts::MeshFormat::Obj ? "obj" : "ply"; }

void write_snapshot(const contact::LegendrianCurve& curve, const fs::path& dir, const std::string& stem,
                    json& manifest) {
  fs::path header = dir / (stem + ".json");
  fs::path samples = dir / (stem + ".bin");
  contact::write_curve(curve, header, samples);
  manifest["snapshots"][stem] = {
      {"header", header.filename().string()}, {"samples", samples.filename().string()},
      {"fnv1a64", file_digest(samples)}};
}

fronts::FrontMesh build_front(const contact::LegendrianCurve& curve, fronts::Target target, int resolution,
                              double singular_tol, json& info) {
  try {
    holo::norm_bounds(curve.pair, 64);
  } catch (const DegenerateDataError& e) {
    throw DegenerateDataError(std::string("immersion required: the holomorphic data vanishes (") + e.what() + ")");
  }
  switch (target) {
    case fronts::Target::H3PoincareBall:
      return fronts::flat_front_h3(curve, resolution, singular_tol);
    case fronts::Target::DeSitter:
      return fronts::flat_front_desitter(curve, resolution, singular_tol);
    case fronts::Target::AffineR3: {
      contact::C3Fit fit;
      try {
        fit = contact::curve_c3_from_sl2(curve);
      } catch (const BranchError& e) {
        throw BranchError(std::string("affine export needs the principal branch of the Darboux inverse: ") +
                              e.what() + " (offending value " + std::to_string(e.offending_value()) + ")",
                          e.offending_value());
      }
      info["c3_fit_error"] = fit.fit_error;
      return fronts::improper_affine_front(fit.curve, resolution, singular_tol);
    }
  }
  throw std::logic_error("unknown target");
}

fs::path export_front(const contact::LegendrianCurve& curve, fronts::Target target, fronts::MeshFormat format,
                      int resolution, double singular_tol, const fs::path& dir) {
  json info = {{"resolution", resolution}};
  fronts::FrontMesh mesh = build_front(curve, target, resolution, singular_tol, info);
  fs::path path = dir / ("front_" + fronts::to_string(target) + "." + extension(format));
  fronts::export_mesh(mesh, format, path, info);
  return path;
}

std::vector<Check> curve_checks(const contact::LegendrianCurve& c) {
  std::vector<Check> out;
  contact::ResidualReport r = contact::legendrian_residual(c);
  out.push_back(upper("legendrian_residual", r.anti_diagonal, kResidualLimit));
  out.push_back(upper("contact_form", r.contact_form, kResidualLimit));
  out.push_back(upper("det_drift", contact::det_drift(c), kDetLimit));
  out.push_back(upper("origin_identity", max_abs_entry(c.origin_value() - Mat2::identity()), kOriginLimit));

  double sup = 0.0;
  for (const auto& v : c.values) sup = std::max(sup, matrix_norm(v));
  double reint = std::numeric_limits<double>::quiet_NaN();
  if (std::isfinite(sup)) {
    try {
      contact::LegendrianCurve again = contact::integrate(c.pair, 0.0, c.origin_value(), c.grid);
      reint = 0.0;
      for (std::size_t i = 0; i < c.values.size(); ++i)
        reint = std::max(reint, max_abs_entry(c.values[i] - again.values[i]));
      reint /= std::max(1.0, sup);
    } catch (const Error&) {
    }
  }
  out.push_back(upper("reintegration_agreement", reint, kReintegrationLimit));

  double nu = 0.0;
  try {
    nu = holo::norm_bounds(c.pair, 64).nu;
  } catch (const DegenerateDataError&) {
  }
  out.push_back(lower("immersion", nu, std::numeric_limits<double>::min()));

  // |omega v + conj(theta v)| <= |omega| + |theta| <= sqrt2 |phi|
  double worst = 0.0;
  for (int ir = 0; ir < c.grid.radii; ++ir)
    for (int ia = 0; ia < c.grid.angles; ++ia) {
      Complex z = c.grid.node(ir, ia);
      double ds_big = c.pair.modulus(z);
      for (int k = 0; k < 8; ++k) {
        Complex v = std::polar(1.0, kPi * k / 8.0);
        double ds = std::abs(c.pair.omega(z) * v + std::conj(c.pair.theta(z) * v));
        worst = std::max(worst, ds * ds - 2.0 * ds_big * ds_big);
      }
    }
  out.push_back(upper("metric_estimate", worst, 1e-12));
  return out;
}

std::vector<Check> manifest_checks(const json& m, const fs::path& dir, const std::string& stem) {
  std::vector<Check> out;
  const json& snap = m.at("snapshots");
  if (snap.contains(stem)) {
    bool same = file_digest(dir / snap[stem].at("samples").get<std::string>()) ==
                snap[stem].at("fnv1a64").get<std::string>();
    out.push_back({"snapshot_digest", same ? 0.0 : 1.0, 0.0, same});
  }
  const json& report = m.at("report");
  out.push_back({"construction_completed", report.at("completed").get<bool>() ? 1.0 : 0.0, 1.0,
                 report.at("completed").get<bool>()});
  const json& rounds = report.at("rounds");
  for (std::size_t k = 0; k < rounds.size(); ++k) {
    const json& r = rounds[k];
    std::string pre = "round" + std::to_string(k) + ".";
    double n = r.at("params").at("N").get<double>();
    double eps = r.at("params").at("eps").get<double>();

    bool certs = r.at("completed").get<bool>();
    double cert_margin = std::numeric_limits<double>::infinity();
    double dev = 0.0, c_min = std::numeric_limits<double>::infinity(), origin = 0.0;
    for (const auto& st : r.at("steps")) {
      const json& cert = st.at("certificate");
      certs = certs && cert.at("passed").get<bool>();
      cert_margin = std::min({cert_margin, number(cert.at("margin_a")), number(cert.at("margin_c")),
                              number(cert.at("bump").at("inner")), number(cert.at("bump").at("outer"))});
      dev = std::max(dev, number(st.at("sup_dev_off")));
      c_min = std::min(c_min, number(cert.at("c_empirical")));
      origin = std::max(origin, number(st.at("origin_error")));
    }
    if (r.at("failure_margins").is_object()) {
      const json& fm = r.at("failure_margins");
      cert_margin = std::min({cert_margin, number(fm.at("inner")), number(fm.at("outer"))});
    }
    out.push_back({pre + "runge_certificates", cert_margin, 0.0, certs && cert_margin > 0.0});
    out.push_back(upper(pre + "deviation_off_varpi", dev, eps / (2.0 * n * n)));
    out.push_back(lower(pre + "lower_bound_constant", r.at("steps").empty() ? 0.0 : c_min,
                        std::numeric_limits<double>::min()));
    out.push_back(upper(pre + "step_origins", origin, kOriginLimit));
    // sweep-end margins mean nothing for an aborted sweep
    const double nan = std::numeric_limits<double>::quiet_NaN();
    bool done = r.at("completed").get<bool>();
    out.push_back(lower(pre + "radius_growth", done ? number(r.at("c4_margin")) : nan, 0.0));
    out.push_back(lower(pre + "boundedness", done ? number(r.at("c5_margin")) : nan, 0.0));
    if (k < report.at("main_lemma").size()) {
      const json& ml = report.at("main_lemma")[k];
      out.push_back(lower(pre + "main_lemma_bound", number(ml.at("bound")), 0.0));
      out.push_back(lower(pre + "main_lemma_closeness", number(ml.at("closeness")), 0.0));
    }
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (n < 4) throw UsageError("N must be at least 4");
  if (!(eps > 0.0) || !(eps < 1.0)) throw UsageError("eps must lie in (0, 1)");
  if (!(s > 0.0) || !(s < 1.0 / 3.0)) throw UsageError("s must lie in (0, 1/3)");
  if (rounds < 1) throw UsageError("rounds must be at least 1");
  if (grid_radii < 2 || grid_angles < 4) throw UsageError("grid needs at least 2 radii and 4 angles");
  if (radius_resolution < 8) throw UsageError("radius_resolution must be at least 8");
  if (boundary_samples < 1) throw UsageError("boundary_samples must be positive");
  if (samples_per_region < 1) throw UsageError("samples_per_region must be positive");
  if (boundary_density < 1) throw UsageError("boundary_density must be positive");
  if (degrees.empty()) throw UsageError("degrees must not be empty");
  for (auto d : degrees)
    if (d < 1 || d > degree_cap) throw UsageError("every degree must lie in [1, degree_cap]");
  if (bump != "standard" && bump != "identity") throw UsageError("bump must be 'standard' or 'identity'");
  for (const auto& e : exports) parse_target(e);
  parse_format(format);
  if (mesh_resolution < 2) throw UsageError("mesh_resolution must be at least 2");
  if (!(singular_tol > 0.0)) throw UsageError("singular_tol must be positive");
}

keylemma::IterationParams RunConfig::iteration_params() const {
  keylemma::IterationParams p;
  p.n = n;
  p.eps = eps;
  p.s = s;
  p.grid = contact::PolarGrid(grid_radii, grid_angles);
  p.radius_resolution = radius_resolution;
  p.boundary_samples = boundary_samples;
  p.runge.samples_per_region = samples_per_region;
  p.runge.boundary_density = boundary_density;
  p.runge.degrees = degrees;
  p.runge.degree_cap = degree_cap;
  if (bump == "identity") p.runge.request_override = runge::identity_request(n, eps, 1.0);
  return p;
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kConfigKeys.contains(key)) throw UsageError("unknown config key '" + key + "'");

  RunConfig c;
  if (j.contains("initial")) {
    const json& init = j["initial"];
    if (!init.is_object() || !init.contains("phi1") || !init.contains("phi2") || init.size() != 2)
      throw UsageError("initial must be {\"phi1\": [...], \"phi2\": [...]}");
    c.initial = {parse_function(init["phi1"], "phi1"), parse_function(init["phi2"], "phi2")};
  }
  if (j.contains("N")) c.n = get_as<int>(j, "N");
  if (j.contains("eps")) c.eps = get_as<double>(j, "eps");
  if (j.contains("s")) c.s = get_as<double>(j, "s");
  if (j.contains("rounds")) c.rounds = get_as<int>(j, "rounds");
  if (j.contains("grid_radii")) c.grid_radii = get_as<int>(j, "grid_radii");
  if (j.contains("grid_angles")) c.grid_angles = get_as<int>(j, "grid_angles");
  if (j.contains("radius_resolution")) c.radius_resolution = get_as<int>(j, "radius_resolution");
  if (j.contains("boundary_samples")) c.boundary_samples = get_as<int>(j, "boundary_samples");
  if (j.contains("samples_per_region")) c.samples_per_region = get_as<std::size_t>(j, "samples_per_region");
  if (j.contains("boundary_density")) c.boundary_density = get_as<int>(j, "boundary_density");
  if (j.contains("degrees")) c.degrees = get_as<std::vector<std::size_t>>(j, "degrees");
  if (j.contains("degree_cap")) c.degree_cap = get_as<std::size_t>(j, "degree_cap");
  if (j.contains("bump")) c.bump = get_as<std::string>(j, "bump");
  if (j.contains("exports")) c.exports = get_as<std::vector<std::string>>(j, "exports");
  if (j.contains("format")) c.format = get_as<std::string>(j, "format");
  if (j.contains("mesh_resolution")) c.mesh_resolution = get_as<int>(j, "mesh_resolution");
  if (j.contains("singular_tol")) c.singular_tol = get_as<double>(j, "singular_tol");
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  return {{"initial", c.initial},
          {"N", c.n},
          {"eps", c.eps},
          {"s", c.s},
          {"rounds", c.rounds},
          {"grid_radii", c.grid_radii},
          {"grid_angles", c.grid_angles},
          {"radius_resolution", c.radius_resolution},
          {"boundary_samples", c.boundary_samples},
          {"samples_per_region", c.samples_per_region},
          {"boundary_density", c.boundary_density},
          {"degrees", c.degrees},
          {"degree_cap", c.degree_cap},
          {"bump", c.bump},
          {"exports", c.exports},
          {"format", c.format},
          {"mesh_resolution", c.mesh_resolution},
          {"singular_tol", c.singular_tol}};
}

fronts::Target parse_target(const std::string& s) {
  if (s == "h3") return fronts::Target::H3PoincareBall;
  if (s == "desitter") return fronts::Target::DeSitter;
  if (s == "affine") return fronts::Target::AffineR3;
  throw UsageError("unknown target '" + s + "' (expected h3, desitter or affine)");
}

fronts::MeshFormat parse_format(const std::string& s) {
  if (s == "obj") return fronts::MeshFormat::Obj;
  if (s == "ply") return fronts::MeshFormat::Ply;
  throw UsageError("unknown format '" + s + "' (expected obj or ply)");
}

fs::path snapshot_header(const fs::path& path) {
  fs::path p = path;
  return p.extension() == ".json" ? p : p.replace_extension(".json");
}

fs::path snapshot_samples(const fs::path& path) {
  fs::path p = path;
  return p.replace_extension(".bin");
}

int cmd_construct(const RunConfig& config, const fs::path& out, std::ostream& log) {
  config.validate();
  keylemma::IterationParams params = config.iteration_params();
  try {
    holo::norm_bounds(config.initial, 64);
  } catch (const DegenerateDataError& e) {
    throw UsageError(std::string("initial pair is not an immersion: ") + e.what());
  }
  fs::create_directories(out);

  contact::LegendrianCurve initial = contact::integrate(config.initial, 0.0, Mat2::identity(), params.grid);
  keylemma::Rounds rounds = keylemma::run_rounds(initial, params, config.rounds);
  const keylemma::RoundsReport& rep = rounds.report;

  bool diagnostic = config.bump == "identity";
  bool certs = rep.completed;
  for (const auto& r : rep.rounds)
    for (const auto& st : r.steps) certs = certs && st.certificate.passed();

  json manifest;
  manifest["config"] = to_json(config);
  manifest["report"] = rep;
  if (!rep.completed) {
    const keylemma::IterationReport& last = rep.rounds.back();
    manifest["failure"] = {{"round", rep.rounds.size() - 1},
                           {"step", last.failed_step ? json(*last.failed_step) : json(nullptr)},
                           {"message", last.failure},
                           {"margins", last.failure_margins ? json(*last.failure_margins) : json(nullptr)}};
  }
  write_snapshot(initial, out, "initial", manifest);
  write_snapshot(rounds.final_curve, out, "last", manifest);

  bool exports_ok = true;
  fronts::MeshFormat format = parse_format(config.format);
  for (const auto& name : config.exports) {
    fronts::Target target = parse_target(name);
    try {
      fs::path p = export_front(rounds.final_curve, target, format, config.mesh_resolution, config.singular_tol, out);
      manifest["exports"][name] = {{"file", p.filename().string()}, {"sidecar", p.filename().string() + ".json"}};
    } catch (const Error& e) {
      exports_ok = false;
      manifest["exports"][name] = {{"error", e.what()}};
    }
  }

  std::string status = !rep.completed  ? "certificate_failure"
                       : !exports_ok   ? "export_failure"
                       : diagnostic    ? "diagnostic"
                       : certs         ? "ok"
                                       : "certificate_failure";
  manifest["status"] = status;
  write_json(manifest, out / "manifest.json");

  std::size_t steps = 0;
  for (const auto& r : rep.rounds) steps += r.steps.size();
  log << "construct: " << steps << " step(s) over " << rep.rounds.size() << " round(s), status " << status << '\n';
  if (!rep.completed) log << "  " << rep.rounds.back().failure << '\n';
  return status == "ok" ? kExitOk : kExitFailure;
}

json verify_report(const fs::path& snapshot) {
  fs::path header = snapshot_header(snapshot);
  if (!fs::exists(header)) throw UsageError("no snapshot at " + header.string());
  contact::LegendrianCurve curve = contact::read_curve(header, snapshot_samples(snapshot));
  std::vector<Check> checks = curve_checks(curve);

  fs::path manifest = header.parent_path() / "manifest.json";
  if (fs::exists(manifest)) {
    json m = read_json(manifest);
    try {
      auto more = manifest_checks(m, header.parent_path(), header.stem().string());
      checks.insert(checks.end(), more.begin(), more.end());
    } catch (const json::exception& e) {
      throw FormatError(std::string("manifest.json: ") + e.what());
    }
  }

  json j;
  j["snapshot"] = header.stem().string();
  j["checks"] = json::array();
  bool all = true;
  for (const auto& c : checks) {
    j["checks"].push_back(to_json(c));
    all = all && c.passed;
  }
  j["passed"] = all;
  return j;
}

int cmd_verify(const fs::path& snapshot, std::ostream& out) {
  json r = verify_report(snapshot);
  out << r.dump(2) << '\n';
  return r.at("passed").get<bool>() ? kExitOk : kExitFailure;
}

int cmd_export(const fs::path& snapshot, fronts::Target target, fronts::MeshFormat format, int resolution,
               const fs::path& out, std::ostream& log) {
  if (resolution < 2) throw UsageError("resolution must be at least 2");
  if (!fs::exists(snapshot_header(snapshot))) throw UsageError("no snapshot at " + snapshot_header(snapshot).string());
  contact::LegendrianCurve curve = contact::read_curve(snapshot_header(snapshot), snapshot_samples(snapshot));
  fs::create_directories(out);
  fs::path p = export_front(curve, target, format, resolution, fronts::kSingularTol, out);
  log << "export: wrote " << p.string() << '\n';
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Bounded Legendrian curves in SL(2,C) and their fronts"};
  app.require_subcommand(1);

  std::string config_path, out_dir, format, target, snapshot;
  int resolution = 0;

  auto* construct = app.add_subcommand("construct", "run the labyrinth sweep and write a manifest");
  construct->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  construct->add_option("--out", out_dir, "output directory")->required();
  construct->add_option("--resolution", resolution, "mesh resolution for exports");
  construct->add_option("--format", format, "mesh format")->check(CLI::IsMember({"obj", "ply"}));

  auto* verify = app.add_subcommand("verify", "check the invariants of a curve snapshot");
  verify->add_option("snapshot", snapshot, "snapshot header, samples or stem")->required();
  verify->add_option("--out", out_dir, "also write the report to this file");

  auto* exp = app.add_subcommand("export", "write a front mesh from a curve snapshot");
  exp->add_option("snapshot", snapshot, "snapshot header, samples or stem")->required();
  exp->add_option("--target", target, "h3, desitter or affine")
      ->required()
      ->check(CLI::IsMember({"h3", "desitter", "affine"}));
  exp->add_option("--format", format, "mesh format")->check(CLI::IsMember({"obj", "ply"}));
  exp->add_option("--resolution", resolution, "mesh resolution");
  exp->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*construct) {
      RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
      if (resolution) c.mesh_resolution = resolution;
      if (!format.empty()) c.format = format;
      c.validate();
      return cmd_construct(c, out_dir, std::cerr);
    }
    if (*verify) {
      if (out_dir.empty()) return cmd_verify(snapshot, std::cout);
      std::ostringstream s;
      int code = cmd_verify(snapshot, s);
      std::cout << s.str();
      std::ofstream f(out_dir);
      if (!f) throw std::runtime_error("cannot write " + out_dir);
      f << s.str();
      return code;
    }
    return cmd_export(snapshot, parse_target(target), parse_format(format.empty() ? "ply" : format),
                      resolution ? resolution : 33, out_dir, std::cerr);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace legendrian::cli
