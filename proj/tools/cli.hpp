#pragma once

// Batch front end: run configuration, and the construct / verify / export
// commands. Exit codes: 0 ok, 1 certificate or invariant failure, 2 usage or
// input error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "legendrian/fronts.hpp"
#include "legendrian/holo.hpp"
#include "legendrian/keylemma.hpp"

namespace legendrian::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  holo::HoloPair initial{holo::HoloFunction::constant(1.0), holo::HoloFunction({0.0, 0.5})};
  int n = 10;
  double eps = 0.05;
  double s = 0.2;
  int rounds = 1;
  int grid_radii = 33;
  int grid_angles = 128;
  int radius_resolution = 96;
  int boundary_samples = 64;
  std::size_t samples_per_region = 100000;
  int boundary_density = 16;
  std::vector<std::size_t> degrees = {64, 128, 256, 512};
  std::size_t degree_cap = holo::kDefaultDegreeCap;
  // "standard", or "identity" for the diagnostic h = 1 bump
  std::string bump = "standard";
  std::vector<std::string> exports;  // subset of h3, desitter, affine
  std::string format = "ply";
  int mesh_resolution = 33;
  double singular_tol = fronts::kSingularTol;

  // Throws UsageError.
  void validate() const;
  keylemma::IterationParams iteration_params() const;
};

// Unknown keys and malformed values throw UsageError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

fronts::Target parse_target(const std::string& s);
fronts::MeshFormat parse_format(const std::string& s);

// Snapshot `<stem>.json` + `<stem>.bin`; `path` may name either file or the stem.
std::filesystem::path snapshot_header(const std::filesystem::path& path);
std::filesystem::path snapshot_samples(const std::filesystem::path& path);

// Writes manifest.json, initial and last curve snapshots and the requested
// meshes into `out`.
int cmd_construct(const RunConfig& config, const std::filesystem::path& out, std::ostream& log);

// Invariant report for a snapshot; reads manifest.json beside it when present.
nlohmann::json verify_report(const std::filesystem::path& snapshot);
int cmd_verify(const std::filesystem::path& snapshot, std::ostream& out);

int cmd_export(const std::filesystem::path& snapshot, fronts::Target target, fronts::MeshFormat format,
               int resolution, const std::filesystem::path& out, std::ostream& log);

// Parses argv with CLI11 and dispatches.
int run(int argc, char** argv);

}  // namespace legendrian::cli
