#pragma once

// The modification step on one compact omega_j: rotate the pair so that both
// components stay away from zero on varpi_j, then multiply the second one by
// a zero-free bump h = exp(g) that is about 2N^4 on omega_j and about 1 off
// varpi_j, and rotate back.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "legendrian/errors.hpp"
#include "legendrian/holo.hpp"
#include "legendrian/labyrinth.hpp"

namespace legendrian::runge {

// |h - inner_target| < inner_tol on omega_j, |h - outer_target| < outer_tol
// off varpi_j.
struct BumpRequest {
  double inner_target = 1.0;
  double inner_tol = 1.0;
  double outer_target = 1.0;
  double outer_tol = 1.0;
};

// Targets 2N^4 and 1 with tolerances 1/(2N^2) and eps/(2N^2 m).
BumpRequest standard_request(int n, double eps, double m);
// h = 1 everywhere: a diagnostic request that leaves the pair unchanged.
BumpRequest identity_request(int n, double eps, double m);

struct BumpMargins {
  double inner = -std::numeric_limits<double>::infinity();  // inner_tol - sup |h - inner_target|
  double outer = -std::numeric_limits<double>::infinity();  // outer_tol - sup |h - outer_target|
  std::size_t degree = 0;
  // sup |g - log target| per region: finite even when exp(g) overflows
  double log_inner_dev = std::numeric_limits<double>::infinity();
  double log_outer_dev = std::numeric_limits<double>::infinity();
  double tail_bound = 0.0;    // of the power series of exp(g)
  std::size_t samples = 0;    // points examined for the reported margins
  bool certified() const { return inner > 0.0 && outer > 0.0; }
};

class CertificationError : public Error {
 public:
  CertificationError(const std::string& what, BumpMargins best) : Error(what), best_(best) {}
  const BumpMargins& best() const { return best_; }

 private:
  BumpMargins best_;
};

struct Bump {
  holo::HoloFunction g;
  holo::HoloFunction h;
  BumpMargins margins;
};

struct RungeOptions {
  std::size_t samples_per_region = 100000;
  // points per band half-width 1/(4N^3) along region boundaries
  int boundary_density = 16;
  std::vector<std::size_t> degrees = {64, 128, 256, 512};
  std::size_t degree_cap = holo::kDefaultDegreeCap;
  int norm_grid = 64;
  // Replaces standard_request; used for diagnostics only.
  std::optional<BumpRequest> request_override;
};

// Certification and measurement points for one j.
struct RegionSamples {
  std::vector<Complex> omega;    // omega_j: edges, spine, interior
  std::vector<Complex> varpi;    // varpi_j
  std::vector<Complex> outside;  // closed disk minus varpi_j, dense along its edge
};

// Builds and caches sample sets and fitted exponents. The labyrinth is
// invariant under rotation by 2 pi/N, so everything is computed for j = 1
// and j = 2 and rotated into place.
class RungeContext {
 public:
  RungeContext(const labyrinth::LabyrinthSpec& spec, RungeOptions options = {});

  const labyrinth::LabyrinthSpec& spec() const { return spec_; }
  const RungeOptions& options() const { return options_; }
  RegionSamples samples(int j);
  // Throws CertificationError with the best margins when no degree certifies.
  Bump build_bump(int j, const BumpRequest& request);

 private:
  struct Fitted {
    holo::HoloFunction g;
    BumpMargins margins;
  };
  const RegionSamples& reference_samples(int parity);
  Fitted fit(int parity, const BumpRequest& request);

  labyrinth::LabyrinthSpec spec_;
  RungeOptions options_;
  std::map<int, RegionSamples> samples_;
  std::map<std::tuple<int, double, double, double, double>, Fitted> fits_;
};

// One-off bump for omega_j with the standard request.
Bump build_bump(const labyrinth::LabyrinthSpec& spec, int j, double eps, double m, const RungeOptions& options = {});

// t with sin t <= sqrt(2/N) such that both rotated components stay at least
// nu/(2 sqrt N) on the varpi_j samples. Throws CertificationError otherwise.
double choose_rotation(const holo::HoloPair& pair, const labyrinth::LabyrinthSpec& spec, int j,
                       const holo::NormBounds& bounds, const std::vector<Complex>& varpi_samples);

struct RungeCertificate {
  int j = 0;
  double t = 0.0;
  double u1 = 1.0, u2 = 0.0;
  double sup_dev_off = 0.0;   // sup off varpi_j of |phi~ - phi|
  double min_on_omega = 0.0;  // min on omega_j of |phi~|
  double min_on_varpi = 0.0;  // min on varpi_j of |phi~|
  double c_empirical = 0.0;   // min(min_on_omega / N^3.5, min_on_varpi N^0.5)
  double orthogonality = 0.0; // max coefficient of u . (phi - phi~)
  double nu_after = 0.0;
  double margin_a = 0.0;      // eps/(2N^2) - sup_dev_off
  double margin_c = 0.0;      // |u1| - (1 - 2/N)
  BumpMargins bump;
  BumpRequest request;
  holo::HoloFunction h;

  bool passed() const;
};

struct Modified {
  holo::HoloPair pair;
  RungeCertificate certificate;
};

Modified modify_pair(const holo::HoloPair& pair, RungeContext& context, int j, double eps);

void to_json(nlohmann::json& j, const BumpRequest& r);
void to_json(nlohmann::json& j, const BumpMargins& m);
void to_json(nlohmann::json& j, const RungeCertificate& c);

}  // namespace legendrian::runge
