#pragma once

// The inductive construction L_0 -> L_1 -> ... -> L_2N on the labyrinth,
// its gauge normalisation, and the measured versions of the estimates that
// the construction is supposed to satisfy.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "legendrian/contact.hpp"
#include "legendrian/geometry.hpp"
#include "legendrian/labyrinth.hpp"
#include "legendrian/runge.hpp"

namespace legendrian::keylemma {

struct IterationParams {
  int n = 10;
  double eps = 0.05;
  double s = 0.2;
  // Intrinsic radius assumed for L_0; measured when not positive.
  double rho0 = 0.0;
  // Bound on |X| for the main lemma; taken as sup |L_0| when not > sqrt2.
  double tau = 0.0;
  contact::PolarGrid grid;
  int radius_resolution = 96;
  int boundary_samples = 64;
  runge::RungeOptions runge;

  // Throws std::invalid_argument unless eps > 0, 0 < s < 1/3 and n >= 4.
  void validate() const;
};

struct GaugeRotation {
  double t = 0.0;
  Mat2 a = Mat2::identity();  // diag(e^{it}, e^{-it})
};

// E_0 = L(zeta)^{-1} L: same data, identity at zeta.
contact::LegendrianCurve normalize_at(const contact::LegendrianCurve& curve, Complex zeta);

// t = -arg(f12)/2, so that a f a^* has a real non-negative off-diagonal.
// std::invalid_argument unless f is Hermitian with det 1 and positive trace.
GaugeRotation diagonal_gauge(const Mat2& f);
Mat2 conjugate(const GaugeRotation& g, const Mat2& x);  // a x a^*

// Holomorphic data of a x a^* when x has data phi: phi rotated by -2t.
holo::HoloPair gauge_data(const holo::HoloPair& pair, double t);

struct StepRecord {
  int j = 0;
  Complex zeta;
  double gauge_t = 0.0;
  double gauge_unitarity = 0.0;     // |a a^* - id|
  double gauge_off_diagonal = 0.0;  // |Im| of the conjugated off-diagonal
  double data_relation = 0.0;       // sup |E^{-1}E' - M_phi| at grid nodes
  runge::RungeCertificate certificate;
  double sup_dev_off = 0.0;         // sup off varpi_j of |phi_j - phi_{j-1}|
  double min_on_omega = 0.0;        // min |phi_j| on omega_j
  double min_on_varpi = 0.0;        // min |phi_j| on varpi_j
  double origin_error = 0.0;        // |L_j(0) - id|
  contact::ResidualReport residual;
  double det_drift = 0.0;
  double dual_route = 0.0;          // sup |L_j - direct integration from 0|
  double integration_error = 0.0;
  double sup_norm = 0.0;            // max over grid of |L_j|
  geometry::RadiusEstimate radius;
};

// One bound of the extrinsic estimates with its measured left-hand side and
// the constant that makes it tight.
struct Estimate {
  double measured = 0.0;
  double constant = 0.0;
  std::size_t points = 0;
};

struct StepEstimates {
  int j = 0;
  Estimate safe;             // dist(l_j, l_{j-1}) off varpi_j vs c eps/(2N^2)
  Estimate s_est;            // dist(p^, p) vs s + c/sqrt N
  Estimate boundary;         // dist(zeta_j, p) vs s + c/sqrt N
  Estimate lemma_1a;         // |L_{j-1}(zeta_j)|^2 vs max|L_0|^2 (1 + c/N)
  Estimate lemma_1b;         // dist(l_{j-1}(zeta_j), l_j(zeta_j)) vs c/N^2
  Estimate lemma_2;          // dist(o, q) vs 2s + c/sqrt N
  Estimate lemma_3;          // dist(q, f~(p)) vs 14 s^2 + c/sqrt N
  std::size_t circle_points = 0;
  std::size_t circle_in_varpi = 0;
};

class SweepContext {
 public:
  explicit SweepContext(const IterationParams& params);
  const IterationParams& params() const { return params_; }
  const labyrinth::LabyrinthSpec& spec() const { return spec_; }
  runge::RungeContext& runge() { return runge_; }

 private:
  IterationParams params_;
  labyrinth::LabyrinthSpec spec_;
  runge::RungeContext runge_;
};

struct Step {
  contact::LegendrianCurve curve;
  StepRecord record;
};

// Builds L_j from L_{j-1}; prev must satisfy prev(0) = id.
Step step(const contact::LegendrianCurve& prev, int j, SweepContext& context);

StepEstimates verify_step_estimates(const contact::LegendrianCurve& prev, const contact::LegendrianCurve& next,
                                    int j, SweepContext& context, double max_l0);

struct IterationReport {
  IterationParams params;
  bool diagnostic = false;  // the bump request was overridden
  bool completed = false;
  std::optional<int> failed_step;
  std::string failure;
  std::optional<runge::BumpMargins> failure_margins;
  double initial_radius = 0.0;
  double initial_radius_error = 0.0;
  double max_l0 = 0.0;
  std::vector<StepRecord> steps;
  std::vector<StepEstimates> estimates;
  double final_radius = 0.0;
  double final_radius_error = 0.0;
  double c4_margin = 0.0;   // final radius - (rho0 + s) + error
  double sup_final = 0.0;   // over the geodesic disc of radius rho0 + s
  double b_empirical = 0.0;
  double c_empirical = 0.0;
  double c5_margin = 0.0;   // bound with b_empirical - sup_final
};

struct Sweep {
  std::vector<contact::LegendrianCurve> curves;  // L_0 .. last completed
  IterationReport report;
};

// Runs step for j = 1..2N. A failing step ends the sweep; the report then
// holds everything measured up to that point.
Sweep sweep(const contact::LegendrianCurve& initial, const IterationParams& params);

struct MainLemmaMargins {
  double origin = 0.0;        // |Y(0) - id|
  double radius = 0.0;        // radius(Y) - radius(X) - s
  double radius_error = 0.0;  // distance solver error of the two radii
  double bound = 0.0;         // tau sqrt(1 + 32 s^2 + eps) - sup |Y|
  double closeness = 0.0;     // eps - sup over D_{1-eps} of max(|Y-X|, |phi_Y - phi_X|)
};

MainLemmaMargins verify_main_lemma(const contact::LegendrianCurve& x, const contact::LegendrianCurve& y,
                                   const IterationParams& params);

struct RoundsReport {
  std::vector<IterationReport> rounds;
  std::vector<MainLemmaMargins> main_lemma;
  std::vector<double> cauchy;   // sup over D_{1-eps_k} of |L^(k+1) - L^(k)|
  std::vector<double> tau;      // composed bound after each round
  std::vector<double> sup_norm; // measured sup |L^(k)|
  bool completed = false;
};

struct Rounds {
  contact::LegendrianCurve final_curve;
  RoundsReport report;
};

// Main-lemma rounds with eps_k = eps/2^k and s_k = s/2^k.
Rounds run_rounds(const contact::LegendrianCurve& initial, const IterationParams& params, int rounds);

void to_json(nlohmann::json& j, const IterationParams& p);
void to_json(nlohmann::json& j, const StepRecord& r);
void to_json(nlohmann::json& j, const Estimate& e);
void to_json(nlohmann::json& j, const StepEstimates& e);
void to_json(nlohmann::json& j, const IterationReport& r);
void to_json(nlohmann::json& j, const MainLemmaMargins& m);
void to_json(nlohmann::json& j, const RoundsReport& r);

}  // namespace legendrian::keylemma
