#pragma once

// Legendrian curves in SL(2,C): integration of X' = X M_phi on a polar grid,
// the contact residuals in SL(2,C) and C^3, and the Darboux map between them.
//
// Convention: a curve X is Legendrian when X^{-1}X' is anti-diagonal. The
// form x11 dx22 - x12 dx21 vanishes on X^T exactly when this holds, since
// (x11 dx22 - x12 dx21)(X^T) = [X^{-1} dX]_22 for det X = 1. Accordingly a
// C^3 curve (G, F, H) with dH + F dG = 0 lifts to darboux_map(G, F, H)^T.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "legendrian/holo.hpp"
#include "legendrian/mat2.hpp"

namespace legendrian::contact {

using SL2Value = Mat2;

inline constexpr double kDetTol = 1e-9;
inline constexpr double kIntegrationTol = 1e-12;
inline constexpr double kDarbouxGuard = 300.0;

// Nodes r_i e^{i theta_k}, r_i = i/(radii-1), theta_k = 2 pi k/angles,
// stored row-major over (radius index, angle index).
struct PolarGrid {
  int radii = 33;
  int angles = 128;

  PolarGrid() = default;
  PolarGrid(int r, int a);
  std::size_t size() const { return static_cast<std::size_t>(radii) * angles; }
  std::size_t index(int ir, int ia) const { return static_cast<std::size_t>(ir) * angles + ia; }
  double radius(int ir) const { return static_cast<double>(ir) / (radii - 1); }
  double angle(int ia) const { return 2.0 * kPi * ia / angles; }
  Complex node(int ir, int ia) const { return std::polar(radius(ir), angle(ia)); }
};

struct IntegrationOptions {
  double tol = kIntegrationTol;
  // every `check_stride`-th spoke is re-integrated at tol/100 for the error
  int check_stride = 8;
  std::size_t max_steps = 2000000;
};

struct LegendrianCurve {
  holo::HoloPair pair;
  Complex base_point = 0.0;
  SL2Value base_value = SL2Value::identity();
  PolarGrid grid;
  std::vector<SL2Value> values;
  double integration_error = 0.0;

  const SL2Value& at(int ir, int ia) const { return values[grid.index(ir, ia)]; }
  SL2Value origin_value() const { return values.front(); }
  // X at an arbitrary point of the closed disk, integrated from the origin.
  SL2Value value_at(Complex z) const;
  // Analytic derivative X' = X M_phi at node (ir, ia).
  SL2Value derivative_at(int ir, int ia) const;
};

// Solves X' = X M_phi along the straight segment from `from` (where X = x0)
// to `to`.
SL2Value integrate_segment(const holo::HoloPair& pair, Complex from, Complex to, const SL2Value& x0,
                           double tol = kIntegrationTol, std::size_t max_steps = 2000000);

// Integrates from the base point to the origin, then along every spoke.
LegendrianCurve integrate(const holo::HoloPair& pair, Complex base_point, const SL2Value& base_value,
                          const PolarGrid& grid, const IntegrationOptions& options = {});

struct ResidualReport {
  double anti_diagonal = 0.0;      // sup |diag part of X^{-1}X'| (Frobenius)
  double contact_form = 0.0;       // sup |(x11 dx22 - x12 dx21)(X^T)|
  double finite_difference = 0.0;  // anti_diagonal with X' from radial central differences
};

// X' taken analytically as X M_phi; the finite-difference variant is the
// independent cross-check.
ResidualReport legendrian_residual(const LegendrianCurve& curve);
// Residuals of arbitrary samples and their derivatives.
ResidualReport legendrian_residual(std::span<const SL2Value> values, std::span<const SL2Value> derivatives);

double det_drift(const LegendrianCurve& curve);

struct C3Point {
  Complex x, y, z;
};

// The paper's coordinates (x1, x2, x3) are (G, F, H).
struct C3Curve {
  holo::HoloFunction F, G, H;

  C3Point at(Complex z) const { return {G(z), F(z), H(z)}; }
};

// sup over the grid of |H' + F G'|.
double contact_pullback_c3(const C3Curve& curve, const PolarGrid& grid = {});

// [[e^{-z}, x e^{-z}], [y e^{z}, e^{z}(1 + xy)]]. Throws std::overflow_error
// for |Re z| > 300.
SL2Value darboux_map(const C3Point& p);
// Principal-branch inverse. BranchError when m11 is zero or on the closed
// negative real axis; ConsistencyError when m22 disagrees by 1e-9 or more.
C3Point darboux_inverse(const SL2Value& a);
// Legendrian SL(2,C) value over a point of a Legendrian C^3 curve.
SL2Value lift_from_c3(const C3Point& p);

struct C3Fit {
  C3Curve curve;
  double fit_error = 0.0;  // sup over grid nodes of the refit deviation
};

// darboux_inverse of X^T at every node, refit to polynomials by a discrete
// Fourier fit on the boundary circle and checked on the whole grid.
C3Fit curve_c3_from_sl2(const LegendrianCurve& curve, std::size_t degree_cap = holo::kDefaultDegreeCap);

// (|phi1|^2 + |phi2|^2)^{1/2}: the conformal factor of the induced metric.
double induced_metric_density(const holo::HoloPair& pair, Complex z);

// JSON header plus little-endian float64 samples, 8 reals per node.
void write_curve(const LegendrianCurve& curve, const std::filesystem::path& header,
                 const std::filesystem::path& samples);
LegendrianCurve read_curve(const std::filesystem::path& header, const std::filesystem::path& samples);

}  // namespace legendrian::contact

namespace legendrian {

// Four [re, im] pairs in the order m11, m12, m21, m22.
void to_json(nlohmann::json& j, const Mat2& m);
void from_json(const nlohmann::json& j, Mat2& m);

}  // namespace legendrian
