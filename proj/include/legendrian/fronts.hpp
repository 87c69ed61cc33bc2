#pragma once

// Fronts built from a Legendrian curve: flat fronts in H^3 (Poincare ball)
// and de Sitter space, improper affine fronts from the C^3 picture, their
// singular sets, and OBJ / PLY export.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "legendrian/contact.hpp"
#include "legendrian/holo.hpp"

namespace legendrian::fronts {

inline constexpr double kSingularTol = 1e-3;
inline constexpr double kModelTol = 1e-8;

enum class Target { H3PoincareBall, DeSitter, AffineR3 };

std::string to_string(Target t);

struct FrontStats {
  double det_error = 0.0;        // max |det - 1| (H^3) or |det + 1| (de Sitter)
  double min_trace = 0.0;        // H^3 only
  double minkowski_error = 0.0;  // max |<x, x> - 1| (de Sitter)
  double max_ball_radius = 0.0;  // H^3 only
  double form_agreement = 0.0;   // affine only: the two height formulas
  double singular_fraction = 0.0;
};

struct FrontMesh {
  Target target = Target::H3PoincareBall;
  std::vector<std::array<double, 3>> vertices;
  std::vector<double> x0;  // de Sitter: the coordinate dropped for viewing
  std::vector<std::array<std::int32_t, 3>> triangles;
  std::vector<std::uint8_t> singular;
  FrontStats stats;

  // Throws std::invalid_argument on out-of-range indices or size mismatches.
  void validate() const;
};

// Vertices on the polar grid with `resolution` radii and 4 * resolution
// angles, L re-integrated from the origin. Singular where ||rho| - 1| < tol.
// ModelViolationError when det or trace leave the model by more than 1e-8
// (relative to |L|^2).
FrontMesh flat_front_h3(const contact::LegendrianCurve& curve, int resolution, double singular_tol = kSingularTol);
// L e3 L^*, viewed through (x1, x2, x3) with x0 kept per vertex.
FrontMesh flat_front_desitter(const contact::LegendrianCurve& curve, int resolution,
                              double singular_tol = kSingularTol);
// (G + conj F, (|G|^2 - |F|^2)/2 + Re(GF + 2H)). std::invalid_argument when
// the curve is not Legendrian to `residual_tol`. Singular where
// ||G'/F'| - 1| < tol; never where F' vanishes.
FrontMesh improper_affine_front(const contact::C3Curve& c3, int resolution, double singular_tol = kSingularTol,
                                double residual_tol = 1e-8);

// Height of the front written with the primitive of F dG vanishing at 0:
// (|G|^2 - |F|^2)/2 + Re(GF - 2 int_0^z F dG). Equals the H form minus
// 2 Re H(0).
double affine_height_integral_form(const contact::C3Curve& c3, Complex z);
double affine_height(const contact::C3Curve& c3, Complex z);

// (|F'|^2 + |G'|^2)^{1/2}
double affine_metric_density(const contact::C3Curve& c3, Complex z);
// Induced metric |dF|^2 + (1 + |F|^2)|dG|^2 of the C^3 curve, as a density.
double c3_metric_density(const contact::C3Curve& c3, Complex z);

struct Segment {
  Complex a, b;
};

struct SingularSet {
  int resolution = 0;
  // Cartesian grid over [-1, 1]^2, row-major over (y, x); NaN outside the
  // disk. (|theta| - |omega|)/(|theta| + |omega|): same sign as |rho| - 1,
  // finite at zeros of omega.
  std::vector<double> level;
  std::vector<Segment> contour;
  double fraction = 0.0;  // of in-disk nodes with ||rho| - 1| < tol
};

SingularSet singular_set(const holo::HoloPair& pair, int resolution, double tol = kSingularTol);

enum class MeshFormat { Obj, Ply };

void write_obj(const FrontMesh& mesh, std::ostream& out);
void write_ply(const FrontMesh& mesh, std::ostream& out);
FrontMesh read_ply(std::istream& in);
// Mesh plus a JSON sidecar `<path>.json` with the invariant statistics.
void export_mesh(const FrontMesh& mesh, MeshFormat format, const std::filesystem::path& path,
                 const nlohmann::json& extra = {});

void to_json(nlohmann::json& j, const FrontStats& s);

}  // namespace legendrian::fronts
