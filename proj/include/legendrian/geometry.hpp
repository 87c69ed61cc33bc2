#pragma once

// Hyperbolic 3-space as Hermitian matrices of determinant one, and distances
// of conformal metrics lambda^2 |dz|^2 on the closed unit disk.
//
// Hermitian [[h11, h12], [conj h12, h22]] <-> Minkowski point with
// x0 = (h11 + h22)/2, x3 = (h11 - h22)/2, x1 = Re h12, x2 = Im h12,
// so that det h = x0^2 - x1^2 - x2^2 - x3^2.

#include <array>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "legendrian/contact.hpp"
#include "legendrian/holo.hpp"
#include "legendrian/mat2.hpp"

namespace legendrian::geometry {

struct MinkowskiPoint {
  double x0 = 1.0, x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

// Signature (-, +, +, +).
double minkowski_inner(const MinkowskiPoint& p, const MinkowskiPoint& q);
MinkowskiPoint from_hermitian(const Mat2& h);
Mat2 to_hermitian(const MinkowskiPoint& p);

// a a^* read as a Minkowski point.
MinkowskiPoint h3_point(const Mat2& a);
// arccosh(-<p, q>), evaluated as 2 asinh(|p - q|/2) for nearby points. The
// arccosh argument is clamped up to 1 when it falls short by at most 1e-9;
// std::domain_error when it falls short by more.
double h3_distance(const MinkowskiPoint& p, const MinkowskiPoint& q);
// (x1, x2, x3)/(1 + x0).
std::array<double, 3> poincare_ball(const MinkowskiPoint& p);

// |omega + conj(theta)|, the length density of the flat front's metric.
double front_metric_density(const holo::HoloPair& pair, Complex z);

using Density = std::function<double(Complex)>;

// Shortest-path distances on the Cartesian grid x, y = -1 + i h, h = 2/R,
// restricted to the closed disk, plus nodes on the unit circle. Edges join
// nodes along the 32 primitive directions (a, b) with max(|a|, |b|) <= 3 and
// cost the trapezoidal lambda-integral along the edge.
class DistanceField {
 public:
  int resolution() const { return resolution_; }
  Complex source() const { return source_; }
  double spacing() const { return 2.0 / resolution_; }
  // Grid value at node (i, k); NaN outside the disk.
  double node(int i, int k) const { return grid_[static_cast<std::size_t>(k) * (resolution_ + 1) + i]; }
  std::span<const double> grid() const { return grid_; }
  std::span<const Complex> boundary_points() const { return boundary_points_; }
  std::span<const double> boundary_values() const { return boundary_values_; }
  double boundary_min() const;
  // Bilinear where the surrounding cell lies in the disk, nearest node
  // otherwise; capped by lambda(source) |z - source| so the source reads 0.
  double at(Complex z) const;

  friend DistanceField geodesic_distance_field(const Density& density, Complex source, int resolution);

 private:
  double interpolate(Complex z) const;

  int resolution_ = 0;
  Complex source_;
  double source_density_ = 0.0;
  std::vector<double> grid_;
  std::vector<Complex> boundary_points_;
  std::vector<double> boundary_values_;
};

// Throws std::invalid_argument for resolution < 8 or a source outside the
// disk, and std::runtime_error when lambda is not positive and finite.
DistanceField geodesic_distance_field(const Density& density, Complex source, int resolution);

// Relative overestimate bound of straight-line distances caused by the
// stencil's finite set of directions: 1/cos(half the widest angular gap) - 1.
double stencil_bias();

struct RadiusEstimate {
  double value = 0.0;   // min over the unit circle at the requested resolution
  double coarse = 0.0;  // same at half resolution
  double error = 0.0;   // |value - coarse| + stencil_bias() * value
};

RadiusEstimate intrinsic_radius_estimate(const Density& density, int resolution);
// Intrinsic radius of the metric induced by the curve's holomorphic data.
RadiusEstimate intrinsic_radius_estimate(const contact::LegendrianCurve& curve, int resolution);
double intrinsic_radius(const contact::LegendrianCurve& curve, int resolution);

// Sum over consecutive points of (lambda(a) + lambda(b))/2 |b - a|.
double path_length(const Density& density, std::span<const Complex> path);

struct CirclePoint {
  Complex point;
  bool reached = false;  // false: the ray met the unit circle first
};

// Along `count` rays from the field's source, the first point where the
// field reaches `radius` (linear interpolation along the ray).
std::vector<CirclePoint> geodesic_circle(const DistanceField& field, double radius, int count);

// JSON header plus little-endian float64 grid, row-major over (y, x).
void write_field(const DistanceField& field, double error, const std::filesystem::path& header,
                 const std::filesystem::path& samples);

}  // namespace legendrian::geometry
