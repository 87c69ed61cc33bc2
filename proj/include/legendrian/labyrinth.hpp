#pragma once

// Nadirashvili's labyrinth on the unit disk, parameterised by an integer N:
// circles S_k of radius r_k = 1 - k/N^3 (k = 0..2N^2), rays at angles
// m*pi/N, the annulus 1 - 2/N <= |z| < 1, the corridor set Omega and the
// compacts omega_j subset varpi_j (j = 1..2N).
//
// Rings: ring i is r_{i+1} <= |z| < r_i (i = 0..2N^2-1). Even rings form A,
// odd rings form A~. Rays with even m form L, odd m form L~. The barrier set
// is Sigma = (A n L) u (A~ n L~) u S, so every ring is cut into N arcs of
// angular width 2pi/N, each centred on a ray that crosses it freely. The
// components of Omega = annulus \ U_delta(Sigma), delta = 1/(4N^3), are
// therefore annular arcs, and omega_j collects the spine
// l_{j pi/N} n annulus together with the arcs centred on that ray.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "legendrian/mat2.hpp"

namespace legendrian::labyrinth {

struct RegionTag {
  bool inner_disk = false;   // |z| < 1 - 2/N
  bool annulus = false;      // 1 - 2/N <= |z| < 1
  bool sigma_band = false;   // dist(z, Sigma) < delta
  bool omega_set = false;    // z in Omega
  std::optional<int> omega;  // j with z in omega_j (the omega_j are disjoint)
  std::vector<int> varpi;    // every j with z in varpi_j, ascending
  bool in_a = false;
  bool in_a_tilde = false;
  bool on_l_ray = false;        // z lies on a ray of L (full ray, not only A n L)
  bool on_l_tilde_ray = false;  // z lies on a ray of L~

  bool in_omega(int j) const { return omega && *omega == j; }
  bool in_varpi(int j) const;
};

class LabyrinthSpec {
 public:
  // Throws std::invalid_argument for N < 4.
  explicit LabyrinthSpec(int n);

  int n() const { return n_; }
  int last_circle() const { return 2 * n_ * n_; }
  int ray_count() const { return 2 * n_; }
  double radius(int k) const;
  double band_halfwidth() const { return delta_; }
  double inner_annulus_radius() const { return 1.0 - 2.0 / n_; }
  double ray_angle(int j) const { return kPi * j / n_; }
  Complex base_point(int j) const;

  // Euclidean distance from z to Sigma.
  double distance_to_sigma(Complex z) const;
  // Euclidean distance from z to omega_j; exact whenever it is below the ring
  // width 1/N^3, an upper bound otherwise.
  double distance_to_omega(int j, Complex z) const;
  RegionTag classify(Complex z) const;

  // Ring index of |z| clamped to [0, 2N^2 - 1].
  int ring_of(double r) const;
  // Parity of the rings whose arcs belong to omega_j.
  int omega_ring_parity(int j) const;

 private:
  double ray_union_distance(int m, Complex z) const;
  double arc_component_distance(int ring, Complex w) const;
  void check_index(int j) const;

  int n_;
  double n3_;
  double delta_;
};

double radius(int n, int k);
Complex base_point(const LabyrinthSpec& spec, int j);
RegionTag classify(const LabyrinthSpec& spec, Complex z);

enum class RegionKind {
  InnerDisk,
  Annulus,
  SigmaBand,
  OmegaSet,
  OmegaJ,
  VarpiJ,
  OutsideVarpiJ,  // closed disk minus varpi_j
};

struct Region {
  RegionKind kind = RegionKind::InnerDisk;
  int j = 0;  // used by the *J kinds

  bool contains(const RegionTag& tag, Complex z) const;
};

// Deterministic Halton points of the region. OmegaJ samples also place every
// 16th point on the spine, which has zero area. Throws std::runtime_error if
// the region is empty at sampling resolution.
std::vector<Complex> sample_region(const LabyrinthSpec& spec, Region region, std::size_t count);

struct BoundaryPoint {
  Complex point;
  Complex normal;  // unit outward normal of omega_j
};

// Points on the boundary of omega_j (arc edges, straight edges and both sides
// of the spine) spaced at most `spacing` apart, with outward normals.
std::vector<BoundaryPoint> omega_boundary(const LabyrinthSpec& spec, int j, double spacing);

// Grayscale raster of [-1,1]^2, one byte per cell:
// 0 outside the disk, 40 inner disk, 80 annulus, 120 Sigma band,
// 160 varpi_j \ omega_j, 200 omega_j with j odd, 240 omega_j with j even.
void write_pgm(const LabyrinthSpec& spec, int resolution, std::ostream& out);

}  // namespace legendrian::labyrinth
