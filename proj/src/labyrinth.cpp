#include "legendrian/labyrinth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace legendrian::labyrinth {

namespace {

constexpr double kOnRayTol = 1e-14;

double halton(std::size_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

int wrap_ray(long m, int count) { return static_cast<int>(((m % count) + count) % count); }

}  // namespace

bool RegionTag::in_varpi(int j) const {
  return std::binary_search(varpi.begin(), varpi.end(), j);
}

LabyrinthSpec::LabyrinthSpec(int n) : n_(n) {
  if (n < 4) throw std::invalid_argument("labyrinth needs N >= 4");
  n3_ = static_cast<double>(n) * n * n;
  delta_ = 1.0 / (4.0 * n3_);
}

double LabyrinthSpec::radius(int k) const {
  if (k < 0 || k > last_circle()) throw std::out_of_range("circle index out of range");
  return 1.0 - k / n3_;
}

void LabyrinthSpec::check_index(int j) const {
  if (j < 1 || j > ray_count()) throw std::out_of_range("ray index must lie in 1..2N");
}

Complex LabyrinthSpec::base_point(int j) const {
  check_index(j);
  double rho = 1.0 - 2.0 / n_ - 4.0 / n3_;
  return std::polar(rho, ray_angle(j));
}

int LabyrinthSpec::ring_of(double r) const {
  int i = static_cast<int>(std::floor((1.0 - r) * n3_));
  // floor can be one off next to a circle; settle against r_{i+1} <= r < r_i
  if (i > 0 && r >= 1.0 - i / n3_) --i;
  if (r < 1.0 - (i + 1) / n3_) ++i;
  return std::clamp(i, 0, last_circle() - 1);
}

int LabyrinthSpec::omega_ring_parity(int j) const { return (j + 1) % 2; }

double LabyrinthSpec::ray_union_distance(int m, Complex z) const {
  // Ray m carries Sigma on the rings of parity m mod 2.
  int parity = wrap_ray(m, 2);
  Complex w = z * std::polar(1.0, -kPi * m / n_);
  double t = w.real();
  double tc = std::clamp(t, 1.0 - last_circle() / n3_, 1.0);
  int i = ring_of(tc);
  double best;
  if (i % 2 == parity) {
    best = tc;
  } else {
    double upper = 1.0 - i / n3_;        // shared with ring i - 1
    double lower = 1.0 - (i + 1) / n3_;  // shared with ring i + 1
    bool has_upper = i - 1 >= 0;
    bool has_lower = i + 1 <= last_circle() - 1;
    if (has_upper && (!has_lower || std::abs(t - upper) <= std::abs(t - lower)))
      best = upper;
    else
      best = lower;
  }
  return std::abs(w - Complex(best, 0.0));
}

double LabyrinthSpec::distance_to_sigma(Complex z) const {
  double r = std::abs(z);
  int k = static_cast<int>(std::lround((1.0 - r) * n3_));
  k = std::clamp(k, 0, last_circle());
  double d = std::abs(r - (1.0 - k / n3_));
  if (r > 0.0) {
    long m0 = std::lround(std::arg(z) / (kPi / n_));
    for (long m = m0 - 2; m <= m0 + 2; ++m) d = std::min(d, ray_union_distance(static_cast<int>(m), z));
  }
  return d;
}

// Distance from w, in the frame where the arc's central ray is the positive
// real axis, to the arc component of the given ring.
double LabyrinthSpec::arc_component_distance(int ring, Complex w) const {
  double a = 1.0 - (ring + 1) / n3_ + delta_;
  double b = 1.0 - ring / n3_ - delta_;
  double h = kPi / n_;
  Complex ul = w * std::polar(1.0, h);   // cutting ray at -h moved to angle 0
  Complex ur = w * std::polar(1.0, -h);  // cutting ray at +h moved to angle 0
  double r = std::abs(w);
  if (r >= a && r <= b && ul.imag() >= delta_ && ur.imag() <= -delta_ && w.real() > 0.0) return 0.0;

  double beta = std::arg(w);
  double d = std::numeric_limits<double>::infinity();
  for (double rad : {a, b}) {
    double open = std::asin(delta_ / rad);
    double lo = -h + open;
    double hi = h - open;
    if (beta >= lo && beta <= hi)
      d = std::min(d, std::abs(r - rad));
    else
      d = std::min({d, std::abs(w - std::polar(rad, lo)), std::abs(w - std::polar(rad, hi))});
  }
  double xa = std::sqrt(a * a - delta_ * delta_);
  double xb = std::sqrt(b * b - delta_ * delta_);
  d = std::min(d, std::abs(ul - Complex(std::clamp(ul.real(), xa, xb), delta_)));
  d = std::min(d, std::abs(ur - Complex(std::clamp(ur.real(), xa, xb), -delta_)));
  return d;
}

double LabyrinthSpec::distance_to_omega(int j, Complex z) const {
  check_index(j);
  Complex w = z * std::polar(1.0, -ray_angle(j));
  double d = std::abs(w - Complex(std::clamp(w.real(), inner_annulus_radius(), 1.0), 0.0));
  int parity = omega_ring_parity(j);
  int i = ring_of(std::abs(z));
  for (int ring = i - 1; ring <= i + 1; ++ring) {
    if (ring < 0 || ring > last_circle() - 1 || ring % 2 != parity) continue;
    d = std::min(d, arc_component_distance(ring, w));
  }
  return d;
}

RegionTag LabyrinthSpec::classify(Complex z) const {
  RegionTag tag;
  double r = std::abs(z);
  double inner = inner_annulus_radius();
  tag.inner_disk = r < inner;
  tag.annulus = r >= inner && r < 1.0;
  tag.sigma_band = distance_to_sigma(z) < delta_;
  tag.omega_set = tag.annulus && !tag.sigma_band;
  int ring = ring_of(r);
  if (tag.annulus) {
    tag.in_a = ring % 2 == 0;
    tag.in_a_tilde = !tag.in_a;
  }
  double step = kPi / n_;
  long m0 = r > 0.0 ? std::lround(std::arg(z) / step) : 0;
  int nearest = wrap_ray(m0, ray_count());
  int nearest_j = nearest == 0 ? ray_count() : nearest;
  Complex w = z * std::polar(1.0, -ray_angle(nearest_j));
  bool on_ray = r > 0.0 && w.real() > 0.0 && std::abs(w.imag()) <= kOnRayTol * std::max(1.0, r);
  if (on_ray) {
    tag.on_l_ray = nearest % 2 == 0;
    tag.on_l_tilde_ray = !tag.on_l_ray;
  }
  if (tag.omega_set) {
    // arcs of ring i are centred on the rays whose parity differs from i
    long centre = m0;
    if (wrap_ray(m0, 2) == ring % 2) centre = std::arg(z) >= m0 * step ? m0 + 1 : m0 - 1;
    int mm = wrap_ray(centre, ray_count());
    tag.omega = mm == 0 ? ray_count() : mm;
  } else if (tag.annulus && on_ray) {
    tag.omega = nearest_j;
  }

  for (long m = m0 - 2; m <= m0 + 2; ++m) {
    int mm = wrap_ray(m, ray_count());
    int j = mm == 0 ? ray_count() : mm;
    if (std::find(tag.varpi.begin(), tag.varpi.end(), j) != tag.varpi.end()) continue;
    if (distance_to_omega(j, z) < delta_) tag.varpi.push_back(j);
  }
  std::sort(tag.varpi.begin(), tag.varpi.end());
  return tag;
}

double radius(int n, int k) { return LabyrinthSpec(n).radius(k); }
Complex base_point(const LabyrinthSpec& spec, int j) { return spec.base_point(j); }
RegionTag classify(const LabyrinthSpec& spec, Complex z) { return spec.classify(z); }

bool Region::contains(const RegionTag& tag, Complex z) const {
  switch (kind) {
    case RegionKind::InnerDisk: return tag.inner_disk;
    case RegionKind::Annulus: return tag.annulus;
    case RegionKind::SigmaBand: return tag.sigma_band && std::abs(z) <= 1.0;
    case RegionKind::OmegaSet: return tag.omega_set;
    case RegionKind::OmegaJ: return tag.in_omega(j);
    case RegionKind::VarpiJ: return tag.in_varpi(j) && std::abs(z) <= 1.0;
    case RegionKind::OutsideVarpiJ: return !tag.in_varpi(j) && std::abs(z) <= 1.0;
  }
  return false;
}

std::vector<Complex> sample_region(const LabyrinthSpec& spec, Region region, std::size_t count) {
  std::vector<Complex> out;
  if (count == 0) return out;
  out.reserve(count);
  double inner = spec.inner_annulus_radius();
  double delta = spec.band_halfwidth();
  double r0 = 0.0, r1 = 1.0, theta0 = -kPi, theta1 = kPi;
  bool indexed = region.kind == RegionKind::OmegaJ || region.kind == RegionKind::VarpiJ ||
                 region.kind == RegionKind::OutsideVarpiJ;
  if (indexed && (region.j < 1 || region.j > spec.ray_count()))
    throw std::out_of_range("ray index must lie in 1..2N");
  switch (region.kind) {
    case RegionKind::InnerDisk: r1 = inner; break;
    case RegionKind::Annulus:
    case RegionKind::OmegaSet: r0 = inner; break;
    case RegionKind::SigmaBand: r0 = inner - delta; break;
    case RegionKind::OmegaJ:
    case RegionKind::VarpiJ: {
      r0 = inner - delta;
      double a = spec.ray_angle(region.j);
      theta0 = a - kPi / spec.n();
      theta1 = a + kPi / spec.n();
      break;
    }
    case RegionKind::OutsideVarpiJ: break;
  }
  if (region.kind == RegionKind::OmegaJ) {
    std::size_t spine = std::max<std::size_t>(1, count / 16);
    double a = spec.ray_angle(region.j);
    for (std::size_t k = 0; k < spine; ++k) out.push_back(std::polar(inner + (1.0 - inner) * halton(k + 1, 5), a));
  }
  std::size_t limit = 20000 * count + 1000000;
  for (std::size_t idx = 1; out.size() < count; ++idx) {
    if (idx > limit) throw std::runtime_error("region appears empty at sampling resolution");
    double u = halton(idx, 2);
    double v = halton(idx, 3);
    double r = std::sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0));
    Complex z = std::polar(r, theta0 + v * (theta1 - theta0));
    if (region.contains(spec.classify(z), z)) out.push_back(z);
  }
  return out;
}

std::vector<BoundaryPoint> omega_boundary(const LabyrinthSpec& spec, int j, double spacing) {
  if (!(spacing > 0.0)) throw std::invalid_argument("spacing must be positive");
  if (j < 1 || j > spec.ray_count()) throw std::out_of_range("ray index must lie in 1..2N");
  std::vector<BoundaryPoint> out;
  double n3 = static_cast<double>(spec.n()) * spec.n() * spec.n();
  double delta = spec.band_halfwidth();
  double h = kPi / spec.n();
  Complex rot = std::polar(1.0, spec.ray_angle(j));
  auto emit = [&](Complex p, Complex nrm) { out.push_back({p * rot, nrm * rot}); };
  auto pieces = [&](double len) { return std::max(1, static_cast<int>(std::ceil(len / spacing))); };
  Complex left = std::polar(1.0, -h), right = std::polar(1.0, h);

  for (int ring = spec.omega_ring_parity(j); ring < spec.last_circle(); ring += 2) {
    double a = 1.0 - (ring + 1) / n3 + delta;
    double b = 1.0 - ring / n3 - delta;
    for (double rad : {a, b}) {
      double open = std::asin(delta / rad);
      double lo = -h + open, hi = h - open;
      int count = pieces(rad * (hi - lo));
      for (int k = 0; k <= count; ++k) {
        Complex dir = std::polar(1.0, lo + (hi - lo) * k / count);
        emit(rad * dir, rad == a ? -dir : dir);
      }
    }
    double xa = std::sqrt(a * a - delta * delta), xb = std::sqrt(b * b - delta * delta);
    int count = pieces(xb - xa);
    for (int k = 1; k < count; ++k) {
      double x = xa + (xb - xa) * k / count;
      emit(Complex(x, delta) * left, Complex(0.0, -1.0) * left);
      emit(Complex(x, -delta) * right, Complex(0.0, 1.0) * right);
    }
  }
  double inner = spec.inner_annulus_radius();
  int count = pieces(1.0 - inner);
  for (int k = 0; k <= count; ++k) {
    double x = inner + (1.0 - inner) * k / count;
    emit(Complex(x, 0.0), Complex(0.0, 1.0));
    emit(Complex(x, 0.0), Complex(0.0, -1.0));
  }
  emit(Complex(inner, 0.0), Complex(-1.0, 0.0));
  return out;
}

void write_pgm(const LabyrinthSpec& spec, int resolution, std::ostream& out) {
  if (resolution < 2) throw std::invalid_argument("resolution must be at least 2");
  out << "P5\n" << resolution << ' ' << resolution << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(resolution));
  for (int y = 0; y < resolution; ++y) {
    for (int x = 0; x < resolution; ++x) {
      Complex z(-1.0 + 2.0 * (x + 0.5) / resolution, 1.0 - 2.0 * (y + 0.5) / resolution);
      unsigned char v = 0;
      if (std::abs(z) <= 1.0) {
        RegionTag tag = spec.classify(z);
        if (tag.omega)
          v = *tag.omega % 2 ? 200 : 240;
        else if (!tag.varpi.empty())
          v = 160;
        else if (tag.sigma_band)
          v = 120;
        else if (tag.annulus)
          v = 80;
        else
          v = 40;
      }
      row[static_cast<std::size_t>(x)] = v;
    }
    out.write(reinterpret_cast<const char*>(row.data()), resolution);
  }
}

}  // namespace legendrian::labyrinth
