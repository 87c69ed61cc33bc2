#include "legendrian/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>

#include <json.hpp>

namespace legendrian::geometry {

namespace {

constexpr double kArccoshSlack = 1e-9;
constexpr int kReach = 3;

struct Step {
  int a, b;
};

std::vector<Step> stencil() {
  std::vector<Step> s;
  for (int a = -kReach; a <= kReach; ++a)
    for (int b = -kReach; b <= kReach; ++b)
      if ((a != 0 || b != 0) && std::gcd(a, b) == 1) s.push_back({a, b});
  return s;
}

void put_le(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

}  // namespace

double minkowski_inner(const MinkowskiPoint& p, const MinkowskiPoint& q) {
  return -p.x0 * q.x0 + p.x1 * q.x1 + p.x2 * q.x2 + p.x3 * q.x3;
}

MinkowskiPoint from_hermitian(const Mat2& h) {
  double h11 = h.m11.real(), h22 = h.m22.real();
  return {(h11 + h22) / 2.0, h.m12.real(), h.m12.imag(), (h11 - h22) / 2.0};
}

Mat2 to_hermitian(const MinkowskiPoint& p) {
  return {p.x0 + p.x3, Complex(p.x1, p.x2), Complex(p.x1, -p.x2), p.x0 - p.x3};
}

MinkowskiPoint h3_point(const Mat2& a) { return from_hermitian(a * a.adjoint()); }

double h3_distance(const MinkowskiPoint& p, const MinkowskiPoint& q) {
  double c = -minkowski_inner(p, q);
  if (c < 1.0) {
    if (c < 1.0 - kArccoshSlack) throw std::domain_error("h3_distance: points not on the hyperboloid");
    c = 1.0;
  }
  // The chord form 2 asinh(|p - q|/2) keeps precision for nearby points,
  // where arccosh loses half the digits.
  MinkowskiPoint d{p.x0 - q.x0, p.x1 - q.x1, p.x2 - q.x2, p.x3 - q.x3};
  double chord = minkowski_inner(d, d);
  if (c < 2.0) return 2.0 * std::asinh(std::sqrt(std::max(chord, 0.0)) / 2.0);
  return std::acosh(c);
}

std::array<double, 3> poincare_ball(const MinkowskiPoint& p) {
  double d = 1.0 + p.x0;
  return {p.x1 / d, p.x2 / d, p.x3 / d};
}

double front_metric_density(const holo::HoloPair& pair, Complex z) {
  return std::abs(pair.omega(z) + std::conj(pair.theta(z)));
}

DistanceField geodesic_distance_field(const Density& density, Complex source, int resolution) {
  if (resolution < 8) throw std::invalid_argument("distance field resolution must be at least 8");
  if (std::abs(source) > 1.0 + 1e-12) throw std::invalid_argument("source outside the closed disk");
  const int n = resolution + 1;
  const double h = 2.0 / resolution;
  auto pos = [&](int i, int k) { return Complex(-1.0 + i * h, -1.0 + k * h); };
  auto inside = [&](int i, int k) { return i >= 0 && k >= 0 && i < n && k < n && std::abs(pos(i, k)) <= 1.0 + 1e-12; };

  const std::size_t grid_nodes = static_cast<std::size_t>(n) * n;
  int boundary = std::max(64, static_cast<int>(std::ceil(kPi * resolution)));
  std::vector<Complex> where(grid_nodes + boundary + 1);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) where[static_cast<std::size_t>(k) * n + i] = pos(i, k);
  for (int b = 0; b < boundary; ++b) where[grid_nodes + b] = std::polar(1.0, 2.0 * kPi * b / boundary);
  const std::size_t source_node = grid_nodes + boundary;
  where[source_node] = source;

  std::vector<double> lambda(where.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t v = 0; v < where.size(); ++v) {
    if (v < grid_nodes && !inside(static_cast<int>(v % n), static_cast<int>(v / n))) continue;
    double l = density(where[v]);
    if (!(l > 0.0) || !std::isfinite(l)) throw std::runtime_error("density must be positive and finite");
    lambda[v] = l;
  }

  // Extra edges for the off-grid nodes (unit circle and source): every inside
  // grid node within kReach cells, plus neighbours along the circle.
  std::vector<std::vector<std::size_t>> extra(where.size());
  auto link_to_grid = [&](std::size_t v) {
    Complex z = where[v];
    int ci = static_cast<int>(std::lround((z.real() + 1.0) / h));
    int ck = static_cast<int>(std::lround((z.imag() + 1.0) / h));
    for (int k = ck - kReach; k <= ck + kReach; ++k)
      for (int i = ci - kReach; i <= ci + kReach; ++i) {
        if (!inside(i, k)) continue;
        std::size_t g = static_cast<std::size_t>(k) * n + i;
        if (std::abs(where[g] - z) > kReach * h || g == v) continue;
        extra[v].push_back(g);
        extra[g].push_back(v);
      }
  };
  for (int b = 0; b < boundary; ++b) {
    std::size_t v = grid_nodes + b;
    link_to_grid(v);
    std::size_t next = grid_nodes + (b + 1) % boundary;
    extra[v].push_back(next);
    extra[next].push_back(v);
  }
  link_to_grid(source_node);

  const auto steps = stencil();
  std::vector<double> dist(where.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source_node] = 0.0;
  queue.push({0.0, source_node});
  auto relax = [&](std::size_t u, std::size_t w) {
    double d = dist[u] + 0.5 * (lambda[u] + lambda[w]) * std::abs(where[u] - where[w]);
    if (d < dist[w]) {
      dist[w] = d;
      queue.push({d, w});
    }
  };
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u < grid_nodes) {
      int i = static_cast<int>(u % n), k = static_cast<int>(u / n);
      for (const Step& s : steps)
        if (inside(i + s.a, k + s.b)) relax(u, static_cast<std::size_t>(k + s.b) * n + (i + s.a));
    }
    for (std::size_t w : extra[u]) relax(u, w);
  }

  DistanceField field;
  field.resolution_ = resolution;
  field.source_ = source;
  field.source_density_ = lambda[source_node];
  field.grid_.assign(grid_nodes, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t g = 0; g < grid_nodes; ++g)
    if (!std::isnan(lambda[g])) {
      if (!std::isfinite(dist[g])) throw std::runtime_error("disconnected distance grid");
      field.grid_[g] = dist[g];
    }
  field.boundary_points_.assign(where.begin() + grid_nodes, where.begin() + grid_nodes + boundary);
  field.boundary_values_.assign(dist.begin() + grid_nodes, dist.begin() + grid_nodes + boundary);
  return field;
}

double DistanceField::boundary_min() const {
  return *std::min_element(boundary_values_.begin(), boundary_values_.end());
}

double DistanceField::at(Complex z) const {
  return std::min(interpolate(z), source_density_ * std::abs(z - source_));
}

double DistanceField::interpolate(Complex z) const {
  const int n = resolution_ + 1;
  const double h = spacing();
  double fx = (z.real() + 1.0) / h, fy = (z.imag() + 1.0) / h;
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
  int k = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
  double tx = fx - i, ty = fy - k;
  double v00 = node(i, k), v10 = node(i + 1, k), v01 = node(i, k + 1), v11 = node(i + 1, k + 1);
  if (!std::isnan(v00) && !std::isnan(v10) && !std::isnan(v01) && !std::isnan(v11))
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 + (1 - tx) * ty * v01 + tx * ty * v11;
  double best = std::numeric_limits<double>::infinity(), value = 0.0;
  auto consider = [&](Complex p, double v) {
    double d = std::abs(p - z);
    if (!std::isnan(v) && d < best) {
      best = d;
      value = v;
    }
  };
  for (int dk = 0; dk <= 1; ++dk)
    for (int di = 0; di <= 1; ++di) consider(Complex(-1.0 + (i + di) * h, -1.0 + (k + dk) * h), node(i + di, k + dk));
  std::size_t b = boundary_points_.size();
  double a = std::arg(z);
  long nearest = std::lround(a / (2.0 * kPi) * static_cast<double>(b));
  for (long off = -1; off <= 1; ++off) {
    std::size_t idx = static_cast<std::size_t>(((nearest + off) % static_cast<long>(b) + static_cast<long>(b)) %
                                               static_cast<long>(b));
    consider(boundary_points_[idx], boundary_values_[idx]);
  }
  return value;
}

double stencil_bias() {
  std::vector<double> angles;
  for (const Step& s : stencil())
    if (s.a > 0 && s.b >= 0 && s.b <= s.a) angles.push_back(std::atan2(s.b, s.a));
  std::sort(angles.begin(), angles.end());
  double gap = 0.0;
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return 1.0 / std::cos(gap / 2.0) - 1.0;
}

RadiusEstimate intrinsic_radius_estimate(const Density& density, int resolution) {
  RadiusEstimate r;
  r.value = geodesic_distance_field(density, 0.0, resolution).boundary_min();
  r.coarse = geodesic_distance_field(density, 0.0, std::max(8, resolution / 2)).boundary_min();
  r.error = std::abs(r.value - r.coarse) + stencil_bias() * r.value;
  return r;
}

RadiusEstimate intrinsic_radius_estimate(const contact::LegendrianCurve& curve, int resolution) {
  const holo::HoloPair& pair = curve.pair;
  return intrinsic_radius_estimate([&](Complex z) { return contact::induced_metric_density(pair, z); }, resolution);
}

double intrinsic_radius(const contact::LegendrianCurve& curve, int resolution) {
  const holo::HoloPair& pair = curve.pair;
  return geodesic_distance_field([&](Complex z) { return contact::induced_metric_density(pair, z); }, 0.0,
                                 resolution)
      .boundary_min();
}

double path_length(const Density& density, std::span<const Complex> path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i)
    len += 0.5 * (density(path[i - 1]) + density(path[i])) * std::abs(path[i] - path[i - 1]);
  return len;
}

std::vector<CirclePoint> geodesic_circle(const DistanceField& field, double radius, int count) {
  std::vector<CirclePoint> out;
  double dr = field.spacing() / 4.0;
  Complex s = field.source();
  for (int c = 0; c < count; ++c) {
    Complex dir = std::polar(1.0, 2.0 * kPi * c / count);
    // distance from the source to the unit circle along dir
    double b = std::real(s * std::conj(dir));
    double reach = -b + std::sqrt(b * b + 1.0 - std::norm(s));
    CirclePoint p{s + reach * dir, false};
    double prev_t = 0.0, prev_v = 0.0;
    int samples = static_cast<int>(std::ceil(reach / dr));
    for (int k = 1; k <= samples; ++k) {
      double t = std::min(k * dr, reach);
      double v = field.at(s + t * dir);
      if (v >= radius) {
        double f = (radius - prev_v) / (v - prev_v);
        p = {s + (prev_t + f * (t - prev_t)) * dir, true};
        break;
      }
      prev_t = t;
      prev_v = v;
    }
    out.push_back(p);
  }
  return out;
}

void write_field(const DistanceField& field, double error, const std::filesystem::path& header,
                 const std::filesystem::path& samples) {
  nlohmann::json h;
  h["resolution"] = field.resolution();
  h["spacing"] = field.spacing();
  h["source"] = {field.source().real(), field.source().imag()};
  h["error"] = error;
  h["samples"] = {{"file", samples.filename().string()},
                  {"encoding", "float64 little-endian"},
                  {"layout", "row-major (y, x), x = y = -1 + i*spacing, NaN outside the disk"}};
  std::ofstream hj(header);
  if (!hj) throw std::runtime_error("cannot open " + header.string());
  hj << h.dump(2) << '\n';
  std::ofstream bin(samples, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + samples.string());
  for (double v : field.grid()) put_le(bin, v);
}

}  // namespace legendrian::geometry
