#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "legendrian/labyrinth.hpp"

using namespace legendrian;
using namespace legendrian::labyrinth;

namespace {

double segment_distance(Complex p, Complex a, Complex b) {
  Complex d = b - a;
  double t = std::clamp(std::real((p - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

// Brute-force distance to Sigma straight from the set definitions: every
// circle, and every ray piece lying in a ring of the ray's parity.
double oracle_sigma_distance(int n, Complex z) {
  double n3 = double(n) * n * n;
  int circles = 2 * n * n;
  double d = 1e9;
  for (int k = 0; k <= circles; ++k) d = std::min(d, std::abs(std::abs(z) - (1.0 - k / n3)));
  for (int m = 0; m < 2 * n; ++m) {
    Complex dir = std::polar(1.0, kPi * m / n);
    for (int i = m % 2; i < circles; i += 2)
      d = std::min(d, segment_distance(z, (1.0 - (i + 1) / n3) * dir, (1.0 - i / n3) * dir));
  }
  return d;
}

// Raster of a window of the annulus at spacing 1/(16 N^3): Omega cells,
// their 4-connected components, and the components a ray passes through.
struct RasterOracle {
  int n;
  double h, x0, y0;
  int nx, ny;
  std::vector<int> comp;           // -1 outside Omega
  std::vector<int> owner;          // ray index j per component, 0 if none
  std::vector<double> band_dist;   // oracle distance to Sigma

  RasterOracle(int n_, double xmin, double xmax, double ymin, double ymax) : n(n_) {
    double n3 = double(n) * n * n;
    h = 1.0 / (16.0 * n3);
    x0 = xmin;
    y0 = ymin;
    nx = int((xmax - xmin) / h);
    ny = int((ymax - ymin) / h);
    comp.assign(std::size_t(nx) * ny, -1);
    band_dist.assign(comp.size(), 0.0);
    double inner = 1.0 - 2.0 / n, delta = 1.0 / (4.0 * n3);
    std::vector<char> omega(comp.size(), 0);
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        Complex c = centre(x, y);
        double r = std::abs(c);
        if (r < inner - 2 * h || r > 1.0 + 2 * h) {
          band_dist[idx(x, y)] = 1.0;
          continue;
        }
        double d = oracle_sigma_distance(n, c);
        band_dist[idx(x, y)] = d;
        omega[idx(x, y)] = r >= inner && r < 1.0 && d >= delta;
      }
    int next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < comp.size(); ++s) {
      if (!omega[s] || comp[s] >= 0) continue;
      comp[s] = next;
      stack.push_back(s);
      while (!stack.empty()) {
        std::size_t q = stack.back();
        stack.pop_back();
        int qx = int(q % nx), qy = int(q / nx);
        const int off[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (auto& o : off) {
          int ax = qx + o[0], ay = qy + o[1];
          if (ax < 0 || ay < 0 || ax >= nx || ay >= ny) continue;
          std::size_t a = idx(ax, ay);
          if (omega[a] && comp[a] < 0) {
            comp[a] = next;
            stack.push_back(a);
          }
        }
      }
      ++next;
    }
    owner.assign(std::size_t(next), 0);
    for (int j = 1; j <= 2 * n; ++j) {
      Complex dir = std::polar(1.0, kPi * j / n);
      for (double r = inner; r < 1.0; r += h / 4) {
        auto cell = cell_of(r * dir);
        if (cell && comp[*cell] >= 0) owner[std::size_t(comp[*cell])] = j;
      }
    }
  }
  std::size_t idx(int x, int y) const { return std::size_t(y) * nx + x; }
  Complex centre(int x, int y) const { return {x0 + (x + 0.5) * h, y0 + (y + 0.5) * h}; }
  std::optional<std::size_t> cell_of(Complex z) const {
    int x = int(std::floor((z.real() - x0) / h)), y = int(std::floor((z.imag() - y0) / h));
    if (x < 0 || y < 0 || x >= nx || y >= ny) return std::nullopt;
    return idx(x, y);
  }
};

}  // namespace

TEST(Labyrinth, RadiusExamples) {
  EXPECT_EQ(radius(10, 0), 1.0);
  EXPECT_NEAR(radius(10, 2), 0.998, 1e-15);
  EXPECT_NEAR(radius(10, 200), 0.8, 1e-15);
  EXPECT_THROW(radius(10, 201), std::out_of_range);
  EXPECT_THROW(radius(10, -1), std::out_of_range);
  EXPECT_THROW(LabyrinthSpec(3), std::invalid_argument);
}

TEST(Labyrinth, RadiiStrictlyDecrease) {
  for (int n : {4, 7, 10, 16}) {
    LabyrinthSpec s(n);
    for (int k = 0; k < s.last_circle(); ++k) EXPECT_GT(s.radius(k), s.radius(k + 1));
    EXPECT_NEAR(s.radius(s.last_circle()), 1.0 - 2.0 / n, 1e-15);
  }
}

TEST(Labyrinth, BasePointExamples) {
  LabyrinthSpec s(10);
  EXPECT_NEAR(std::abs(base_point(s, 10) - Complex(-0.796, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(base_point(s, 20) - Complex(0.796, 0.0)), 0.0, 1e-15);
  for (int j = 1; j <= 20; ++j) EXPECT_LT(std::abs(base_point(s, j)), s.inner_annulus_radius());
  EXPECT_THROW(base_point(s, 0), std::out_of_range);
  EXPECT_THROW(base_point(s, 21), std::out_of_range);
}

TEST(Labyrinth, ClassifyExamples) {
  LabyrinthSpec s(10);
  RegionTag origin = classify(s, 0.0);
  EXPECT_TRUE(origin.inner_disk);
  EXPECT_FALSE(origin.annulus || origin.sigma_band || origin.omega_set || origin.omega || origin.in_a ||
               origin.in_a_tilde || !origin.varpi.empty());
  RegionTag edge = classify(s, 1.0);
  EXPECT_TRUE(edge.sigma_band);
  EXPECT_FALSE(edge.annulus);
  RegionTag p = classify(s, std::polar(0.9, kPi / 10));
  EXPECT_TRUE(p.in_omega(1));
  EXPECT_TRUE(p.in_varpi(1));
}

TEST(Labyrinth, ExamplePointLiesOnTheSpine) {
  // 0.9 = r_100 sits on a circle of Sigma; membership in omega_1 comes from
  // the spine, the piece of the ray through the annulus.
  Complex z = std::polar(0.9, kPi / 10);
  EXPECT_LT(oracle_sigma_distance(10, z), 1e-15);
  LabyrinthSpec s(10);
  for (double r = 0.8 + 1e-12; r < 1.0; r += 1.0 / 64000) {
    RegionTag t = s.classify(std::polar(r, kPi / 10));
    EXPECT_TRUE(t.in_omega(1)) << r;
    EXPECT_TRUE(t.on_l_tilde_ray);
  }
}

TEST(Labyrinth, SigmaDistanceMatchesBruteForce) {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n : {4, 5, 8}) {
    LabyrinthSpec s(n);
    for (int i = 0; i < 2000; ++i) {
      Complex z = std::polar(std::sqrt(u(gen)), 2 * kPi * u(gen));
      EXPECT_NEAR(s.distance_to_sigma(z), oracle_sigma_distance(n, z), 1e-13) << z;
    }
  }
}

TEST(Labyrinth, ClassifyAgreesWithRasterOracle) {
  const int n = 4;
  LabyrinthSpec s(n);
  RasterOracle oracle(n, -0.05, 1.0, -0.05, 1.0);
  double delta = s.band_halfwidth();
  std::mt19937 gen(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0, omega_checked = 0, varpi_checked = 0;
  for (int i = 0; i < 10000; ++i) {
    double r = 0.48 + 0.53 * u(gen);
    Complex z = std::polar(r, kPi / 2 * u(gen));
    if (std::abs(z) > 1.0) continue;
    auto cell = oracle.cell_of(z);
    ASSERT_TRUE(cell);
    RegionTag tag = s.classify(z);
    double d = oracle_sigma_distance(n, z);
    EXPECT_EQ(tag.sigma_band, d < delta);
    ++checked;
    // away from every band edge the raster labels are unambiguous
    if (std::abs(d - delta) < 2 * oracle.h || std::abs(std::abs(z) - s.inner_annulus_radius()) < 2 * oracle.h)
      continue;
    int c = oracle.comp[*cell];
    EXPECT_EQ(tag.omega_set, c >= 0) << z;
    if (c >= 0) {
      int j = oracle.owner[std::size_t(c)];
      ASSERT_TRUE(tag.omega) << z;
      EXPECT_EQ(*tag.omega, j) << z;
      ++omega_checked;
    }
    // varpi_j: distance to omega_j cells
    int reach = int((delta + 3 * oracle.h) / oracle.h) + 1;
    int cx = int(*cell % oracle.nx), cy = int(*cell / oracle.nx);
    for (int j : {1, 2}) {
      double best = 1e9;
      for (int y = std::max(0, cy - reach); y <= std::min(oracle.ny - 1, cy + reach); ++y)
        for (int x = std::max(0, cx - reach); x <= std::min(oracle.nx - 1, cx + reach); ++x) {
          int cc = oracle.comp[oracle.idx(x, y)];
          if (cc >= 0 && oracle.owner[std::size_t(cc)] == j) best = std::min(best, std::abs(z - oracle.centre(x, y)));
        }
      Complex dir = std::polar(1.0, kPi * j / n);
      best = std::min(best, segment_distance(z, s.inner_annulus_radius() * dir, dir));
      if (std::abs(best - delta) < 2 * oracle.h) continue;
      EXPECT_EQ(tag.in_varpi(j), best < delta) << z << " j=" << j;
      ++varpi_checked;
    }
  }
  EXPECT_GT(checked, 9000);
  EXPECT_GT(omega_checked, 500);
  EXPECT_GT(varpi_checked, 5000);
}

TEST(Labyrinth, OmegaSetsAreDisjointOnAFineGrid) {
  LabyrinthSpec s(6);
  double h = 1.0 / (16.0 * 216.0);
  for (double x = 0.6; x < 1.0; x += h) {
    for (double y : {0.0, 0.1, 0.25, 0.4}) {
      Complex z(x, y);
      if (std::abs(z) >= 1.0) continue;
      RegionTag t = s.classify(z);
      int owners = 0;
      for (int j = 1; j <= 12; ++j) owners += s.distance_to_omega(j, z) == 0.0;
      if (t.omega_set) EXPECT_EQ(owners, 1) << z;
      if (t.omega) EXPECT_TRUE(t.in_varpi(*t.omega));
    }
  }
}

TEST(Labyrinth, SampleRegionExamples) {
  LabyrinthSpec s(10);
  auto inner = sample_region(s, {RegionKind::InnerDisk}, 1);
  ASSERT_EQ(inner.size(), 1u);
  EXPECT_LT(std::abs(inner[0]), 0.8);
  auto om = sample_region(s, {RegionKind::OmegaJ, 1}, 100);
  ASSERT_EQ(om.size(), 100u);
  for (Complex z : om) EXPECT_TRUE(s.classify(z).in_omega(1)) << z;
  EXPECT_EQ(sample_region(s, {RegionKind::OmegaJ, 1}, 100), om);
}

TEST(Labyrinth, SampledOmegaCoveredByVarpi) {
  LabyrinthSpec s(8);
  for (int j = 1; j <= 16; ++j) {
    for (Complex z : sample_region(s, {RegionKind::OmegaJ, j}, 200)) {
      RegionTag t = s.classify(z);
      EXPECT_TRUE(t.in_varpi(j));
      EXPECT_TRUE(t.annulus);
    }
  }
}

TEST(Labyrinth, SampledOmegaKeepsClearOfSigma) {
  LabyrinthSpec s(8);
  double delta = s.band_halfwidth();
  for (Complex z : sample_region(s, {RegionKind::OmegaSet}, 2000)) {
    EXPECT_GE(oracle_sigma_distance(8, z), delta - 1e-12);
    double n3 = 512.0;
    for (int k = 0; k <= 128; ++k) EXPECT_GE(std::abs(std::abs(z) - (1.0 - k / n3)), delta - 1e-12);
  }
}

TEST(Labyrinth, VarpiSamplesStayInAnnulusBand) {
  LabyrinthSpec s(8);
  for (Complex z : sample_region(s, {RegionKind::VarpiJ, 3}, 500)) {
    EXPECT_LT(s.distance_to_omega(3, z), s.band_halfwidth());
    EXPECT_GE(std::abs(z), s.inner_annulus_radius() - s.band_halfwidth());
  }
  for (Complex z : sample_region(s, {RegionKind::OutsideVarpiJ, 3}, 500))
    EXPECT_GE(s.distance_to_omega(3, z), s.band_halfwidth());
}

TEST(Labyrinth, BoundaryPointsLieOnOmegaEdge) {
  LabyrinthSpec s(6);
  double delta = s.band_halfwidth();
  auto pts = omega_boundary(s, 2, 1e-3);
  std::size_t exact = 0;
  for (const BoundaryPoint& b : pts) {
    EXPECT_LT(s.distance_to_omega(2, b.point), 1e-12);
    EXPECT_NEAR(std::abs(b.normal), 1.0, 1e-12);
    // stepping out along the normal gains the full step except where the
    // spine crosses an arc or near a corner
    double d = s.distance_to_omega(2, b.point + 0.5 * delta * b.normal);
    EXPECT_LE(d, 0.5 * delta + 1e-12);
    exact += std::abs(d - 0.5 * delta) < 1e-9;
  }
  EXPECT_GT(exact, pts.size() * 9 / 10);
}

TEST(Labyrinth, PgmExport) {
  LabyrinthSpec s(4);
  std::ostringstream os;
  write_pgm(s, 32, os);
  std::string data = os.str();
  ASSERT_EQ(data.rfind("P5\n32 32\n255\n", 0), 0u);
  EXPECT_EQ(data.size(), std::string("P5\n32 32\n255\n").size() + 32u * 32u);
}
