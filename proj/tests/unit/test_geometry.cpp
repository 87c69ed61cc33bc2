#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "legendrian/geometry.hpp"

using namespace legendrian;
using namespace legendrian::geometry;
using holo::HoloFunction;
using holo::HoloPair;

namespace {

HoloPair pair_of(std::vector<Complex> a, std::vector<Complex> b) {
  return {HoloFunction(std::move(a)), HoloFunction(std::move(b))};
}

Mat2 random_sl2(std::mt19937& gen, double scale) {
  std::normal_distribution<double> n(0.0, scale);
  Mat2 m{Complex(1.0 + n(gen), n(gen)), Complex(n(gen), n(gen)), Complex(n(gen), n(gen)), Complex(1.0 + n(gen), n(gen))};
  return m * (1.0 / std::sqrt(m.det()));
}

}  // namespace

TEST(Geometry, EuclideanField) {
  for (Complex src : {Complex(0.0), Complex(0.3, -0.2)}) {
    DistanceField one = geodesic_distance_field([](Complex) { return 1.0; }, src, 128);
    DistanceField two = geodesic_distance_field([](Complex) { return 2.0; }, src, 128);
    for (int k = 0; k <= 128; k += 3)
      for (int i = 0; i <= 128; i += 3) {
        Complex z(-1.0 + i / 64.0, -1.0 + k / 64.0);
        if (std::abs(z) > 1.0 || std::abs(z - src) < 0.1) continue;
        EXPECT_NEAR(one.node(i, k) / std::abs(z - src), 1.0, 0.02);
        EXPECT_NEAR(two.node(i, k) / (2.0 * std::abs(z - src)), 1.0, 0.02);
      }
  }
}

TEST(Geometry, StencilBiasIsBelowTwoPercent) {
  EXPECT_GT(stencil_bias(), 0.0);
  EXPECT_LT(stencil_bias(), 0.02);
}

TEST(Geometry, ConstantInducedDensity) {
  HoloPair p = pair_of({kSqrt2}, {0.0});
  DistanceField f = geodesic_distance_field([&](Complex z) { return contact::induced_metric_density(p, z); }, 0.0, 96);
  for (Complex z : {Complex(0.5, 0.0), Complex(0.2, 0.6), Complex(-0.7, -0.3)})
    EXPECT_NEAR(f.at(z) / (kSqrt2 * std::abs(z)), 1.0, 0.02);
}

TEST(Geometry, IntrinsicRadiusOfConstantDensities) {
  for (double c : {1.0, 2.5}) {
    RadiusEstimate r = intrinsic_radius_estimate([c](Complex) { return c; }, 128);
    EXPECT_NEAR(r.value, c, 1e-12);
    EXPECT_LE(std::abs(r.value - c), r.error + 1e-12);
  }
}

TEST(Geometry, IntrinsicRadiusMatchesRadialIntegral) {
  // |phi|^2 = 1 + |z|^2 is radial, so radii are geodesics.
  double oracle = (std::sqrt(2.0) + std::asinh(1.0)) / 2.0;
  contact::LegendrianCurve c;
  c.pair = pair_of({1.0}, {0.0, 1.0});
  double r = intrinsic_radius(c, 128);
  EXPECT_NEAR(r / oracle, 1.0, 0.02);
  EXPECT_GT(r, 1.0);
  EXPECT_LT(r, std::sqrt(2.0));
}

TEST(Geometry, RichardsonConsistency) {
  HoloPair p = pair_of({1.0, 0.4}, {0.0, 0.5});
  Density d = [&](Complex z) { return contact::induced_metric_density(p, z); };
  RadiusEstimate est = intrinsic_radius_estimate(d, 128);
  DistanceField coarse = geodesic_distance_field(d, 0.0, 64);
  DistanceField fine = geodesic_distance_field(d, 0.0, 128);
  double worst = 0.0;
  for (int k = 0; k <= 64; ++k)
    for (int i = 0; i <= 64; ++i)
      if (!std::isnan(coarse.node(i, k))) worst = std::max(worst, std::abs(coarse.node(i, k) - fine.node(2 * i, 2 * k)));
  EXPECT_LT(worst, 3.0 * est.error);
}

TEST(Geometry, TriangleInequality) {
  HoloPair p = pair_of({1.0, 0.4}, {0.0, 0.5});
  Density d = [&](Complex z) { return contact::induced_metric_density(p, z); };
  RadiusEstimate est = intrinsic_radius_estimate(d, 96);
  std::vector<Complex> pts = {{0.1, 0.2}, {-0.5, 0.3}, {0.6, -0.4}, {0.0, -0.8}};
  std::vector<DistanceField> fields;
  for (Complex s : pts) fields.push_back(geodesic_distance_field(d, s, 96));
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b)
      for (std::size_t c = 0; c < pts.size(); ++c)
        EXPECT_LE(fields[a].at(pts[c]), fields[a].at(pts[b]) + fields[b].at(pts[c]) + 2.0 * est.error);
  for (std::size_t a = 0; a < pts.size(); ++a) EXPECT_NEAR(fields[a].at(pts[a]), 0.0, 1e-12);
}

TEST(Geometry, GeodesicCircle) {
  DistanceField f = geodesic_distance_field([](Complex) { return 1.0; }, 0.0, 128);
  for (const CirclePoint& p : geodesic_circle(f, 0.5, 64)) {
    EXPECT_TRUE(p.reached);
    EXPECT_NEAR(std::abs(p.point), 0.5, 0.01);
  }
  for (const CirclePoint& p : geodesic_circle(f, 1.5, 8)) {
    EXPECT_FALSE(p.reached);
    EXPECT_NEAR(std::abs(p.point), 1.0, 1e-12);
  }
}

TEST(Geometry, H3PointExamples) {
  MinkowskiPoint o = h3_point(Mat2::identity());
  EXPECT_EQ(o.x0, 1.0);
  EXPECT_EQ(o.x1 + o.x2 + o.x3, 0.0);
  for (double r : {0.3, 1.0, 2.5}) {
    MinkowskiPoint p = h3_point(Mat2::diagonal(std::exp(r / 2), std::exp(-r / 2)));
    EXPECT_NEAR(p.x0, std::cosh(r), 1e-12);
    EXPECT_NEAR(p.x3, std::sinh(r), 1e-12);
    EXPECT_EQ(p.x1, 0.0);
    EXPECT_EQ(p.x2, 0.0);
    EXPECT_NEAR(h3_distance(o, p), r, 1e-10);
  }
  EXPECT_EQ(h3_distance(o, o), 0.0);
}

TEST(Geometry, HyperboloidAndDistanceIdentity) {
  std::mt19937 gen(8);
  MinkowskiPoint o;
  for (int i = 0; i < 100; ++i) {
    Mat2 a = random_sl2(gen, 0.7);
    MinkowskiPoint p = h3_point(a);
    EXPECT_NEAR(minkowski_inner(p, p), -1.0, 1e-10 * std::max(1.0, p.x0 * p.x0));
    EXPECT_GT(p.x0, 0.0);
    double n = matrix_norm(a);
    EXPECT_NEAR(h3_distance(o, p), std::acosh(n * n / 2.0), 1e-9);
  }
}

TEST(Geometry, DistanceSymmetryAndIsometry) {
  std::mt19937 gen(9);
  for (int i = 0; i < 50; ++i) {
    Mat2 a = random_sl2(gen, 0.5), b = random_sl2(gen, 0.5), g = random_sl2(gen, 0.5);
    MinkowskiPoint p = h3_point(a), q = h3_point(b);
    EXPECT_EQ(h3_distance(p, q), h3_distance(q, p));
    EXPECT_NEAR(h3_distance(h3_point(g * a), h3_point(g * b)), h3_distance(p, q), 1e-9);
  }
}

TEST(Geometry, DistanceClamp) {
  MinkowskiPoint o;
  MinkowskiPoint near{1.0 - 5e-10, 0.0, 0.0, 0.0};
  EXPECT_EQ(h3_distance(o, near), 0.0);
  MinkowskiPoint bad{0.5, 0.0, 0.0, 0.0};
  EXPECT_THROW(h3_distance(o, bad), std::domain_error);
}

TEST(Geometry, PoincareBall) {
  auto b = poincare_ball(h3_point(Mat2::diagonal(std::exp(1.0), std::exp(-1.0))));
  EXPECT_NEAR(b[2], std::tanh(1.0), 1e-12);
  auto c = poincare_ball(MinkowskiPoint{});
  EXPECT_EQ(c[0] + c[1] + c[2], 0.0);
}

TEST(Geometry, FrontMetricDensityExamples) {
  HoloPair a = pair_of({kSqrt2}, {0.0});
  EXPECT_NEAR(front_metric_density(a, {0.3, 0.1}), 2.0, 1e-15);
  EXPECT_NEAR(std::pow(front_metric_density(a, 0.2), 2), 2.0 * std::pow(contact::induced_metric_density(a, 0.2), 2),
              1e-14);
  EXPECT_NEAR(front_metric_density(pair_of({0.0}, {Complex(0.0, kSqrt2)}), {0.5, -0.5}), 0.0, 1e-15);
}

TEST(Geometry, FrontMetricBoundedByTwiceInduced) {
  std::mt19937 gen(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    std::vector<Complex> c1, c2;
    for (int k = 0; k < 5; ++k) {
      c1.emplace_back(n(gen), n(gen));
      c2.emplace_back(n(gen), n(gen));
    }
    HoloPair p = pair_of(c1, c2);
    for (int i = 0; i < 1000; ++i) {
      Complex z = std::polar(std::sqrt(u(gen)), 2 * kPi * u(gen));
      double f = front_metric_density(p, z), g = contact::induced_metric_density(p, z);
      EXPECT_LE(f * f, 2.0 * g * g * (1.0 + 1e-14));
    }
  }
}

TEST(Geometry, PathLengthExamples) {
  std::vector<Complex> seg = {{-0.3, 0.1}, {0.0, 0.2}, {0.5, 0.1 + 0.8 / 3.0 * 0.5 + 0.1 / 3}};
  std::vector<Complex> line = {{-0.5, 0.0}, {-0.1, 0.0}, {0.4, 0.0}};
  EXPECT_NEAR(path_length([](Complex) { return 1.0; }, line), 0.9, 1e-15);
  double one = path_length([](Complex z) { return 1.0 + std::norm(z); }, seg);
  EXPECT_NEAR(path_length([](Complex z) { return 2.0 * (1.0 + std::norm(z)); }, seg), 2.0 * one, 1e-14);
}

TEST(Geometry, FrontLengthDominatesHyperbolicDistance) {
  HoloPair p = pair_of({1.0, 0.3}, {0.0, 0.5});
  contact::LegendrianCurve c = contact::integrate(p, 0.0, Mat2::identity(), {5, 16});
  std::mt19937 gen(21);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  for (int t = 0; t < 50; ++t) {
    std::vector<Complex> corners = {{u(gen), u(gen)}, {u(gen), u(gen)}, {u(gen), u(gen)}};
    std::vector<Complex> path;
    for (std::size_t s = 0; s + 1 < corners.size(); ++s)
      for (int k = 0; k < 200; ++k) path.push_back(corners[s] + (corners[s + 1] - corners[s]) * (k / 200.0));
    path.push_back(corners.back());
    double len = path_length([&](Complex z) { return front_metric_density(p, z); }, path);
    double d = h3_distance(h3_point(c.value_at(path.front())), h3_point(c.value_at(path.back())));
    EXPECT_GE(len * (1.0 + 1e-4), d);
  }
}

TEST(Geometry, FieldExport) {
  DistanceField f = geodesic_distance_field([](Complex) { return 1.0; }, 0.0, 16);
  auto dir = std::filesystem::temp_directory_path() / "legendrian_geometry_test";
  std::filesystem::create_directories(dir);
  write_field(f, 0.01, dir / "f.json", dir / "f.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "f.bin"), 17u * 17u * 8u);
  std::filesystem::remove_all(dir);
}
