#include <algorithm>
#include <cmath>
#include <limits>

#include "legendrian/contact.hpp"
#include "legendrian/errors.hpp"
#include "legendrian/parallel.hpp"

namespace legendrian::contact {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

bool finite(const Mat2& m) {
  for (Complex c : {m.m11, m.m12, m.m21, m.m22})
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

SL2Value integrate_segment(const holo::HoloPair& pair, Complex from, Complex to, const SL2Value& x0, double tol,
                           std::size_t max_steps) {
  Complex d = to - from;
  if (std::abs(d) == 0.0) return x0;
  auto rhs = [&](double s, const Mat2& x) { return x * holo::matrix_form(pair, from + s * d) * d; };

  Mat2 x = x0;
  double s = 0.0;
  double h = 0.05;
  Mat2 k1 = rhs(0.0, x);
  std::size_t steps = 0;
  while (s < 1.0) {
    if (++steps > max_steps) throw IntegrationError("step budget exhausted");
    h = std::min(h, 1.0 - s);
    Mat2 k2 = rhs(s + c2 * h, x + k1 * (h * a21));
    Mat2 k3 = rhs(s + c3 * h, x + (k1 * a31 + k2 * a32) * h);
    Mat2 k4 = rhs(s + c4 * h, x + (k1 * a41 + k2 * a42 + k3 * a43) * h);
    Mat2 k5 = rhs(s + c5 * h, x + (k1 * a51 + k2 * a52 + k3 * a53 + k4 * a54) * h);
    Mat2 k6 = rhs(s + h, x + (k1 * a61 + k2 * a62 + k3 * a63 + k4 * a64 + k5 * a65) * h);
    Mat2 next = x + (k1 * b1 + k3 * b3 + k4 * b4 + k5 * b5 + k6 * b6) * h;
    Mat2 k7 = rhs(s + h, next);
    Mat2 err = (k1 * e1 + k3 * e3 + k4 * e4 + k5 * e5 + k6 * e6 + k7 * e7) * h;
    if (!finite(next) || !finite(err)) {
      h *= 0.25;
      if (h < 1e-14) throw IntegrationError("non-finite solution");
      continue;
    }
    double scale = tol * (1.0 + std::max(max_abs_entry(x), max_abs_entry(next)));
    double ratio = max_abs_entry(err) / scale;
    if (ratio <= 1.0) {
      s = (1.0 - s <= h) ? 1.0 : s + h;
      x = next;
      k1 = k7;
    }
    double factor = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
    h *= factor;
    if (s < 1.0 && h < 1e-14) throw IntegrationError("step size underflow");
  }
  return x;
}

LegendrianCurve integrate(const holo::HoloPair& pair, Complex base_point, const SL2Value& base_value,
                          const PolarGrid& grid, const IntegrationOptions& options) {
  if (std::abs(base_point) > 1.0 + holo::kDiskSlack) throw std::domain_error("base point outside the closed disk");
  LegendrianCurve curve;
  curve.pair = pair;
  curve.base_point = base_point;
  curve.base_value = base_value;
  curve.grid = grid;
  curve.values.assign(grid.size(), SL2Value{});

  auto origin = [&](double tol) {
    return base_point == Complex(0.0) ? base_value
                                      : integrate_segment(pair, base_point, 0.0, base_value, tol, options.max_steps);
  };
  Mat2 x0 = origin(options.tol);
  parallel_for(static_cast<std::size_t>(grid.angles), [&](std::size_t k) {
    int ia = static_cast<int>(k);
    Mat2 x = x0;
    curve.values[grid.index(0, ia)] = x;
    for (int ir = 1; ir < grid.radii; ++ir) {
      x = integrate_segment(pair, grid.node(ir - 1, ia), grid.node(ir, ia), x, options.tol, options.max_steps);
      curve.values[grid.index(ir, ia)] = x;
    }
  });

  // Re-run a subset of spokes at a hundredfold tighter tolerance.
  double tight = options.tol / 100.0;
  Mat2 y0 = origin(tight);
  int stride = std::max(1, options.check_stride);
  std::vector<double> deviation(static_cast<std::size_t>(grid.angles), 0.0);
  parallel_for(static_cast<std::size_t>(grid.angles), [&](std::size_t k) {
    int ia = static_cast<int>(k);
    if (ia % stride != 0) return;
    Mat2 y = y0;
    double dev = max_abs_entry(y - curve.values[grid.index(0, ia)]);
    for (int ir = 1; ir < grid.radii; ++ir) {
      y = integrate_segment(pair, grid.node(ir - 1, ia), grid.node(ir, ia), y, tight, options.max_steps);
      dev = std::max(dev, max_abs_entry(y - curve.values[grid.index(ir, ia)]));
    }
    deviation[k] = dev;
  });
  double sup = 0.0;
  for (const Mat2& m : curve.values) sup = std::max(sup, max_abs_entry(m));
  double floor = 64.0 * std::numeric_limits<double>::epsilon() * sup * sup;
  curve.integration_error = std::max(*std::max_element(deviation.begin(), deviation.end()), floor);
  return curve;
}

SL2Value LegendrianCurve::value_at(Complex z) const {
  if (std::abs(z) > 1.0 + holo::kDiskSlack) throw std::domain_error("point outside the closed disk");
  return integrate_segment(pair, 0.0, z, origin_value());
}

SL2Value LegendrianCurve::derivative_at(int ir, int ia) const {
  return at(ir, ia) * holo::matrix_form(pair, grid.node(ir, ia));
}

}  // namespace legendrian::contact
