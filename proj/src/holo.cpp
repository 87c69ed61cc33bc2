#include "legendrian/holo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "legendrian/errors.hpp"

namespace legendrian::holo {

HoloFunction::HoloFunction(std::vector<Complex> coeffs, std::size_t degree_cap)
    : coeffs_(std::move(coeffs)), degree_cap_(degree_cap) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  if (coeffs_.size() > degree_cap_ + 1) {
    throw std::length_error("HoloFunction: " + std::to_string(coeffs_.size()) +
                            " coefficients exceed degree cap " + std::to_string(degree_cap_));
  }
}

Complex HoloFunction::operator()(Complex z) const {
  if (std::abs(z) > 1.0 + kDiskSlack) {
    throw std::domain_error("HoloFunction evaluated outside the closed unit disk, |z| = " +
                            std::to_string(std::abs(z)));
  }
  return eval_unchecked(z);
}

Complex HoloFunction::eval_unchecked(Complex z) const {
  Complex acc = coeffs_.back();
  for (std::size_t k = coeffs_.size() - 1; k-- > 0;) acc = acc * z + coeffs_[k];
  return acc;
}

double HoloFunction::coefficient_l1() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += std::abs(c);
  return s;
}

HoloFunction HoloFunction::trimmed(double tol) const {
  std::size_t n = coeffs_.size();
  while (n > 1 && std::abs(coeffs_[n - 1]) <= tol) --n;
  return HoloFunction(std::vector<Complex>(coeffs_.begin(), coeffs_.begin() + n), degree_cap_);
}

HoloFunction& HoloFunction::operator+=(const HoloFunction& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  degree_cap_ = std::max(degree_cap_, o.degree_cap_);
  return *this;
}

HoloFunction& HoloFunction::operator-=(const HoloFunction& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), 0.0);
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  degree_cap_ = std::max(degree_cap_, o.degree_cap_);
  return *this;
}

HoloFunction& HoloFunction::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Complex evaluate(const HoloFunction& f, Complex z) { return f(z); }

HoloFunction derivative(const HoloFunction& f) {
  const auto& c = f.coeffs();
  if (c.size() == 1) return HoloFunction({0.0}, f.degree_cap());
  std::vector<Complex> d(c.size() - 1);
  for (std::size_t k = 0; k + 1 < c.size(); ++k) d[k] = static_cast<double>(k + 1) * c[k + 1];
  return HoloFunction(std::move(d), f.degree_cap());
}

HoloFunction antiderivative(const HoloFunction& f, Complex at_zero) {
  const auto& c = f.coeffs();
  std::vector<Complex> p(c.size() + 1);
  p[0] = at_zero;
  for (std::size_t k = 0; k < c.size(); ++k) p[k + 1] = c[k] / static_cast<double>(k + 1);
  const std::size_t cap = std::max(f.degree_cap(), p.size() - 1);
  return HoloFunction(std::move(p), cap);
}

Truncated multiply(const HoloFunction& a, const HoloFunction& b, std::size_t degree_cap) {
  const auto& x = a.coeffs();
  const auto& y = b.coeffs();
  std::vector<Complex> full(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == Complex{0.0}) continue;
    for (std::size_t k = 0; k < y.size(); ++k) full[i + k] += x[i] * y[k];
  }
  double tail = 0.0;
  if (full.size() > degree_cap + 1) {
    for (std::size_t k = degree_cap + 1; k < full.size(); ++k) tail += std::abs(full[k]);
    full.resize(degree_cap + 1);
  }
  return {HoloFunction(std::move(full), degree_cap), tail};
}

Truncated exp_series(const HoloFunction& g, std::size_t degree_cap) {
  const auto& c = g.coeffs();
  const std::size_t d = c.size() - 1;
  const std::size_t extended = std::max<std::size_t>(4 * degree_cap, degree_cap + 64);
  std::vector<Complex> h(extended + 1, 0.0);
  h[0] = std::exp(c[0]);
  // k h_k = sum_{m=1}^{min(k,d)} m g_m h_{k-m}, from h' = g' h.
  for (std::size_t k = 1; k <= extended; ++k) {
    Complex acc = 0.0;
    const std::size_t top = std::min(k, d);
    for (std::size_t m = 1; m <= top; ++m) acc += static_cast<double>(m) * c[m] * h[k - m];
    h[k] = acc / static_cast<double>(k);
  }
  double tail = 0.0;
  for (std::size_t k = degree_cap + 1; k <= extended; ++k) tail += std::abs(h[k]);
  const std::size_t span = 16;
  const double last = std::abs(h[extended]);
  const double earlier = std::abs(h[extended - span]);
  if (!std::isfinite(tail)) {
    tail = std::numeric_limits<double>::infinity();
  } else if (last > 0.0) {
    const double q = earlier > 0.0 ? std::pow(last / earlier, 1.0 / span) : 1.0;
    tail = q < 1.0 ? tail + last * q / (1.0 - q) : std::numeric_limits<double>::infinity();
  }
  h.resize(degree_cap + 1);
  return {HoloFunction(std::move(h), degree_cap).trimmed(0.0), tail};
}

HoloFunction multiply_checked(const HoloFunction& a, const HoloFunction& b, std::size_t degree_cap) {
  auto r = multiply(a, b, degree_cap);
  if (!(r.tail_bound <= kMaxTail)) {
    throw std::range_error("product exceeds degree cap, discarded tail " +
                           std::to_string(r.tail_bound));
  }
  return std::move(r.f);
}

HoloFunction exp_checked(const HoloFunction& g, std::size_t degree_cap) {
  auto r = exp_series(g, degree_cap);
  if (!(r.tail_bound <= kMaxTail)) {
    throw std::range_error("exp re-expansion exceeds degree cap, tail bound " +
                           std::to_string(r.tail_bound));
  }
  return std::move(r.f);
}

HoloFunction rotate_argument(const HoloFunction& f, double angle) {
  std::vector<Complex> c = f.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= std::polar(1.0, angle * static_cast<double>(k));
  return HoloFunction(std::move(c), f.degree_cap());
}

Complex HoloPair::omega(Complex z) const {
  return (phi1(z) - Complex{0.0, 1.0} * phi2(z)) / kSqrt2;
}

Complex HoloPair::theta(Complex z) const {
  return (phi1(z) + Complex{0.0, 1.0} * phi2(z)) / kSqrt2;
}

double HoloPair::modulus(Complex z) const {
  return std::sqrt(std::norm(phi1(z)) + std::norm(phi2(z)));
}

NormBounds norm_bounds(const HoloPair& pair, int grid_density) {
  if (grid_density < 64) throw std::invalid_argument("norm_bounds: grid_density must be >= 64");
  const int n_angles = 4 * grid_density;
  NormBounds b{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < grid_density; ++i) {
    const double r = static_cast<double>(i) / (grid_density - 1);
    const int count = i == 0 ? 1 : n_angles;
    for (int k = 0; k < count; ++k) {
      const double v = pair.modulus(std::polar(r, 2.0 * kPi * k / n_angles));
      b.nu = std::min(b.nu, v);
      b.m = std::max(b.m, v);
    }
  }
  if (!(b.nu >= kNuMin)) {
    throw DegenerateDataError("holomorphic data has a common zero (inf |phi| = " +
                              std::to_string(b.nu) + ")");
  }
  return b;
}

Mat2 matrix_form(const HoloPair& pair, Complex z) {
  const Complex p1 = pair.phi1(z);
  const Complex p2 = pair.phi2(z);
  const Complex i{0.0, 1.0};
  return {0.0, (p1 + i * p2) / kSqrt2, (p1 - i * p2) / kSqrt2, 0.0};
}

HoloPair rotate_pair(const HoloPair& pair, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  return {c * pair.phi1 + s * pair.phi2, (-s) * pair.phi1 + c * pair.phi2};
}

void to_json(nlohmann::json& j, const HoloFunction& f) {
  j = nlohmann::json::array();
  for (const auto& c : f.coeffs()) j.push_back({c.real(), c.imag()});
}

void from_json(const nlohmann::json& j, HoloFunction& f) {
  if (!j.is_array()) throw FormatError("HoloFunction: expected an array of [re, im] pairs");
  std::vector<Complex> c;
  c.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw FormatError("HoloFunction: malformed coefficient");
    c.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  const std::size_t cap = std::max(kDefaultDegreeCap, c.size());
  f = HoloFunction(std::move(c), cap);
}

void to_json(nlohmann::json& j, const HoloPair& p) { j = {{"phi1", p.phi1}, {"phi2", p.phi2}}; }

void from_json(const nlohmann::json& j, HoloPair& p) {
  p.phi1 = j.at("phi1").get<HoloFunction>();
  p.phi2 = j.at("phi2").get<HoloFunction>();
}

}  // namespace legendrian::holo
