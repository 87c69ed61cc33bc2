#pragma once

// Holomorphic functions on the closed unit disk, stored as truncated power
// series with an explicit degree cap, and the pair (phi1, phi2) that encodes
// a Legendrian curve.

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "legendrian/mat2.hpp"

namespace legendrian::holo {

inline constexpr std::size_t kDefaultDegreeCap = 512;
// Below this value of inf |phi| the pair is treated as having a common zero.
inline constexpr double kNuMin = 1e-9;
// Largest admissible coefficient tail discarded by a truncating operation.
inline constexpr double kMaxTail = 1e-10;
// Evaluation accepts |z| <= 1 + kDiskSlack.
inline constexpr double kDiskSlack = 1e-12;

class HoloFunction {
 public:
  HoloFunction() : coeffs_{Complex{0.0}} {}
  explicit HoloFunction(std::vector<Complex> coeffs,
                        std::size_t degree_cap = kDefaultDegreeCap);

  static HoloFunction constant(Complex c) { return HoloFunction({c}); }
  static HoloFunction identity() { return HoloFunction({0.0, 1.0}); }

  const std::vector<Complex>& coeffs() const { return coeffs_; }
  std::size_t degree() const { return coeffs_.size() - 1; }
  std::size_t degree_cap() const { return degree_cap_; }
  Complex coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Complex{0.0}; }

  // Horner evaluation with the closed-disk domain check.
  Complex operator()(Complex z) const;
  // Horner evaluation without the domain check, for callers that already
  // guarantee |z| <= 1.
  Complex eval_unchecked(Complex z) const;

  // Sum of |c_k|: a bound for sup over the closed disk.
  double coefficient_l1() const;

  // Drops trailing coefficients with modulus <= tol (keeps at least one).
  HoloFunction trimmed(double tol = 0.0) const;

  HoloFunction& operator+=(const HoloFunction& o);
  HoloFunction& operator-=(const HoloFunction& o);
  HoloFunction& operator*=(Complex s);
  friend HoloFunction operator+(HoloFunction a, const HoloFunction& b) { return a += b; }
  friend HoloFunction operator-(HoloFunction a, const HoloFunction& b) { return a -= b; }
  friend HoloFunction operator*(HoloFunction a, Complex s) { return a *= s; }
  friend HoloFunction operator*(Complex s, HoloFunction a) { return a *= s; }

 private:
  std::vector<Complex> coeffs_;
  std::size_t degree_cap_ = kDefaultDegreeCap;
};

// Result of an operation whose exact output has degree above the cap.
struct Truncated {
  HoloFunction f;
  double tail_bound = 0.0;  // sum of |c_k| over discarded k
};

Complex evaluate(const HoloFunction& f, Complex z);
HoloFunction derivative(const HoloFunction& f);
// Primitive vanishing at 0, plus `at_zero`.
HoloFunction antiderivative(const HoloFunction& f, Complex at_zero = 0.0);
Truncated multiply(const HoloFunction& a, const HoloFunction& b,
                   std::size_t degree_cap = kDefaultDegreeCap);
// exp(g) re-expanded as a power series truncated at `degree_cap`. The tail
// bound covers coefficients up to 4*degree_cap plus a geometric extrapolation
// beyond; it is +inf when the computed tail is not yet decaying.
Truncated exp_series(const HoloFunction& g, std::size_t degree_cap = kDefaultDegreeCap);
// Same as multiply / exp_series, but throws std::range_error when the tail
// bound exceeds kMaxTail.
HoloFunction multiply_checked(const HoloFunction& a, const HoloFunction& b,
                              std::size_t degree_cap = kDefaultDegreeCap);
HoloFunction exp_checked(const HoloFunction& g, std::size_t degree_cap = kDefaultDegreeCap);
// z -> f(e^{i angle} z), i.e. c_k -> c_k e^{i k angle}.
HoloFunction rotate_argument(const HoloFunction& f, double angle);

// The holomorphic data (phi1, phi2) of a Legendrian curve.
struct HoloPair {
  HoloFunction phi1;
  HoloFunction phi2;

  // Canonical one-form densities: omega = (phi1 - i phi2)/sqrt2,
  // theta = (phi1 + i phi2)/sqrt2.
  Complex omega(Complex z) const;
  Complex theta(Complex z) const;
  // (|phi1|^2 + |phi2|^2)^{1/2} at z.
  double modulus(Complex z) const;
  std::size_t degree() const { return std::max(phi1.degree(), phi2.degree()); }
};

struct NormBounds {
  double nu = 0.0;  // inf |phi| over the closed disk (grid estimate)
  double m = 0.0;   // sup |phi|
};

// Polar grid of `grid_density` radii (0 and 1 included) by 4*grid_density
// angles. Throws DegenerateDataError when nu < kNuMin and
// std::invalid_argument when grid_density < 64.
NormBounds norm_bounds(const HoloPair& pair, int grid_density);

// (1/sqrt2) [[0, phi1 + i phi2], [phi1 - i phi2, 0]] at z.
Mat2 matrix_form(const HoloPair& pair, Complex z);

// ((cos t) phi1 + (sin t) phi2, -(sin t) phi1 + (cos t) phi2).
HoloPair rotate_pair(const HoloPair& pair, double t);

void to_json(nlohmann::json& j, const HoloFunction& f);
void from_json(const nlohmann::json& j, HoloFunction& f);
void to_json(nlohmann::json& j, const HoloPair& p);
void from_json(const nlohmann::json& j, HoloPair& p);

}  // namespace legendrian::holo
