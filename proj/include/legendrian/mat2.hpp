#pragma once

#include <cmath>
#include <complex>

namespace legendrian {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

// Dense 2x2 complex matrix, row-major entries.
struct Mat2 {
  Complex m11{0.0}, m12{0.0}, m21{0.0}, m22{0.0};

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diagonal(Complex a, Complex d) { return {a, 0.0, 0.0, d}; }

  Complex det() const { return m11 * m22 - m12 * m21; }
  Complex trace() const { return m11 + m22; }

  // Inverse through the adjugate; callers working in SL(2,C) may use
  // sl_inverse() instead, which skips the division.
  Mat2 inverse() const {
    const Complex d = det();
    return {m22 / d, -m12 / d, -m21 / d, m11 / d};
  }
  Mat2 sl_inverse() const { return {m22, -m12, -m21, m11}; }
  Mat2 adjoint() const {
    return {std::conj(m11), std::conj(m21), std::conj(m12), std::conj(m22)};
  }
  Mat2 transpose() const { return {m11, m21, m12, m22}; }

  Mat2& operator+=(const Mat2& o) {
    m11 += o.m11; m12 += o.m12; m21 += o.m21; m22 += o.m22;
    return *this;
  }
  Mat2& operator-=(const Mat2& o) {
    m11 -= o.m11; m12 -= o.m12; m21 -= o.m21; m22 -= o.m22;
    return *this;
  }
  Mat2& operator*=(Complex s) {
    m11 *= s; m12 *= s; m21 *= s; m22 *= s;
    return *this;
  }

  friend Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend Mat2 operator*(Mat2 a, Complex s) { return a *= s; }
  friend Mat2 operator*(Complex s, Mat2 a) { return a *= s; }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;
};

// |A| = sqrt(trace(A A*)).
inline double matrix_norm(const Mat2& a) {
  return std::sqrt(std::norm(a.m11) + std::norm(a.m12) + std::norm(a.m21) +
                   std::norm(a.m22));
}

inline double max_abs_entry(const Mat2& a) {
  return std::max({std::abs(a.m11), std::abs(a.m12), std::abs(a.m21), std::abs(a.m22)});
}

}  // namespace legendrian
