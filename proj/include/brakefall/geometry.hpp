#pragma once

#include <cmath>
#include <complex>

namespace brakefall {

inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double d) { return d * (kPi / 180.0); }
inline double rad_to_deg(double r) { return r * (180.0 / kPi); }

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  Vec2& operator/=(double s) { x /= s; y /= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator/(Vec2 a, double s) { return a /= s; }
inline Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Planar cross product: (x,y) ∧ (x',y') = x y' − y x'.
inline double wedge(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double norm_sq(const Vec2& a) { return dot(a, a); }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

inline std::complex<double> as_complex(const Vec2& a) { return {a.x, a.y}; }

/// 2x2 matrix, row-major.
struct Mat2 {
  double m00 = 1.0, m01 = 0.0;
  double m10 = 0.0, m11 = 1.0;

  Vec2 operator*(const Vec2& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  Mat2 transposed() const { return {m00, m10, m01, m11}; }
  double det() const { return m00 * m11 - m01 * m10; }

  static Mat2 identity() { return {}; }
  static Mat2 rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c, -s, s, c};
  }
  /// Reflection across the line through the origin at angle `axis` to the x-axis.
  static Mat2 reflection(double axis) {
    const double c = std::cos(2.0 * axis), s = std::sin(2.0 * axis);
    return {c, s, s, -c};
  }
};

inline double max_abs_entry_diff(const Mat2& a, const Mat2& b) {
  double d = std::fabs(a.m00 - b.m00);
  d = std::max(d, std::fabs(a.m01 - b.m01));
  d = std::max(d, std::fabs(a.m10 - b.m10));
  d = std::max(d, std::fabs(a.m11 - b.m11));
  return d;
}

/// Deviation of OᵀO from the identity (max entry).
inline double orthogonality_defect(const Mat2& o) {
  return max_abs_entry_diff(o.transposed() * o, Mat2::identity());
}

}  // namespace brakefall
