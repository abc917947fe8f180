#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace rotplace {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
  double n = norm(a);
  if (n < 1e-9) throw std::invalid_argument("cannot normalize near-zero vector");
  return a * (1.0 / n);
}

// Unit direction on the sphere. Constructor normalizes; rejects near-zero input.
struct UnitVector {
  Vec3 v{0.0, 0.0, 1.0};

  UnitVector() = default;
  explicit UnitVector(const Vec3& raw) : v(normalized(raw)) {}
  UnitVector(double x, double y, double z) : v(normalized(Vec3{x, y, z})) {}

  double x() const { return v.x; }
  double y() const { return v.y; }
  double z() const { return v.z; }
  UnitVector operator-() const {
    UnitVector u;
    u.v = -v;
    return u;
  }
};

inline double dot(const UnitVector& a, const UnitVector& b) { return dot(a.v, b.v); }

// Angle between unit vectors in [0, pi]; atan2 form is stable near 0 and pi.
inline double angular_distance(const UnitVector& a, const UnitVector& b) {
  return std::atan2(norm(cross(a.v, b.v)), dot(a.v, b.v));
}

// Some unit vector orthogonal to a, chosen deterministically.
inline UnitVector any_orthogonal(const UnitVector& a) {
  double ax = std::fabs(a.x()), ay = std::fabs(a.y()), az = std::fabs(a.z());
  Vec3 h = (ax <= ay && ax <= az) ? Vec3{1, 0, 0} : (ay <= az ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  return UnitVector(cross(a.v, h));
}

// Proper rotation, stored as a row-major 3x3 matrix.
struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Rotation identity() { return Rotation{}; }

  Vec3 apply(const Vec3& p) const {
    return {m[0] * p.x + m[1] * p.y + m[2] * p.z,
            m[3] * p.x + m[4] * p.y + m[5] * p.z,
            m[6] * p.x + m[7] * p.y + m[8] * p.z};
  }
  UnitVector apply(const UnitVector& p) const {
    UnitVector u;
    u.v = apply(p.v);  // already unit up to rounding; skip renormalization
    double n = norm(u.v);
    u.v = u.v * (1.0 / n);
    return u;
  }

  Rotation compose(const Rotation& o) const {  // this * o (o applied first)
    Rotation r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[3 * i + k] * o.m[3 * k + j];
        r.m[3 * i + j] = s;
      }
    return r;
  }

  Rotation inverse() const {
    Rotation r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[3 * i + j] = m[3 * j + i];
    return r;
  }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  // Max deviation of R^T R from the identity.
  double orthonormality_defect() const {
    Rotation t = inverse();
    Rotation p = t.compose(*this);
    double d = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d = std::max(d, std::fabs(p.m[3 * i + j] - (i == j ? 1.0 : 0.0)));
    return d;
  }

  bool is_valid(double tol = 1e-12) const {
    return orthonormality_defect() <= tol && std::fabs(determinant() - 1.0) <= tol;
  }

  double angle() const {  // rotation angle in [0, pi]
    double tr = m[0] + m[4] + m[8];
    double c = (tr - 1.0) / 2.0;
    c = std::fmax(-1.0, std::fmin(1.0, c));
    return std::acos(c);
  }
};

inline Rotation rotation_from_axis_angle(const UnitVector& axis, double angle) {
  double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  double x = axis.x(), y = axis.y(), z = axis.z();
  Rotation r;
  r.m = {t * x * x + c,     t * x * y - s * z, t * x * z + s * y,
         t * x * y + s * z, t * y * y + c,     t * y * z - s * x,
         t * x * z - s * y, t * y * z + s * x, t * z * z + c};
  return r;
}

inline Rotation rotation_from_quaternion(double w, double x, double y, double z) {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n; x /= n; y /= n; z /= n;
  Rotation r;
  r.m = {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
         2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
  return r;
}

// Rotation taking a to b along their common great circle (minimal angle).
inline Rotation rotation_aligning(const UnitVector& a, const UnitVector& b) {
  Vec3 ax = cross(a.v, b.v);
  double s = norm(ax), c = dot(a, b);
  if (s < 1e-14) {
    if (c > 0) return Rotation::identity();
    return rotation_from_axis_angle(any_orthogonal(a), kPi);
  }
  return rotation_from_axis_angle(UnitVector(ax), std::atan2(s, c));
}

}  // namespace rotplace
