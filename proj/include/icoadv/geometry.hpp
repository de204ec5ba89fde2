#ifndef ICOADV_GEOMETRY_HPP_
#define ICOADV_GEOMETRY_HPP_

// Unit-sphere helpers. Everything here works on unit vectors; callers scale
// lengths and areas by the sphere radius.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace icoadv {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

using Vector3d = Vec3<double>;

template <typename Scalar>
struct LonLat {
  Scalar lon;  // [0, 2pi)
  Scalar lat;  // [-pi/2, pi/2]
};

template <typename Scalar>
Vec3<Scalar> unit_from_lonlat(Scalar lon, Scalar lat) {
  using std::cos;
  using std::sin;
  return Vec3<Scalar>(cos(lat) * cos(lon), cos(lat) * sin(lon), sin(lat));
}

template <typename Derived>
LonLat<typename Derived::Scalar> lonlat_of(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  using std::asin;
  using std::atan2;
  const Scalar r = p.norm();
  Scalar lon = atan2(p.y(), p.x());
  if (lon < Scalar(0)) lon += Scalar(2) * std::numbers::pi_v<Scalar>;
  if (lon >= Scalar(2) * std::numbers::pi_v<Scalar>) lon = Scalar(0);
  Scalar s = p.z() / r;
  s = s > Scalar(1) ? Scalar(1) : (s < Scalar(-1) ? Scalar(-1) : s);
  return {lon, asin(s)};
}

/// Great-circle angle between two unit vectors (atan2 form, accurate for
/// both tiny and near-antipodal separations).
template <typename DA, typename DB>
typename DA::Scalar arc_angle(const Eigen::MatrixBase<DA>& a,
                              const Eigen::MatrixBase<DB>& b) {
  using std::atan2;
  return atan2(a.cross(b).norm(), a.dot(b));
}

/// Solid angle of the spherical triangle (a, b, c), via the
/// Van Oosterom-Strackee formula. Throws for (nearly) collinear input.
template <typename DA, typename DB, typename DC>
typename DA::Scalar spherical_triangle_area(const Eigen::MatrixBase<DA>& a,
                                            const Eigen::MatrixBase<DB>& b,
                                            const Eigen::MatrixBase<DC>& c) {
  using Scalar = typename DA::Scalar;
  using std::abs;
  using std::atan2;
  const Scalar triple = a.dot(b.cross(c));
  using std::sqrt;
  // |triple| ~ h^2 for a triangle of size h while the edge product is h^3;
  // collinear input drives the ratio to zero.
  const Scalar scale = a.cross(b).norm() * b.cross(c).norm() * c.cross(a).norm();
  if (!(abs(triple) > Scalar(1e-12) * sqrt(scale))) {
    throw std::invalid_argument("spherical_triangle_area: degenerate triangle");
  }
  const Scalar denom = Scalar(1) + a.dot(b) + b.dot(c) + c.dot(a);
  return Scalar(2) * atan2(abs(triple), denom);
}

/// Local east/north basis at a point on the unit sphere. Near the poles the
/// east direction falls back to the x axis projection.
template <typename Scalar>
struct TangentFrame {
  Vec3<Scalar> center;
  Vec3<Scalar> east;
  Vec3<Scalar> north;

  static TangentFrame at(const Vec3<Scalar>& p) {
    TangentFrame f;
    f.center = p.normalized();
    Vec3<Scalar> e = Vec3<Scalar>::UnitZ().cross(f.center);
    if (e.norm() < Scalar(1e-12)) e = Vec3<Scalar>::UnitY();
    f.east = e.normalized();
    f.north = f.center.cross(f.east);
    return f;
  }

  /// Gnomonic projection of p onto the tangent plane, in units of the
  /// sphere radius.
  Eigen::Matrix<Scalar, 2, 1> project(const Vec3<Scalar>& p) const {
    const Scalar d = p.dot(center);
    return {p.dot(east) / d, p.dot(north) / d};
  }

  Vec3<Scalar> to_vector(Scalar ve, Scalar vn) const { return ve * east + vn * north; }
};

/// Point at fraction t along the great arc from a to b.
template <typename Scalar>
Vec3<Scalar> slerp(const Vec3<Scalar>& a, const Vec3<Scalar>& b, Scalar t) {
  using std::sin;
  const Scalar omega = arc_angle(a, b);
  if (omega < Scalar(1e-15)) return a;
  const Scalar s = sin(omega);
  return ((sin((Scalar(1) - t) * omega) / s) * a + (sin(t * omega) / s) * b).normalized();
}

}  // namespace icoadv

#endif  // ICOADV_GEOMETRY_HPP_
