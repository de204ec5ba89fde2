#include "icoadv/cases.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace icoadv {

namespace {

constexpr double kPi = std::numbers::pi;

double great_circle(LonLat<double> c, double lon, double lat) {
  const double x = std::sin(c.lat) * std::sin(lat) + std::cos(c.lat) * std::cos(lat) * std::cos(lon - c.lon);
  return std::acos(std::clamp(x, -1.0, 1.0));
}

// |lon - lon_c| measured along the shorter way round.
double lon_distance(double lon, double lon_c) {
  double d = std::fmod(std::abs(lon - lon_c), 2.0 * kPi);
  return d > kPi ? 2.0 * kPi - d : d;
}

double cosine_bell(double r, double r_tilde, double h_max) {
  return r < r_tilde ? 0.5 * h_max * (1.0 + std::cos(kPi * r / r_tilde)) : 0.0;
}

struct Rotated {
  double lon;
  double lat;
};

Rotated rotate(LonLat<double> pole, double lon, double lat) {
  const double dl = lon - pole.lon;
  const double y = std::cos(lat) * std::sin(dl);
  const double x = std::cos(lat) * std::sin(pole.lat) * std::cos(dl) - std::cos(pole.lat) * std::sin(lat);
  const double s = std::sin(lat) * std::sin(pole.lat) + std::cos(lat) * std::cos(pole.lat) * std::cos(dl);
  return {std::atan2(y, x), std::asin(std::clamp(s, -1.0, 1.0))};
}

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

// Tangential speed profile of the vortex, V(rho_tilde) / v0.
double vortex_profile(double rho_tilde) { return 1.5 * std::sqrt(3.0) * sech2(rho_tilde) * std::tanh(rho_tilde); }

// Angular velocity omega(theta') in 1/s.
double vortex_omega(double rho0, double lat_rot, double v0, double radius) {
  const double rho_tilde = rho0 * std::cos(lat_rot);
  if (rho_tilde == 0.0) return 0.0;
  return v0 * vortex_profile(rho_tilde) / (radius * rho_tilde);
}

// G(phi) = int_{-pi/2}^{phi} sech^2(rho0 cos x) tanh(rho0 cos x) dx, tabulated
// once and evaluated by cubic Hermite interpolation (derivative known).
class VortexIntegral {
 public:
  explicit VortexIntegral(double rho0) : rho0_(rho0) {
    h_ = kPi / kIntervals;
    values_.resize(kIntervals + 1);
    values_[0] = 0.0;
    // 5-point Gauss-Legendre on each interval
    static constexpr std::array<double, 5> x = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                                0.9061798459386640};
    static constexpr std::array<double, 5> w = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                0.2369268850561891, 0.2369268850561891};
    for (int i = 0; i < kIntervals; ++i) {
      const double a = -0.5 * kPi + i * h_;
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += w[k] * integrand(a + 0.5 * h_ * (x[k] + 1.0));
      values_[static_cast<std::size_t>(i + 1)] = values_[static_cast<std::size_t>(i)] + 0.5 * h_ * s;
    }
  }

  double rho0() const { return rho0_; }

  double integrand(double phi) const {
    const double r = rho0_ * std::cos(phi);
    return sech2(r) * std::tanh(r);
  }

  double operator()(double phi) const {
    const double u = (phi + 0.5 * kPi) / h_;
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, kIntervals - 1);
    const double t = u - i;
    const double a = -0.5 * kPi + i * h_;
    const double y0 = values_[static_cast<std::size_t>(i)];
    const double y1 = values_[static_cast<std::size_t>(i + 1)];
    const double d0 = integrand(a) * h_;
    const double d1 = integrand(a + h_) * h_;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
  }

 private:
  static constexpr int kIntervals = 8192;
  double rho0_;
  double h_;
  std::vector<double> values_;
};

const VortexIntegral& vortex_integral(double rho0) {
  static const VortexIntegral standard(3.0);
  if (rho0 == standard.rho0()) return standard;
  thread_local std::unique_ptr<VortexIntegral> other;
  if (!other || other->rho0() != rho0) other = std::make_unique<VortexIntegral>(rho0);
  return *other;
}

LonLat<double> vortex_center(const WindCase& wc, double t) {
  double lon = std::fmod(wc.pole.lon + wc.u0() * t / wc.radius, 2.0 * kPi);
  if (lon < 0.0) lon += 2.0 * kPi;
  return {lon, wc.pole.lat};
}

}  // namespace

ScalarCase ScalarCase::standard(ScalarCaseId id) {
  ScalarCase sc;
  sc.id = id;
  switch (id) {
    case ScalarCaseId::CosineBell:
      sc.r_tilde = 1.0 / 3.0;
      sc.center1 = {1.5 * kPi, 0.0};
      break;
    case ScalarCaseId::SlottedCylinder:
      sc.r_tilde = 0.5;
      sc.center1 = {1.5 * kPi, 0.0};
      break;
    case ScalarCaseId::Vortex:
      break;
    case ScalarCaseId::TwoCosineBells:
    case ScalarCaseId::TwoSlottedCylinders:
      sc.r_tilde = 0.5;
      sc.center1 = {0.75 * kPi, 0.0};
      sc.center2 = {1.25 * kPi, 0.0};
      break;
  }
  return sc;
}

WindCase WindCase::standard(WindCaseId id) {
  WindCase wc;
  wc.id = id;
  wc.k = id == WindCaseId::DeformationalDiv ? 1.0 : 2.4;
  return wc;
}

double scalar_value(const ScalarCase& sc, double lon, double lat) {
  switch (sc.id) {
    case ScalarCaseId::CosineBell:
      return cosine_bell(great_circle(sc.center1, lon, lat), sc.r_tilde, sc.h_max);
    case ScalarCaseId::SlottedCylinder: {
      const double r = great_circle(sc.center1, lon, lat);
      if (r > sc.r_tilde) return sc.b;
      if (lon_distance(lon, sc.center1.lon) >= sc.r_tilde / 6.0) return sc.c;
      return lat - sc.center1.lat < 2.0 / 3.0 * sc.r_tilde ? sc.c : sc.b;
    }
    case ScalarCaseId::Vortex: {
      const Rotated rot = rotate(sc.pole, lon, lat);
      const double rho_tilde = sc.rho0 * std::cos(rot.lat);
      return 1.0 - std::tanh(rho_tilde / sc.gamma * std::sin(rot.lon));
    }
    case ScalarCaseId::TwoCosineBells: {
      const double r1 = great_circle(sc.center1, lon, lat);
      const double r2 = great_circle(sc.center2, lon, lat);
      if (r1 < sc.r_tilde) return sc.b + sc.c * cosine_bell(r1, sc.r_tilde, sc.h_max);
      if (r2 < sc.r_tilde) return sc.b + sc.c * cosine_bell(r2, sc.r_tilde, sc.h_max);
      return sc.b;
    }
    case ScalarCaseId::TwoSlottedCylinders: {
      const double r1 = great_circle(sc.center1, lon, lat);
      const double r2 = great_circle(sc.center2, lon, lat);
      const double slot = sc.r_tilde / 6.0;
      const double d1 = lon_distance(lon, sc.center1.lon);
      const double d2 = lon_distance(lon, sc.center2.lon);
      if ((r1 <= sc.r_tilde && d1 >= slot) || (r2 <= sc.r_tilde && d2 >= slot)) return sc.c;
      if (r1 <= sc.r_tilde && d1 < slot && lat - sc.center1.lat < -5.0 / 12.0 * sc.r_tilde) return sc.c;
      if (r2 <= sc.r_tilde && d2 < slot && lat - sc.center2.lat > 5.0 / 12.0 * sc.r_tilde) return sc.c;
      return sc.b;
    }
  }
  return 0.0;
}

CellField initial_field(const ScalarCase& sc, const GridPtr& grid) {
  CellField q(grid);
  for (int j = 0; j < grid->num_cells(); ++j) {
    const auto ll = lonlat_of(grid->cell(j).center);
    q[j] = scalar_value(sc, ll.lon, ll.lat);
  }
  return q;
}

Bounds admissible_bounds(const ScalarCase& sc) {
  switch (sc.id) {
    case ScalarCaseId::CosineBell:
      return {0.0, sc.h_max};
    case ScalarCaseId::SlottedCylinder:
    case ScalarCaseId::TwoSlottedCylinders:
      return {std::min(sc.b, sc.c), std::max(sc.b, sc.c)};
    case ScalarCaseId::TwoCosineBells:
      return {sc.b, sc.b + sc.c * sc.h_max};
    case ScalarCaseId::Vortex: {
      const double a = std::tanh(sc.rho0 / sc.gamma);
      return {1.0 - a, 1.0 + a};
    }
  }
  return {};
}

WindVector wind_at(const WindCase& wc, double t, double lon, double lat) {
  const double ct = std::cos(kPi * t / wc.period);
  switch (wc.id) {
    case WindCaseId::SolidBodyRotation: {
      const double u0 = wc.u0();
      return {u0 * (std::cos(lat) * std::cos(wc.alpha) + std::sin(lat) * std::cos(lon) * std::sin(wc.alpha)),
              -u0 * std::sin(lon) * std::sin(wc.alpha)};
    }
    case WindCaseId::DeformationalNonDiv: {
      const double k = wc.deform_scale();
      const double s = std::sin(0.5 * lon);
      return {k * s * s * std::sin(2.0 * lat) * ct, 0.5 * k * std::sin(lon) * std::cos(lat) * ct};
    }
    case WindCaseId::DeformationalDiv: {
      const double k = wc.deform_scale();
      const double s = std::sin(0.5 * lon);
      const double cl = std::cos(lat);
      return {-k * s * s * std::sin(2.0 * lat) * cl * cl * ct, 0.5 * k * std::sin(lon) * cl * cl * cl * ct};
    }
    case WindCaseId::MovingVortices: {
      const double u0 = wc.u0();
      const LonLat<double> c = vortex_center(wc, t);
      const Rotated rot = rotate(c, lon, lat);
      const double omega = vortex_omega(wc.rho0, rot.lat, u0, wc.radius);
      const double dl = lon - c.lon;
      const double ve = u0 * (std::cos(lat) * std::cos(wc.alpha) + std::sin(lat) * std::cos(lon) * std::sin(wc.alpha)) +
                        wc.radius * omega * (std::sin(c.lat) * std::cos(lat) - std::cos(c.lat) * std::cos(dl) * std::sin(lat));
      const double vn = -u0 * std::sin(lon) * std::sin(wc.alpha) + wc.radius * omega * std::cos(c.lat) * std::sin(dl);
      return {ve, vn};
    }
  }
  return {};
}

Vector3d wind_vector(const WindCase& wc, double t, const Vector3d& p) {
  const auto ll = lonlat_of(p);
  const WindVector w = wind_at(wc, t, ll.lon, ll.lat);
  const auto frame = TangentFrame<double>::at(p);
  return frame.to_vector(w.east, w.north);
}

double stream_function(const WindCase& wc, double t, const Vector3d& p) {
  const auto ll = lonlat_of(p);
  const double lat = ll.lat;
  const double lon = ll.lon;
  switch (wc.id) {
    case WindCaseId::SolidBodyRotation:
      return -wc.radius * wc.u0() *
             (std::sin(lat) * std::cos(wc.alpha) - std::cos(lat) * std::cos(lon) * std::sin(wc.alpha));
    case WindCaseId::DeformationalNonDiv: {
      const double s = std::sin(0.5 * lon);
      const double cl = std::cos(lat);
      return wc.radius * wc.deform_scale() * s * s * cl * cl * std::cos(kPi * t / wc.period);
    }
    case WindCaseId::MovingVortices: {
      const double solid = -wc.radius * wc.u0() *
                           (std::sin(lat) * std::cos(wc.alpha) - std::cos(lat) * std::cos(lon) * std::sin(wc.alpha));
      const LonLat<double> c = vortex_center(wc, t);
      const Vector3d axis = unit_from_lonlat(c.lon, c.lat);
      const double lat_rot = std::asin(std::clamp(axis.dot(p.normalized()), -1.0, 1.0));
      const double amp = wc.radius * wc.u0() * 1.5 * std::sqrt(3.0) / wc.rho0;
      return solid - amp * vortex_integral(wc.rho0)(lat_rot);
    }
    case WindCaseId::DeformationalDiv:
      break;
  }
  throw std::invalid_argument("stream_function: wind case is not divergence free");
}

EdgeWind EdgeWind::reversed() const {
  EdgeWind r{normal, tangential};
  r.normal.values = -normal.values;
  r.tangential.values = -tangential.values;
  return r;
}

EdgeWind edge_normal_wind(const WindCase& wc, double t, const GridPtr& grid) {
  EdgeWind w{EdgeField(grid), EdgeField(grid)};
  const auto& edges = grid->edges();
  if (wc.divergence_free()) {
    std::vector<double> psi(static_cast<std::size_t>(grid->num_vertices()));
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = stream_function(wc, t, grid->vertices()[i].pos);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const GridEdge& edge = edges[e];
      const auto ie = static_cast<Eigen::Index>(e);
      w.normal[ie] = (psi[static_cast<std::size_t>(edge.vertex[1])] - psi[static_cast<std::size_t>(edge.vertex[0])]) /
                     edge.length;
      w.tangential[ie] = wind_vector(wc, t, edge.mid).dot(edge.tangent);
    }
  } else {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Vector3d v = wind_vector(wc, t, edges[e].mid);
      w.normal[static_cast<Eigen::Index>(e)] = v.dot(edges[e].normal);
      w.tangential[static_cast<Eigen::Index>(e)] = v.dot(edges[e].tangent);
    }
  }
  return w;
}

double analytic_divergence(const WindCase& wc, double t, double lon, double lat) {
  if (wc.id != WindCaseId::DeformationalDiv) return 0.0;
  // (1/(R cos lat)) [d(v_e)/dlon + d(v_n cos lat)/dlat], worked out by hand.
  const double k = wc.deform_scale();
  const double cl = std::cos(lat);
  return -3.0 * k * std::sin(lon) * std::sin(lat) * cl * cl * std::cos(kPi * t / wc.period) / wc.radius;
}

double moving_vortex_value(const ScalarCase& sc, const WindCase& wc, double t, double lon, double lat,
                           TimeDirection dir) {
  if (dir == TimeDirection::Backward) t = -t;
  const LonLat<double> c = vortex_center(wc, t);
  const Rotated rot = rotate(c, lon, lat);
  const double rho_tilde = sc.rho0 * std::cos(rot.lat);
  const double omega = vortex_omega(sc.rho0, rot.lat, wc.u0(), wc.radius);
  return 1.0 - std::tanh(rho_tilde / sc.gamma * std::sin(rot.lon - omega * t));
}

bool has_closed_form(const ScalarCase& sc, const WindCase& wc) {
  return sc.id == ScalarCaseId::Vortex && wc.id == WindCaseId::MovingVortices;
}

CellField exact_solution(const ScalarCase& sc, const WindCase& wc, double t, const GridPtr& grid, TimeDirection dir) {
  if (has_closed_form(sc, wc)) {
    CellField q(grid);
    for (int j = 0; j < grid->num_cells(); ++j) {
      const auto ll = lonlat_of(grid->cell(j).center);
      q[j] = moving_vortex_value(sc, wc, t, ll.lon, ll.lat, dir);
    }
    return q;
  }
  const double tol = 1e-9 * wc.period;
  if (std::abs(t) <= tol || std::abs(t - wc.period) <= tol) return initial_field(sc, grid);
  throw std::invalid_argument("exact_solution: only available at t = 0 or t = T for this case");
}

ScalarCaseId parse_scalar_case(std::string_view name) {
  if (name == "cosine_bell") return ScalarCaseId::CosineBell;
  if (name == "slotted_cylinder") return ScalarCaseId::SlottedCylinder;
  if (name == "vortex") return ScalarCaseId::Vortex;
  if (name == "two_cosine_bells") return ScalarCaseId::TwoCosineBells;
  if (name == "two_slotted_cylinders") return ScalarCaseId::TwoSlottedCylinders;
  throw std::invalid_argument("unknown scalar case: " + std::string(name));
}

WindCaseId parse_wind_case(std::string_view name) {
  if (name == "solid_rotation") return WindCaseId::SolidBodyRotation;
  if (name == "deform_nondiv") return WindCaseId::DeformationalNonDiv;
  if (name == "deform_div") return WindCaseId::DeformationalDiv;
  if (name == "moving_vortices") return WindCaseId::MovingVortices;
  throw std::invalid_argument("unknown wind case: " + std::string(name));
}

std::string to_string(ScalarCaseId id) {
  switch (id) {
    case ScalarCaseId::CosineBell: return "cosine_bell";
    case ScalarCaseId::SlottedCylinder: return "slotted_cylinder";
    case ScalarCaseId::Vortex: return "vortex";
    case ScalarCaseId::TwoCosineBells: return "two_cosine_bells";
    case ScalarCaseId::TwoSlottedCylinders: return "two_slotted_cylinders";
  }
  return "?";
}

std::string to_string(WindCaseId id) {
  switch (id) {
    case WindCaseId::SolidBodyRotation: return "solid_rotation";
    case WindCaseId::DeformationalNonDiv: return "deform_nondiv";
    case WindCaseId::DeformationalDiv: return "deform_div";
    case WindCaseId::MovingVortices: return "moving_vortices";
  }
  return "?";
}

}  // namespace icoadv
