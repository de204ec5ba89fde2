#ifndef ICOADV_CASES_HPP_
#define ICOADV_CASES_HPP_

// Analytic initial fields and wind fields for the standard spherical
// advection tests (cosine bells, slotted cylinders, moving vortices,
// solid-body rotation and the deformational flows).
//
// Coordinates: lon in [0, 2pi), lat in [-pi/2, pi/2]. Winds are returned as
// (eastward, northward) components in m/s.

#include "icoadv/fields.hpp"
#include "icoadv/grid.hpp"

#include <numbers>
#include <string>
#include <string_view>

namespace icoadv {

inline constexpr double kPeriod = 1036800.0;  // s, 12 days

enum class ScalarCaseId { CosineBell, SlottedCylinder, Vortex, TwoCosineBells, TwoSlottedCylinders };
enum class WindCaseId { SolidBodyRotation, DeformationalNonDiv, DeformationalDiv, MovingVortices };

struct ScalarCase {
  ScalarCaseId id = ScalarCaseId::CosineBell;
  double h_max = 1.0;
  double r_tilde = 1.0 / 3.0;  // radians
  double c = 1.0;
  double b = 0.0;
  LonLat<double> center1{1.5 * std::numbers::pi, 0.0};
  LonLat<double> center2{0.0, 0.0};
  // vortex
  double gamma = 5.0;
  double rho0 = 3.0;
  LonLat<double> pole{std::numbers::pi - 0.8 + std::numbers::pi / 4.0, std::numbers::pi / 4.8};
  double radius = kEarthRadius;
  double period = kPeriod;

  /// Parameters as tabulated for each case.
  static ScalarCase standard(ScalarCaseId id);
};

struct WindCase {
  WindCaseId id = WindCaseId::SolidBodyRotation;
  double radius = kEarthRadius;
  double period = kPeriod;
  double alpha = 0.0;
  double k = 2.4;
  // The deformational flows are tabulated for a reference period of 5 time
  // units on the unit sphere; velocities are scaled by radius*5/period.
  double reference_period = 5.0;
  double rho0 = 3.0;
  LonLat<double> pole{std::numbers::pi - 0.8 + std::numbers::pi / 4.0, std::numbers::pi / 4.8};

  static WindCase standard(WindCaseId id);

  double u0() const { return 2.0 * std::numbers::pi * radius / period; }
  double deform_scale() const { return k * radius * reference_period / period; }
  bool divergence_free() const { return id != WindCaseId::DeformationalDiv; }
};

struct WindVector {
  double east = 0.0;
  double north = 0.0;
};

/// Edge winds for one time level: normal component (owner -> neighbor) and
/// tangential component along GridEdge::tangent.
struct EdgeWind {
  EdgeField normal;
  EdgeField tangential;

  EdgeWind reversed() const;
};

enum class TimeDirection { Forward, Backward };

double scalar_value(const ScalarCase& sc, double lon, double lat);
CellField initial_field(const ScalarCase& sc, const GridPtr& grid);
Bounds admissible_bounds(const ScalarCase& sc);

WindVector wind_at(const WindCase& wc, double t, double lon, double lat);
Vector3d wind_vector(const WindCase& wc, double t, const Vector3d& p);

/// Stream function psi with v = r_hat x grad(psi); only for divergence-free
/// cases (m^2/s).
double stream_function(const WindCase& wc, double t, const Vector3d& p);

/// Edge winds at time t. Divergence-free cases take the normal component
/// from stream-function differences across each edge so the discrete
/// divergence vanishes to round-off; the divergent case samples the wind at
/// the edge midpoint.
EdgeWind edge_normal_wind(const WindCase& wc, double t, const GridPtr& grid);

/// Horizontal divergence of the analytic wind (1/s).
double analytic_divergence(const WindCase& wc, double t, double lon, double lat);

/// Moving-vortex closed form at time t (backward = forward at -t).
double moving_vortex_value(const ScalarCase& sc, const WindCase& wc, double t, double lon, double lat,
                           TimeDirection dir = TimeDirection::Forward);

/// Exact solution where known: every case at t = 0 or t = period, and the
/// vortex field under the moving-vortices wind at any t.
CellField exact_solution(const ScalarCase& sc, const WindCase& wc, double t, const GridPtr& grid,
                         TimeDirection dir = TimeDirection::Forward);

bool has_closed_form(const ScalarCase& sc, const WindCase& wc);

ScalarCaseId parse_scalar_case(std::string_view name);
WindCaseId parse_wind_case(std::string_view name);
std::string to_string(ScalarCaseId id);
std::string to_string(WindCaseId id);

}  // namespace icoadv

#endif  // ICOADV_CASES_HPP_
