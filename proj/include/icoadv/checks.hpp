#ifndef ICOADV_CHECKS_HPP_
#define ICOADV_CHECKS_HPP_
// Property checks shared by the CLI and the test suites: transpose duality,
// retro-transport equivalence and finite-difference gradient checks.

#include "icoadv/assim.hpp"

#include <cstdint>
#include <vector>

namespace icoadv {

struct DualityReport {
  int pairs = 0;
  double max_rel = 0.0;  // |<F q, q*>_w - <q, A q*>_w| / (|<F q, q*>_w| + |<q, q*>_w|)
};

/// One unlimited forward step F against one standard adjoint step A with zero
/// forcing, in the rho*area weighted inner product, for random (q, q*) pairs.
DualityReport duality_check(const GridPtr& grid, const WindCase& wind, const SchemeConfig& config, int pairs,
                            std::uint64_t seed, double t = 0.0);

struct RetroReport {
  int steps = 0;
  double max_rel = 0.0;  // max over steps of max|adjoint - reversed forward| / max|q*|
};

/// Adjoint steps with zero forcing compared with forward steps under the
/// reversed wind, each started from the same random field.
RetroReport retro_check(AdjointMethod method, const GridPtr& grid, const WindCase& wind, const SchemeConfig& config,
                        int steps, std::uint64_t seed);

/// Random direction built from low-degree polynomials of the cell centers,
/// unit l2 norm.
Eigen::VectorXd smooth_direction(const SphereGrid& grid, std::uint64_t seed);
/// Gaussian white-noise direction, unit l2 norm.
Eigen::VectorXd random_direction(int n, std::uint64_t seed);

struct GradientCheckDirection {
  double adjoint = 0.0;       // <grad J, d>
  double best_fd = 0.0;       // central difference at the plateau
  double best_eps = 0.0;
  double rel_error = 0.0;     // plateau relative error
  std::vector<double> eps;
  std::vector<double> errors;
};

struct GradientCheckReport {
  std::vector<GradientCheckDirection> directions;
  double max_rel_error() const;
};

/// Central differences of cost() along each direction for eps in eps_list;
/// the plateau is the eps with the smallest relative error.
GradientCheckReport gradient_check(const AssimProblem& problem, AdjointMethod method, const CellField& x,
                                   const std::vector<Eigen::VectorXd>& directions,
                                   const std::vector<double>& eps_list = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7});

}  // namespace icoadv

#endif  // ICOADV_CHECKS_HPP_
