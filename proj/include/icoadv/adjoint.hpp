#ifndef ICOADV_ADJOINT_HPP_
#define ICOADV_ADJOINT_HPP_

#include "icoadv/transport.hpp"

#include <Eigen/Sparse>

#include <functional>

namespace icoadv {

/// (M q)_j = sum_e s_e F_e(q) for the unlimited scheme at one time level.
struct LinearFluxOperator {
  Eigen::SparseMatrix<double, Eigen::RowMajor> m;
  Eigen::VectorXd area;
  int level = -1;
};

LinearFluxOperator assemble_forward_operator(const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                                             const SphereGrid& grid, const SchemeConfig& config, int level = -1);

/// Same operator built column by column from unit-vector probes of the flux
/// code. Quadratic cost; meant for checking small grids.
LinearFluxOperator probe_forward_operator(const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                                          const SphereGrid& grid, const SchemeConfig& config, int level = -1);

/// Per-level adjoint source (1/s units of rho q*), zero off observed cells.
struct AdjointForcing {
  std::function<Eigen::VectorXd(int)> at;

  static AdjointForcing zero(int num_cells);
};

Eigen::VectorXd standard_adjoint_step(const Eigen::VectorXd& qstar_next, const LinearFluxOperator& op,
                                      const Eigen::VectorXd& forcing, const Eigen::VectorXd& rho, double dt,
                                      int level = -1);

Eigen::VectorXd artsource_adjoint_step(const Eigen::VectorXd& qstar_next, const EdgeWind& wind,
                                       const Eigen::VectorXd& rho, double dt, const Eigen::VectorXd& forcing,
                                       const SphereGrid& grid, const SchemeConfig& config);

enum class AdjointMethod { Standard, ArtSource };

AdjointMethod parse_adjoint_method(std::string_view name);
std::string to_string(AdjointMethod m);

/// Backward sweep from q*(T) = 0. The forcing of level n is applied after the
/// transport step that brings q* from level n+1 to n (and alone at n = N_T).
/// config is the scheme used for the artificial-source sweep; the standard
/// method always transposes the trajectory's own (unlimited) scheme.
CellField run_adjoint(AdjointMethod method, const ForwardTrajectory& traj, const AdjointForcing& forcing,
                      const SchemeConfig& config);

}  // namespace icoadv

#endif  // ICOADV_ADJOINT_HPP_
