#include "icoadv/adjoint.hpp"

#include <vector>

namespace icoadv {

namespace {

void require_unlimited(const SchemeConfig& config) {
  if (config.limiter != Limiter::None)
    throw std::invalid_argument("standard adjoint undefined for limited scheme");
}

}  // namespace

LinearFluxOperator assemble_forward_operator(const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                                             const SphereGrid& grid, const SchemeConfig& config, int level) {
  require_unlimited(config);
  const Departure dep = departure_points(wind, dt, grid, config.cfl_max);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(grid.num_edges()) * 8);
  for (int e = 0; e < grid.num_edges(); ++e) {
    const GridEdge& ed = grid.edge(e);
    const double coef = 0.5 * (rho[ed.cell[0]] + rho[ed.cell[1]]) * wind.normal[e] * ed.length;
    if (coef == 0.0) continue;
    const int u = dep.upwind[e];
    const LsqStencil& s = grid.lsq()[static_cast<std::size_t>(u)];
    auto add = [&](int col, double w) {
      trip.emplace_back(ed.cell[0], col, coef * w);
      trip.emplace_back(ed.cell[1], col, -coef * w);
    };
    if (config.order == Order::Constant || s.degenerate) {
      add(u, 1.0);
      continue;
    }
    const Eigen::RowVector3d g = dep.offset.row(e) * s.weights;
    add(u, 1.0 - g.sum());
    for (int k = 0; k < 3; ++k) add(grid.cell(u).neighbor[k], g[k]);
  }
  LinearFluxOperator op;
  op.m.resize(grid.num_cells(), grid.num_cells());
  op.m.setFromTriplets(trip.begin(), trip.end());
  op.m.makeCompressed();
  op.area = grid.areas();
  op.level = level;
  return op;
}

LinearFluxOperator probe_forward_operator(const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                                          const SphereGrid& grid, const SchemeConfig& config, int level) {
  require_unlimited(config);
  const Departure dep = departure_points(wind, dt, grid, config.cfl_max);
  const int nc = grid.num_cells();
  std::vector<Eigen::Triplet<double>> trip;
  CellField unit(wind.normal.grid);
  for (int i = 0; i < nc; ++i) {
    unit.values.setZero();
    unit[i] = 1.0;
    const Eigen::VectorXd col =
        flux_divergence(compute_fluxes(reconstruct(unit, config.order), dep, wind, rho, grid), grid);
    for (int j = 0; j < nc; ++j)
      if (col[j] != 0.0) trip.emplace_back(j, i, col[j]);
  }
  LinearFluxOperator op;
  op.m.resize(nc, nc);
  op.m.setFromTriplets(trip.begin(), trip.end());
  op.area = grid.areas();
  op.level = level;
  return op;
}

AdjointForcing AdjointForcing::zero(int num_cells) {
  return {[num_cells](int) { return Eigen::VectorXd::Zero(num_cells).eval(); }};
}

Eigen::VectorXd standard_adjoint_step(const Eigen::VectorXd& qstar_next, const LinearFluxOperator& op,
                                      const Eigen::VectorXd& forcing, const Eigen::VectorXd& rho, double dt,
                                      int level) {
  if (level >= 0 && op.level >= 0 && level != op.level)
    throw std::invalid_argument("standard_adjoint_step: operator assembled for another level");
  const Eigen::VectorXd mt = op.m.transpose() * qstar_next;
  return (rho.array() * qstar_next.array() - dt * mt.array() / op.area.array() - dt * forcing.array()) / rho.array();
}

Eigen::VectorXd artsource_adjoint_step(const Eigen::VectorXd& qstar_next, const EdgeWind& wind,
                                       const Eigen::VectorXd& rho, double dt, const Eigen::VectorXd& forcing,
                                       const SphereGrid& grid, const SchemeConfig& config) {
  const EdgeWind back = wind.reversed();
  const Departure dep = departure_points(back, dt, grid, config.cfl_max);
  const Eigen::VectorXd g = flux_divergence(transport_fluxes(qstar_next, back, dep, rho, config, grid), grid);
  Reconstruction ones;
  ones.value = Eigen::VectorXd::Ones(grid.num_cells());
  ones.gradient.setZero(grid.num_cells(), 2);
  const Eigen::VectorXd g1 = flux_divergence(compute_fluxes(ones, dep, back, rho, grid), grid);
  const Eigen::VectorXd src = g.array() - qstar_next.array() * g1.array();
  return (rho.array() * qstar_next.array() - dt * src.array() / grid.areas().array() - dt * forcing.array()) /
         rho.array();
}

AdjointMethod parse_adjoint_method(std::string_view name) {
  if (name == "standard") return AdjointMethod::Standard;
  if (name == "artsource") return AdjointMethod::ArtSource;
  throw std::invalid_argument("unknown adjoint method: " + std::string(name));
}

std::string to_string(AdjointMethod m) { return m == AdjointMethod::Standard ? "standard" : "artsource"; }

CellField run_adjoint(AdjointMethod method, const ForwardTrajectory& traj, const AdjointForcing& forcing,
                      const SchemeConfig& config) {
  const GridPtr& grid = traj.grid();
  const SphereGrid& g = *grid;
  const double dt = traj.dt();
  const Eigen::VectorXd rho = density_of(traj.config(), g);
  if (method == AdjointMethod::Standard) require_unlimited(traj.config());
  WindProvider winds(traj.wind_case(), grid, traj.wind_cache());
  const bool steady = traj.wind_case().id == WindCaseId::SolidBodyRotation;
  std::optional<LinearFluxOperator> op;

  const int nt = traj.num_steps();
  Eigen::VectorXd qstar = Eigen::VectorXd::Zero(g.num_cells());
  qstar.array() -= dt * forcing.at(nt).array() / rho.array();
  for (int n = nt - 1; n >= 0; --n) {
    const EdgeWind& w = winds.at(step_wind_time(n, dt));
    const Eigen::VectorXd f = forcing.at(n);
    if (method == AdjointMethod::Standard) {
      if (!op || !steady) op = assemble_forward_operator(w, rho, dt, g, traj.config(), n);
      qstar = standard_adjoint_step(qstar, *op, f, rho, dt, steady ? -1 : n);
    } else {
      qstar = artsource_adjoint_step(qstar, w, rho, dt, f, g, config);
    }
  }
  return CellField(grid, qstar);
}

}  // namespace icoadv
