#include "icoadv/checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace icoadv {

namespace {

Eigen::VectorXd uniform_field(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

}  // namespace

DualityReport duality_check(const GridPtr& grid, const WindCase& wind, const SchemeConfig& config, int pairs,
                            std::uint64_t seed, double t) {
  if (config.limiter != Limiter::None) throw std::invalid_argument("duality_check: needs the unlimited scheme");
  const SphereGrid& g = *grid;
  const Eigen::VectorXd rho = density_of(config, g);
  const Eigen::VectorXd w = rho.cwiseProduct(g.areas());
  const EdgeWind ew = edge_normal_wind(wind, t + 0.5 * config.dt, grid);
  const LinearFluxOperator op = assemble_forward_operator(ew, rho, config.dt, g, config);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.num_cells());
  std::mt19937_64 rng(seed);
  DualityReport rep;
  rep.pairs = pairs;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd q = uniform_field(g.num_cells(), rng);
    const Eigen::VectorXd qs = uniform_field(g.num_cells(), rng);
    const Eigen::VectorXd fq = step(CellField(grid, q), ew, config).values;
    const Eigen::VectorXd aq = standard_adjoint_step(qs, op, zero, rho, config.dt);
    const double lhs = w.dot(fq.cwiseProduct(qs));
    const double rhs = w.dot(q.cwiseProduct(aq));
    const double scale = std::abs(lhs) + std::abs(w.dot(q.cwiseProduct(qs)));
    rep.max_rel = std::max(rep.max_rel, std::abs(lhs - rhs) / scale);
  }
  return rep;
}

RetroReport retro_check(AdjointMethod method, const GridPtr& grid, const WindCase& wind, const SchemeConfig& config,
                        int steps, std::uint64_t seed) {
  const SphereGrid& g = *grid;
  const Eigen::VectorXd rho = density_of(config, g);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.num_cells());
  std::mt19937_64 rng(seed);
  Eigen::VectorXd q = uniform_field(g.num_cells(), rng).array() + 1.0;
  RetroReport rep;
  rep.steps = steps;
  for (int n = 0; n < steps; ++n) {
    const EdgeWind ew = edge_normal_wind(wind, step_wind_time(n, config.dt), grid);
    const Eigen::VectorXd fwd = step(CellField(grid, q), ew.reversed(), config).values;
    Eigen::VectorXd adj;
    if (method == AdjointMethod::Standard) {
      const LinearFluxOperator op = assemble_forward_operator(ew, rho, config.dt, g, config);
      adj = standard_adjoint_step(q, op, zero, rho, config.dt);
    } else {
      adj = artsource_adjoint_step(q, ew, rho, config.dt, zero, g, config);
    }
    rep.max_rel = std::max(rep.max_rel, (adj - fwd).cwiseAbs().maxCoeff() / q.cwiseAbs().maxCoeff());
    q = fwd;
  }
  return rep;
}

Eigen::VectorXd smooth_direction(const SphereGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double c[10];
  for (double& v : c) v = nd(rng);
  Eigen::VectorXd d(grid.num_cells());
  for (int j = 0; j < grid.num_cells(); ++j) {
    const Vector3d& p = grid.cell(j).center;
    const double x = p.x(), y = p.y(), z = p.z();
    d[j] = c[0] + c[1] * x + c[2] * y + c[3] * z + c[4] * x * y + c[5] * y * z + c[6] * z * x +
           c[7] * (x * x - y * y) + c[8] * (3 * z * z - 1) + c[9] * x * y * z;
  }
  return d.normalized();
}

Eigen::VectorXd random_direction(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = nd(rng);
  return d.normalized();
}

double GradientCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& d : directions) m = std::max(m, d.rel_error);
  return m;
}

GradientCheckReport gradient_check(const AssimProblem& problem, AdjointMethod method, const CellField& x,
                                   const std::vector<Eigen::VectorXd>& directions,
                                   const std::vector<double>& eps_list) {
  const Eigen::VectorXd grad = gradient(x, problem, method).values;
  GradientCheckReport rep;
  for (const Eigen::VectorXd& d : directions) {
    GradientCheckDirection r;
    r.adjoint = grad.dot(d);
    r.rel_error = INFINITY;
    for (double eps : eps_list) {
      CellField xp = x, xm = x;
      xp.values += eps * d;
      xm.values -= eps * d;
      const double fd = (cost(xp, problem).total - cost(xm, problem).total) / (2.0 * eps);
      const double err = std::abs(fd - r.adjoint) / std::max(std::abs(r.adjoint), 1e-300);
      r.eps.push_back(eps);
      r.errors.push_back(err);
      if (err < r.rel_error) {
        r.rel_error = err;
        r.best_fd = fd;
        r.best_eps = eps;
      }
    }
    rep.directions.push_back(std::move(r));
  }
  return rep;
}

}  // namespace icoadv
