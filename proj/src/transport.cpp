#include "icoadv/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace icoadv {

void SchemeConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("SchemeConfig: dt must be positive");
  if (!(cfl_max > 0.0 && cfl_max <= 1.0)) throw std::invalid_argument("SchemeConfig: cfl_max must be in (0, 1]");
  if (density.size() > 0 && !(density.array() > 0.0).all())
    throw std::invalid_argument("SchemeConfig: density must be positive");
}

Eigen::VectorXd density_of(const SchemeConfig& config, const SphereGrid& grid) {
  if (config.density.size() == 0) return Eigen::VectorXd::Ones(grid.num_cells());
  if (config.density.size() != grid.num_cells()) throw std::invalid_argument("SchemeConfig: density size mismatch");
  return config.density;
}

Limiter parse_limiter(std::string_view name) {
  if (name == "none") return Limiter::None;
  if (name == "minmax" || name == "fct_minmax") return Limiter::FctMinmax;
  if (name == "positive" || name == "fct_positive") return Limiter::FctPositive;
  throw std::invalid_argument("unknown limiter: " + std::string(name));
}

std::string to_string(Limiter l) {
  switch (l) {
    case Limiter::None: return "none";
    case Limiter::FctMinmax: return "minmax";
    case Limiter::FctPositive: return "positive";
  }
  return "?";
}

namespace {
std::string cfl_message(int edge, double courant, double cfl_max) {
  std::ostringstream os;
  os << "CFL violation: Courant number " << courant << " at edge " << edge << " exceeds " << cfl_max;
  return os.str();
}
}  // namespace

CflError::CflError(int edge, double courant, double cfl_max)
    : std::runtime_error(cfl_message(edge, courant, cfl_max)), edge_(edge), courant_(courant) {}

Reconstruction reconstruct(const CellField& q, Order order) {
  const SphereGrid& grid = *q.grid;
  Reconstruction rec;
  rec.value = q.values;
  rec.gradient.setZero(grid.num_cells(), 2);
  if (order == Order::Constant) return rec;
  for (int j = 0; j < grid.num_cells(); ++j) {
    const LsqStencil& s = grid.lsq()[static_cast<std::size_t>(j)];
    if (s.degenerate) {
      ++rec.degenerate_cells;
      continue;
    }
    const GridCell& c = grid.cell(j);
    const Eigen::Vector3d dq(q[c.neighbor[0]] - q[j], q[c.neighbor[1]] - q[j], q[c.neighbor[2]] - q[j]);
    rec.gradient.row(j) = (s.weights * dq).transpose();
  }
  return rec;
}

Departure departure_points(const EdgeWind& wind, double dt, const SphereGrid& grid, double cfl_max) {
  const int ne = grid.num_edges();
  Departure d;
  d.upwind.resize(ne);
  d.offset.resize(ne, 2);
  const double r = grid.radius();
  for (int e = 0; e < ne; ++e) {
    const GridEdge& ed = grid.edge(e);
    const double vn = wind.normal[e];
    const int up = vn >= 0.0 ? ed.cell[0] : ed.cell[1];
    d.upwind[e] = up;
    const GridCell& c = grid.cell(up);
    const double courant = std::abs(vn) * dt / c.inradius;
    if (courant > d.max_courant) {
      d.max_courant = courant;
      d.worst_edge = e;
    }
    const Vector3d p = (ed.mid - (0.5 * dt / r) * (vn * ed.normal + wind.tangential[e] * ed.tangent)).normalized();
    d.offset.row(e) = r * c.frame.project(p).transpose();
  }
  if (d.max_courant > cfl_max) throw CflError(d.worst_edge, d.max_courant, cfl_max);
  return d;
}

StepFluxes compute_fluxes(const Reconstruction& rec, const Departure& dep, const EdgeWind& wind,
                          const Eigen::VectorXd& rho, const SphereGrid& grid) {
  const int ne = grid.num_edges();
  StepFluxes f;
  f.flux.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const GridEdge& ed = grid.edge(e);
    const int u = dep.upwind[e];
    const double q_dep = rec.value[u] + rec.gradient.row(u).dot(dep.offset.row(e));
    const double rho_bar = 0.5 * (rho[ed.cell[0]] + rho[ed.cell[1]]);
    f.flux[e] = rho_bar * wind.normal[e] * ed.length * q_dep;
  }
  return f;
}

StepFluxes compute_fluxes(const Reconstruction& rec, const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                          const SphereGrid& grid, double cfl_max) {
  return compute_fluxes(rec, departure_points(wind, dt, grid, cfl_max), wind, rho, grid);
}

Eigen::VectorXd flux_divergence(const StepFluxes& f, const SphereGrid& grid) {
  Eigen::VectorXd div = Eigen::VectorXd::Zero(grid.num_cells());
  for (int e = 0; e < grid.num_edges(); ++e) {
    const GridEdge& ed = grid.edge(e);
    div[ed.cell[0]] += f.flux[e];
    div[ed.cell[1]] -= f.flux[e];
  }
  return div;
}

StepFluxes fct_limit(const StepFluxes& high, const StepFluxes& low, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& rho, double dt, const SphereGrid& grid, Limiter mode) {
  if (mode == Limiter::None) return high;
  const int nc = grid.num_cells();
  const Eigen::VectorXd& area = grid.areas();
  const Eigen::VectorXd anti = high.flux - low.flux;
  const Eigen::VectorXd q_td = (rho.array() * q.array() - dt * flux_divergence(low, grid).array() / area.array()) /
                               rho.array();

  Eigen::VectorXd q_min(nc), q_max(nc);
  for (int j = 0; j < nc; ++j) {
    if (mode == Limiter::FctPositive) {
      q_min[j] = 0.0;
      q_max[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    double lo = std::min(q[j], q_td[j]);
    double hi = std::max(q[j], q_td[j]);
    for (int nb : grid.cell(j).neighbor) {
      lo = std::min({lo, q[nb], q_td[nb]});
      hi = std::max({hi, q[nb], q_td[nb]});
    }
    q_min[j] = lo;
    q_max[j] = hi;
  }

  // Antidiffusive inflow/outflow per cell, in units of rho*q.
  Eigen::VectorXd p_in = Eigen::VectorXd::Zero(nc), p_out = Eigen::VectorXd::Zero(nc);
  for (int e = 0; e < grid.num_edges(); ++e) {
    const GridEdge& ed = grid.edge(e);
    const double a = anti[e];
    if (a > 0.0) {
      p_out[ed.cell[0]] += a;
      p_in[ed.cell[1]] += a;
    } else {
      p_in[ed.cell[0]] -= a;
      p_out[ed.cell[1]] -= a;
    }
  }
  Eigen::VectorXd r_plus(nc), r_minus(nc);
  for (int j = 0; j < nc; ++j) {
    const double scale = dt / area[j];
    const double pin = p_in[j] * scale;
    const double pout = p_out[j] * scale;
    const double qin = std::max(0.0, (1.0 - 1e-10) * rho[j] * (q_max[j] - q_td[j]));
    const double qout = std::max(0.0, (1.0 - 1e-10) * rho[j] * (q_td[j] - q_min[j]));
    r_plus[j] = pin > 0.0 ? std::min(1.0, qin / pin) : 0.0;
    r_minus[j] = pout > 0.0 ? std::min(1.0, qout / pout) : 0.0;
  }

  StepFluxes out;
  out.flux.resize(grid.num_edges());
  for (int e = 0; e < grid.num_edges(); ++e) {
    const GridEdge& ed = grid.edge(e);
    const double a = anti[e];
    const double c = a >= 0.0 ? std::min(r_plus[ed.cell[1]], r_minus[ed.cell[0]])
                              : std::min(r_plus[ed.cell[0]], r_minus[ed.cell[1]]);
    out.flux[e] = low.flux[e] + c * a;
  }
  return out;
}

StepFluxes transport_fluxes(const Eigen::VectorXd& q, const EdgeWind& wind, const Departure& dep,
                            const Eigen::VectorXd& rho, const SchemeConfig& config, const SphereGrid& grid) {
  const CellField qf(wind.normal.grid, q);
  StepFluxes high = compute_fluxes(reconstruct(qf, config.order), dep, wind, rho, grid);
  if (config.limiter == Limiter::None) return high;
  StepFluxes low = compute_fluxes(reconstruct(qf, Order::Constant), dep, wind, rho, grid);
  return fct_limit(high, low, q, rho, config.dt, grid, config.limiter);
}

CellField step(const CellField& q, const EdgeWind& wind, const SchemeConfig& config) {
  const SphereGrid& grid = *q.grid;
  const Eigen::VectorXd rho = density_of(config, grid);
  const Departure dep = departure_points(wind, config.dt, grid, config.cfl_max);
  const StepFluxes f = transport_fluxes(q.values, wind, dep, rho, config, grid);
  CellField out(q.grid);
  out.values = q.values.array() -
               config.dt * flux_divergence(f, grid).array() / (grid.areas().array() * rho.array());
  return out;
}

CellField step(const CellField& q, double t, const SchemeConfig& config, const WindCase& wind) {
  return step(q, edge_normal_wind(wind, t + 0.5 * config.dt, q.grid), config);
}

void WindCache::bind(const WindCase& wc, const SphereGrid* grid) {
  if (!grid_) {
    grid_ = grid;
    wind_ = wc;
    return;
  }
  if (grid_ != grid || wind_.id != wc.id || wind_.alpha != wc.alpha || wind_.k != wc.k ||
      wind_.period != wc.period || wind_.radius != wc.radius)
    throw std::invalid_argument("WindCache: shared between different winds or grids");
}

const EdgeWind* WindCache::find(double t) const {
  const auto it = winds_.find(t);
  return it == winds_.end() ? nullptr : &it->second;
}

void WindCache::insert(double t, const EdgeWind& w) {
  const std::size_t size = 2 * sizeof(double) * static_cast<std::size_t>(w.normal.size());
  if (bytes_ + size > budget_ || winds_.count(t)) return;
  winds_.emplace(t, w);
  bytes_ += size;
}

WindProvider::WindProvider(WindCase wc, GridPtr grid, std::shared_ptr<WindCache> cache)
    : wc_(wc), grid_(std::move(grid)), cache_(std::move(cache)), steady_(wc.id == WindCaseId::SolidBodyRotation) {
  if (cache_) cache_->bind(wc_, grid_.get());
}

const EdgeWind& WindProvider::at(double t) {
  if (steady_ && t_cached_) return cached_;
  if (t_cached_ && *t_cached_ == t) return shared_ ? *shared_ : cached_;
  t_cached_ = t;
  shared_ = nullptr;
  if (cache_ && !steady_) {
    if ((shared_ = cache_->find(t))) return *shared_;
    cached_ = edge_normal_wind(wc_, t, grid_);
    cache_->insert(t, cached_);
    return cached_;
  }
  cached_ = edge_normal_wind(wc_, t, grid_);
  return cached_;
}

int steps_for(double t_end, double dt) {
  if (t_end < 0.0) throw std::invalid_argument("run: negative end time");
  const double n = std::round(t_end / dt);
  if (std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end))
    throw std::invalid_argument("run: end time is not a whole number of steps");
  return static_cast<int>(n);
}

ForwardTrajectory::ForwardTrajectory(GridPtr grid, SchemeConfig config, WindCase wind, int n_steps, int stride,
                                     std::shared_ptr<WindCache> winds)
    : grid_(std::move(grid)),
      config_(std::move(config)),
      wind_(wind),
      n_steps_(n_steps),
      stride_(stride),
      winds_(std::move(winds)) {
  if (stride_ < 1) throw std::invalid_argument("ForwardTrajectory: stride must be >= 1");
  stored_.resize(static_cast<std::size_t>(n_steps_ / stride_ + 1));
}

void ForwardTrajectory::store(int n, const Eigen::VectorXd& q) {
  if (n % stride_ == 0) stored_[static_cast<std::size_t>(n / stride_)] = q;
}

const Eigen::VectorXd& ForwardTrajectory::level(int n) const {
  if (n < 0 || n > n_steps_) throw std::out_of_range("ForwardTrajectory: level out of range");
  if (n % stride_ == 0) return stored_[static_cast<std::size_t>(n / stride_)];
  const int seg = n / stride_;
  if (seg != segment_) {
    segment_levels_.assign(static_cast<std::size_t>(stride_), Eigen::VectorXd());
    WindProvider winds(wind_, grid_, winds_);
    CellField q(grid_, stored_[static_cast<std::size_t>(seg)]);
    const int base = seg * stride_;
    for (int k = 1; k < stride_ && base + k <= n_steps_; ++k) {
      q = step(q, winds.at(step_wind_time(base + k - 1, config_.dt)), config_);
      segment_levels_[static_cast<std::size_t>(k)] = q.values;
    }
    segment_ = seg;
  }
  return segment_levels_[static_cast<std::size_t>(n - seg * stride_)];
}

ForwardResult run_forward(const CellField& q0, double t_end, const SchemeConfig& config, const WindCase& wind,
                          bool record, int checkpoint_stride, std::shared_ptr<WindCache> wind_cache) {
  config.validate();
  const int n_steps = steps_for(t_end, config.dt);
  ForwardResult res{q0, std::nullopt, 0.0};
  if (record) {
    res.trajectory.emplace(q0.grid, config, wind, n_steps, checkpoint_stride, wind_cache);
    res.trajectory->store(0, q0.values);
  }
  const SphereGrid& grid = *q0.grid;
  const Eigen::VectorXd rho = density_of(config, grid);
  WindProvider winds(wind, q0.grid, wind_cache);
  CellField& q = res.q_final;
  for (int n = 0; n < n_steps; ++n) {
    const EdgeWind& w = winds.at(step_wind_time(n, config.dt));
    const Departure dep = departure_points(w, config.dt, grid, config.cfl_max);
    res.max_courant = std::max(res.max_courant, dep.max_courant);
    const StepFluxes f = transport_fluxes(q.values, w, dep, rho, config, grid);
    q.values.array() -= config.dt * flux_divergence(f, grid).array() / (grid.areas().array() * rho.array());
    if (record) res.trajectory->store(n + 1, q.values);
  }
  return res;
}

}  // namespace icoadv
