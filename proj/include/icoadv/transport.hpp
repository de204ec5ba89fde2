#ifndef ICOADV_TRANSPORT_HPP_
#define ICOADV_TRANSPORT_HPP_

// Flux-form finite-volume transport on the triangular grid: per-cell linear
// reconstruction, upwind departure-point fluxes, optional Zalesak FCT and a
// single explicit Euler stage per step.

#include "icoadv/cases.hpp"
#include "icoadv/fields.hpp"
#include "icoadv/grid.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace icoadv {

enum class Order { Constant = 1, Linear = 2 };
enum class Limiter { None, FctMinmax, FctPositive };

struct SchemeConfig {
  Order order = Order::Linear;
  Limiter limiter = Limiter::None;
  double dt = 600.0;
  double cfl_max = 0.8;
  Eigen::VectorXd density;  // static rho per cell; empty means rho = 1

  void validate() const;
};

Eigen::VectorXd density_of(const SchemeConfig& config, const SphereGrid& grid);

Limiter parse_limiter(std::string_view name);
std::string to_string(Limiter l);

class CflError : public std::runtime_error {
 public:
  CflError(int edge, double courant, double cfl_max);
  int edge() const { return edge_; }
  double courant() const { return courant_; }

 private:
  int edge_;
  double courant_;
};

struct Reconstruction {
  Eigen::VectorXd value;
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradient;  // per meter, (east, north) of the cell frame
  int degenerate_cells = 0;
};

Reconstruction reconstruct(const CellField& q, Order order);

/// Upwind cell and departure-point offset (meters, upwind cell frame) of
/// every edge for one wind field.
struct Departure {
  Eigen::VectorXi upwind;
  Eigen::Matrix<double, Eigen::Dynamic, 2> offset;
  double max_courant = 0.0;
  int worst_edge = -1;
};

Departure departure_points(const EdgeWind& wind, double dt, const SphereGrid& grid, double cfl_max);

struct StepFluxes {
  Eigen::VectorXd flux;  // per edge, positive from owner to neighbor
};

StepFluxes compute_fluxes(const Reconstruction& rec, const Departure& dep, const EdgeWind& wind,
                          const Eigen::VectorXd& rho, const SphereGrid& grid);
StepFluxes compute_fluxes(const Reconstruction& rec, const EdgeWind& wind, const Eigen::VectorXd& rho, double dt,
                          const SphereGrid& grid, double cfl_max = 0.8);

/// sum_e s_e F_e per cell.
Eigen::VectorXd flux_divergence(const StepFluxes& f, const SphereGrid& grid);

StepFluxes fct_limit(const StepFluxes& high, const StepFluxes& low, const Eigen::VectorXd& q,
                     const Eigen::VectorXd& rho, double dt, const SphereGrid& grid, Limiter mode);

/// Limited (if configured) fluxes of q for one step.
StepFluxes transport_fluxes(const Eigen::VectorXd& q, const EdgeWind& wind, const Departure& dep,
                            const Eigen::VectorXd& rho, const SchemeConfig& config, const SphereGrid& grid);

CellField step(const CellField& q, const EdgeWind& wind, const SchemeConfig& config);
/// One step from t to t + dt; the wind is taken at t + dt/2.
CellField step(const CellField& q, double t, const SchemeConfig& config, const WindCase& wind);

/// Edge winds keyed by time, shared between repeated runs of the same
/// problem. Bound to the first (wind, grid) pair it sees. Stops storing once
/// the byte budget is used up.
class WindCache {
 public:
  explicit WindCache(std::size_t budget_bytes = std::size_t(1) << 29) : budget_(budget_bytes) {}
  void bind(const WindCase& wc, const SphereGrid* grid);
  const EdgeWind* find(double t) const;
  void insert(double t, const EdgeWind& w);
  std::size_t bytes() const { return bytes_; }

 private:
  std::size_t budget_;
  std::size_t bytes_ = 0;
  const SphereGrid* grid_ = nullptr;
  WindCase wind_;
  std::unordered_map<double, EdgeWind> winds_;
};

/// Edge winds per time level; steady winds are built once.
class WindProvider {
 public:
  WindProvider(WindCase wc, GridPtr grid, std::shared_ptr<WindCache> cache = nullptr);
  const EdgeWind& at(double t);
  const WindCase& wind_case() const { return wc_; }

 private:
  WindCase wc_;
  GridPtr grid_;
  std::shared_ptr<WindCache> cache_;
  bool steady_;
  std::optional<double> t_cached_;
  EdgeWind cached_;
  const EdgeWind* shared_ = nullptr;
};

inline double step_wind_time(int n, double dt) { return (n + 0.5) * dt; }

int steps_for(double t_end, double dt);

/// q^0..q^{N_T}; stride 1 keeps every level, larger strides keep checkpoints
/// and recompute the rest on demand.
class ForwardTrajectory {
 public:
  ForwardTrajectory(GridPtr grid, SchemeConfig config, WindCase wind, int n_steps, int stride,
                    std::shared_ptr<WindCache> winds = nullptr);

  const GridPtr& grid() const { return grid_; }
  double dt() const { return config_.dt; }
  int num_steps() const { return n_steps_; }
  int stride() const { return stride_; }
  const SchemeConfig& config() const { return config_; }
  const WindCase& wind_case() const { return wind_; }
  const std::shared_ptr<WindCache>& wind_cache() const { return winds_; }

  void store(int n, const Eigen::VectorXd& q);
  /// Level n; with checkpointing, recomputes the enclosing segment once.
  const Eigen::VectorXd& level(int n) const;
  CellField field(int n) const { return CellField(grid_, level(n)); }

 private:
  GridPtr grid_;
  SchemeConfig config_;
  WindCase wind_;
  int n_steps_;
  int stride_;
  std::shared_ptr<WindCache> winds_;
  std::vector<Eigen::VectorXd> stored_;
  mutable int segment_ = -1;
  mutable std::vector<Eigen::VectorXd> segment_levels_;
};

struct ForwardResult {
  CellField q_final;
  std::optional<ForwardTrajectory> trajectory;
  double max_courant = 0.0;
};

ForwardResult run_forward(const CellField& q0, double t_end, const SchemeConfig& config, const WindCase& wind,
                          bool record = false, int checkpoint_stride = 1,
                          std::shared_ptr<WindCache> winds = nullptr);

}  // namespace icoadv

#endif  // ICOADV_TRANSPORT_HPP_
