#ifndef ICOADV_ASSIM_HPP_
#define ICOADV_ASSIM_HPP_

#include "icoadv/adjoint.hpp"
#include "icoadv/lbfgs.hpp"

#include <iosfwd>
#include <numbers>
#include <vector>

namespace icoadv {

struct ObservationSet {
  std::vector<int> cells;
  std::vector<Eigen::VectorXd> values;  // values[n][k] at cells[k], n = 0..N_T

  int num_obs() const { return static_cast<int>(cells.size()); }
  int num_levels() const { return static_cast<int>(values.size()); }
  void validate(int num_cells) const;

  void write_csv(std::ostream& os) const;
  static ObservationSet read_csv(std::istream& is);
};

enum class TruthSource { Exact, ReferenceRun };
enum class BackgroundMode { Uniform10pct, HalfDomain };

TruthSource parse_truth_source(std::string_view name);
BackgroundMode parse_background_mode(std::string_view name);
std::string to_string(BackgroundMode m);

/// Evenly strided cell subset starting at index 0 (stride = N_c / N_o).
std::vector<int> observation_indices(int num_cells, int num_obs);

/// Observations of the truth at every time level. ReferenceRun integrates
/// the model (reference_config) from the initial truth.
ObservationSet make_observations(TruthSource source, const ScalarCase& sc, const WindCase& wc, int num_obs,
                                 const GridPtr& grid, const SchemeConfig& reference_config, double horizon);

CellField make_background(const CellField& q0, BackgroundMode mode, double split_lon = std::numbers::pi);

struct AssimProblem {
  GridPtr grid;
  WindCase wind;
  SchemeConfig config;
  double horizon = kPeriod;
  CellField background;
  ObservationSet obs;
  double w_b = 0.5;
  double w_o = 0.5;
  int checkpoint_stride = 1;
  std::shared_ptr<WindCache> winds = std::make_shared<WindCache>();

  void validate() const;
  int num_steps() const { return steps_for(horizon, config.dt); }
  /// Diagonal of K^b over all cells.
  Eigen::VectorXd background_kernel() const;
  /// Diagonal of K^o over the observed cells (same order as obs.cells).
  Eigen::VectorXd observation_kernel() const;
};

struct CostBreakdown {
  double total = 0.0;
  double jb = 0.0;
  double jo = 0.0;
};

CostBreakdown cost(const CellField& q0, const AssimProblem& problem);

struct Evaluation {
  CostBreakdown cost;
  CellField gradient;
};

/// Cost and gradient from one forward run and one adjoint sweep.
Evaluation evaluate(const CellField& q0, const AssimProblem& problem, AdjointMethod method);

CellField gradient(const CellField& q0, const AssimProblem& problem, AdjointMethod method);

/// L-BFGS from the background. A line-search failure moves the background to
/// the current iterate (so `problem` is modified) and restarts.
LbfgsResult minimize(AssimProblem& problem, AdjointMethod method, const LbfgsConfig& config);

}  // namespace icoadv

#endif  // ICOADV_ASSIM_HPP_
