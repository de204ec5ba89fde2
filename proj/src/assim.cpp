#include "icoadv/assim.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace icoadv {

void ObservationSet::validate(int num_cells) const {
  std::vector<char> seen(static_cast<std::size_t>(num_cells), 0);
  for (int c : cells) {
    if (c < 0 || c >= num_cells) throw std::invalid_argument("ObservationSet: cell index out of range");
    if (seen[static_cast<std::size_t>(c)]++) throw std::invalid_argument("ObservationSet: duplicate cell index");
  }
  for (const auto& v : values)
    if (v.size() != num_obs()) throw std::invalid_argument("ObservationSet: value array has wrong length");
}

void ObservationSet::write_csv(std::ostream& os) const {
  os << "n,cell,value\n";
  char buf[64];
  for (std::size_t n = 0; n < values.size(); ++n)
    for (std::size_t k = 0; k < cells.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[n][static_cast<Eigen::Index>(k)]);
      os << n << ',' << cells[k] << ',' << buf << '\n';
    }
}

ObservationSet ObservationSet::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,cell,value", 0) != 0)
    throw std::invalid_argument("ObservationSet: missing header n,cell,value");
  std::map<int, std::map<int, double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    int n = 0, cell = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(ls >> n >> c1 >> cell >> c2 >> v) || c1 != ',' || c2 != ',')
      throw std::invalid_argument("ObservationSet: malformed line: " + line);
    rows[n][cell] = v;
  }
  ObservationSet obs;
  if (rows.empty()) return obs;
  for (const auto& [cell, v] : rows.begin()->second) obs.cells.push_back(cell);
  int expect = 0;
  for (const auto& [n, m] : rows) {
    if (n != expect++) throw std::invalid_argument("ObservationSet: time levels are not contiguous from 0");
    if (m.size() != obs.cells.size()) throw std::invalid_argument("ObservationSet: cell set changes between levels");
    Eigen::VectorXd v(static_cast<Eigen::Index>(m.size()));
    Eigen::Index k = 0;
    for (const auto& [cell, val] : m) {
      if (cell != obs.cells[static_cast<std::size_t>(k)])
        throw std::invalid_argument("ObservationSet: cell set changes between levels");
      v[k++] = val;
    }
    obs.values.push_back(std::move(v));
  }
  return obs;
}

TruthSource parse_truth_source(std::string_view name) {
  if (name == "exact") return TruthSource::Exact;
  if (name == "reference" || name == "reference-run") return TruthSource::ReferenceRun;
  throw std::invalid_argument("unknown truth source: " + std::string(name));
}

BackgroundMode parse_background_mode(std::string_view name) {
  if (name == "uniform10pct") return BackgroundMode::Uniform10pct;
  if (name == "halfdomain") return BackgroundMode::HalfDomain;
  throw std::invalid_argument("unknown background mode: " + std::string(name));
}

std::string to_string(BackgroundMode m) { return m == BackgroundMode::Uniform10pct ? "uniform10pct" : "halfdomain"; }

std::vector<int> observation_indices(int num_cells, int num_obs) {
  if (num_obs < 1 || num_obs > num_cells) throw std::invalid_argument("observation count must be in [1, N_c]");
  const int stride = num_cells / num_obs;
  std::vector<int> idx(static_cast<std::size_t>(num_obs));
  for (int k = 0; k < num_obs; ++k) idx[static_cast<std::size_t>(k)] = k * stride;
  return idx;
}

ObservationSet make_observations(TruthSource source, const ScalarCase& sc, const WindCase& wc, int num_obs,
                                 const GridPtr& grid, const SchemeConfig& reference_config, double horizon) {
  const int nt = steps_for(horizon, reference_config.dt);
  ObservationSet obs;
  obs.cells = observation_indices(grid->num_cells(), num_obs);
  auto sample = [&](const Eigen::VectorXd& q) {
    Eigen::VectorXd v(num_obs);
    for (int k = 0; k < num_obs; ++k) v[k] = q[obs.cells[static_cast<std::size_t>(k)]];
    obs.values.push_back(std::move(v));
  };
  if (source == TruthSource::Exact) {
    if (!has_closed_form(sc, wc))
      throw std::invalid_argument("exact observations need a case with a closed-form solution");
    for (int n = 0; n <= nt; ++n) sample(exact_solution(sc, wc, n * reference_config.dt, grid).values);
    return obs;
  }
  const ForwardResult ref = run_forward(initial_field(sc, grid), horizon, reference_config, wc, true);
  for (int n = 0; n <= nt; ++n) sample(ref.trajectory->level(n));
  return obs;
}

CellField make_background(const CellField& q0, BackgroundMode mode, double split_lon) {
  CellField qb = q0;
  if (mode == BackgroundMode::Uniform10pct) {
    qb.values *= 1.1;
    return qb;
  }
  const double floor = 0.01 * q0.values.maxCoeff();
  for (int j = 0; j < q0.grid->num_cells(); ++j) {
    if (lonlat_of(q0.grid->cell(j).center).lon < split_lon) continue;
    qb[j] = q0[j] != 0.0 ? 1.1 * q0[j] : q0[j] + floor;
  }
  return qb;
}

void AssimProblem::validate() const {
  if (!grid) throw std::invalid_argument("AssimProblem: no grid");
  config.validate();
  if (w_b < 0.0 || w_o < 0.0 || (w_b == 0.0 && w_o == 0.0))
    throw std::invalid_argument("AssimProblem: weights must be nonnegative and not both zero");
  if (background.grid != grid) throw std::invalid_argument("AssimProblem: background lives on another grid");
  obs.validate(grid->num_cells());
  if (obs.num_levels() != num_steps() + 1)
    throw std::invalid_argument("AssimProblem: observations do not cover every time level");
}

Eigen::VectorXd AssimProblem::background_kernel() const {
  const Eigen::VectorXd& a = grid->areas();
  const double mean = grid->total_area() / grid->num_cells();
  return a.array().square() / (2.0 * mean * mean);
}

Eigen::VectorXd AssimProblem::observation_kernel() const {
  const Eigen::VectorXd& a = grid->areas();
  double obs_area = 0.0;
  for (int c : obs.cells) obs_area += a[c];
  const double mean = obs_area / obs.num_obs();
  Eigen::VectorXd k(obs.num_obs());
  for (int i = 0; i < obs.num_obs(); ++i) {
    const double ai = a[obs.cells[static_cast<std::size_t>(i)]];
    k[i] = ai * ai / (2.0 * mean * mean);
  }
  return k;
}

namespace {

struct ForwardCost {
  CostBreakdown cost;
  std::optional<ForwardTrajectory> trajectory;
};

ForwardCost forward_cost(const CellField& q0, const AssimProblem& p, bool record) {
  p.validate();
  if (q0.grid != p.grid) throw std::invalid_argument("cost: control lives on another grid");
  const Eigen::VectorXd kb = p.background_kernel();
  const Eigen::VectorXd ko = p.observation_kernel();
  const Eigen::VectorXd d = q0.values - p.background.values;
  ForwardCost out;
  out.cost.jb = (kb.array() * d.array().square()).sum();

  // Observation misfit accumulated level by level on the fly.
  const int nt = p.num_steps();
  const double dt = p.config.dt;
  const Eigen::VectorXd rho = density_of(p.config, *p.grid);
  WindProvider winds(p.wind, p.grid, p.winds);
  if (record) {
    out.trajectory.emplace(p.grid, p.config, p.wind, nt, p.checkpoint_stride, p.winds);
    out.trajectory->store(0, q0.values);
  }
  Eigen::VectorXd q = q0.values;
  double jo = 0.0;
  auto misfit = [&](int n) {
    const Eigen::VectorXd& qo = p.obs.values[static_cast<std::size_t>(n)];
    for (int k = 0; k < p.obs.num_obs(); ++k) {
      const double r = qo[k] - q[p.obs.cells[static_cast<std::size_t>(k)]];
      jo += ko[k] * r * r;
    }
  };
  misfit(0);
  for (int n = 0; n < nt; ++n) {
    const EdgeWind& w = winds.at(step_wind_time(n, dt));
    const Departure dep = departure_points(w, dt, *p.grid, p.config.cfl_max);
    const StepFluxes f = transport_fluxes(q, w, dep, rho, p.config, *p.grid);
    q.array() -= dt * flux_divergence(f, *p.grid).array() / (p.grid->areas().array() * rho.array());
    if (record) out.trajectory->store(n + 1, q);
    misfit(n + 1);
  }
  out.cost.jo = p.horizon / (2.0 * nt) * jo;
  out.cost.total = p.w_b * out.cost.jb + p.w_o * out.cost.jo;
  return out;
}

}  // namespace

CostBreakdown cost(const CellField& q0, const AssimProblem& problem) {
  return forward_cost(q0, problem, false).cost;
}

Evaluation evaluate(const CellField& q0, const AssimProblem& p, AdjointMethod method) {
  ForwardCost fc = forward_cost(q0, p, true);
  const ForwardTrajectory& traj = *fc.trajectory;
  const Eigen::VectorXd ko = p.observation_kernel();
  const Eigen::VectorXd& area = p.grid->areas();
  const int nc = p.grid->num_cells();
  // d(w_o J_o)/dq^n = dt * |Omega| * forcing_n with dt = horizon / N_T.
  AdjointForcing forcing{[&](int n) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(nc);
    const Eigen::VectorXd& q = traj.level(n);
    const Eigen::VectorXd& qo = p.obs.values[static_cast<std::size_t>(n)];
    for (int k = 0; k < p.obs.num_obs(); ++k) {
      const int c = p.obs.cells[static_cast<std::size_t>(k)];
      f[c] = p.w_o * ko[k] * (q[c] - qo[k]) / area[c];
    }
    return f;
  }};
  const CellField qstar = run_adjoint(method, traj, forcing, p.config);
  const Eigen::VectorXd rho = density_of(p.config, *p.grid);
  const Eigen::VectorXd kb = p.background_kernel();
  Evaluation ev{fc.cost, CellField(p.grid)};
  ev.gradient.values = 2.0 * p.w_b * kb.cwiseProduct(q0.values - p.background.values) -
                       (rho.array() * area.array() * qstar.values.array()).matrix();
  return ev;
}

CellField gradient(const CellField& q0, const AssimProblem& problem, AdjointMethod method) {
  return evaluate(q0, problem, method).gradient;
}

LbfgsResult minimize(AssimProblem& problem, AdjointMethod method, const LbfgsConfig& config) {
  const Objective objective = [&](const Eigen::VectorXd& x) {
    const Evaluation ev = evaluate(CellField(problem.grid, x), problem, method);
    return ObjectiveValue{ev.cost.total, ev.gradient.values, ev.cost.jb, ev.cost.jo};
  };
  return icoadv::minimize(objective, problem.background.values, config,
                          [&](const Eigen::VectorXd& x) { problem.background.values = x; });
}

}  // namespace icoadv
