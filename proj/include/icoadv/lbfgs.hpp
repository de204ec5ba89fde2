#ifndef ICOADV_LBFGS_HPP_
#define ICOADV_LBFGS_HPP_

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

namespace icoadv {

struct LbfgsConfig {
  int memory = 10;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_attempts = 5;
  int max_iterations = 50;
  double gtol = 0.0;  // stop when ||g|| <= gtol
  double initial_step = 1.0;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double j = 0.0;
  double jb = 0.0;
  double jo = 0.0;
  double gnorm = 0.0;
  double alpha = 0.0;
  bool restart = false;
  bool steepest = false;  // descent fallback used this iteration
  bool wolfe = true;      // accepted step satisfied the strong Wolfe conditions
  // J(x+ad) - J(x) - c1*a*<g,d> (<= 0) and |<g(x+ad),d>| / |<g,d>| (<= c2)
  double armijo_slack = 0.0;
  double curvature_ratio = 0.0;
};

struct ObjectiveValue {
  double f = 0.0;
  Eigen::VectorXd g;
  double jb = 0.0;
  double jo = 0.0;
};

using Objective = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

struct LbfgsResult {
  Eigen::VectorXd x_best;
  double f_best = 0.0;
  std::vector<IterationRecord> history;  // history[0] is the starting point
  int evaluations = 0;
};

/// on_restart(x) is called when the line search gives up; the objective may
/// change (e.g. a new background) and is re-evaluated at x afterwards.
LbfgsResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const LbfgsConfig& config,
                     const std::function<void(const Eigen::VectorXd&)>& on_restart = {});

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history);

}  // namespace icoadv

#endif  // ICOADV_LBFGS_HPP_
