#include <doctest.h>

#include "icoadv/lbfgs.hpp"

#include <sstream>

using namespace icoadv;

TEST_CASE("quadratic converges in at most n+2 iterations with near-exact line searches") {
  Eigen::Matrix3d a;
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  const Eigen::Vector3d b(1, -2, 0.5);
  const Objective f = [&](const Eigen::VectorXd& x) {
    ObjectiveValue v;
    v.f = 0.5 * x.dot(a * x) - b.dot(x);
    v.g = a * x - b;
    return v;
  };
  const Eigen::Vector3d xs = a.ldlt().solve(b);
  LbfgsConfig cfg;
  cfg.gtol = 1e-10;
  cfg.max_iterations = 5;
  cfg.c1 = 1e-7;
  cfg.c2 = 1e-6;
  cfg.max_attempts = 10;
  const LbfgsResult r = minimize(f, Eigen::Vector3d(3, 3, 3), cfg);
  CHECK(r.history.back().iter <= 5);
  CHECK(r.history.back().gnorm <= 1e-10);
  CHECK((r.x_best - xs).norm() <= 1e-9);

  // default (loose) Wolfe constants still converge, just not in n steps
  LbfgsConfig loose;
  loose.gtol = 1e-10;
  loose.max_iterations = 20;
  const LbfgsResult l = minimize(f, Eigen::Vector3d(3, 3, 3), loose);
  CHECK(l.history.back().gnorm <= 1e-10);
  CHECK((l.x_best - xs).norm() <= 1e-9);
}

TEST_CASE("rosenbrock with Wolfe steps and monotone best value") {
  const Objective f = [](const Eigen::VectorXd& x) {
    ObjectiveValue v;
    v.f = 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
    v.g.resize(2);
    v.g[0] = -400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]);
    v.g[1] = 200 * (x[1] - x[0] * x[0]);
    return v;
  };
  LbfgsConfig cfg;
  cfg.max_iterations = 200;
  cfg.max_attempts = 20;
  cfg.gtol = 1e-8;
  const LbfgsResult r = minimize(f, Eigen::Vector2d(-1.2, 1.0), cfg);
  CHECK((r.x_best - Eigen::Vector2d(1, 1)).norm() < 1e-6);
  double best = r.history.front().j;
  for (std::size_t i = 1; i < r.history.size(); ++i) {
    const auto& h = r.history[i];
    if (h.restart) continue;
    CHECK(h.wolfe);
    CHECK(h.armijo_slack <= 0.0);
    CHECK(h.curvature_ratio <= cfg.c2);
    CHECK(h.j <= best);
    best = std::min(best, h.j);
  }
}

TEST_CASE("failed line searches trigger restarts") {
  // gradient of the wrong sign: no step can satisfy the sufficient decrease
  const Objective f = [](const Eigen::VectorXd& x) {
    ObjectiveValue v;
    v.f = x.squaredNorm();
    v.g = -2.0 * x;
    return v;
  };
  int restarts = 0;
  LbfgsConfig cfg;
  const LbfgsResult r = minimize(f, Eigen::Vector2d(1, 2), cfg, [&](const Eigen::VectorXd&) { ++restarts; });
  CHECK(restarts == 2);
  int flagged = 0;
  for (const auto& h : r.history) flagged += h.restart;
  CHECK(flagged == 2);
  CHECK(r.f_best == doctest::Approx(5.0));
  CHECK(r.evaluations <= 1 + 3 * cfg.max_attempts + 2);
}

TEST_CASE("config validation and history csv") {
  LbfgsConfig bad;
  bad.c1 = 0.95;
  CHECK_THROWS(bad.validate());
  bad = LbfgsConfig{};
  bad.max_attempts = 0;
  CHECK_THROWS(bad.validate());
  std::ostringstream os;
  write_history_csv(os, {IterationRecord{}});
  CHECK(os.str().rfind("iter,J,Jb,Jo,gnorm,alpha,restart\n", 0) == 0);
}
