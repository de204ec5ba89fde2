#include "icoadv/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace icoadv {

void LbfgsConfig::validate() const {
  if (memory < 1) throw std::invalid_argument("LbfgsConfig: memory must be >= 1");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("LbfgsConfig: need 0 < c1 < c2 < 1");
  if (max_attempts < 1) throw std::invalid_argument("LbfgsConfig: max_attempts must be >= 1");
  if (max_iterations < 0) throw std::invalid_argument("LbfgsConfig: max_iterations must be >= 0");
}

namespace {

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd two_loop(const Eigen::VectorXd& g, const std::deque<Pair>& mem) {
  Eigen::VectorXd q = g;
  std::vector<double> a(mem.size());
  for (std::size_t i = mem.size(); i-- > 0;) {
    a[i] = mem[i].rho * mem[i].s.dot(q);
    q -= a[i] * mem[i].y;
  }
  if (!mem.empty()) {
    const Pair& last = mem.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const double b = mem[i].rho * mem[i].y.dot(q);
    q += (a[i] - b) * mem[i].s;
  }
  return -q;
}

struct Trial {
  double alpha = 0.0;
  ObjectiveValue v;
  double slope = 0.0;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), kept inside the
// interval with a 10% margin; falls back to bisection.
double interpolate(const Trial& lo, const Trial& hi) {
  const double a = lo.alpha, b = hi.alpha;
  const double d1 = lo.slope + hi.slope - 3.0 * (lo.v.f - hi.v.f) / (a - b);
  const double disc = d1 * d1 - lo.slope * hi.slope;
  double x = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom != 0.0) x = b - (b - a) * (hi.slope + d2 - d1) / denom;
  }
  const double lo_b = std::min(a, b), hi_b = std::max(a, b), m = 0.1 * (hi_b - lo_b);
  if (!std::isfinite(x) || x < lo_b + m || x > hi_b - m) x = 0.5 * (a + b);
  return x;
}

struct SearchOutcome {
  bool ok = false;
  Trial accepted;
  int evaluations = 0;
};

SearchOutcome strong_wolfe(const Objective& obj, const Eigen::VectorXd& x, const ObjectiveValue& v0,
                           const Eigen::VectorXd& d, double alpha0, const LbfgsConfig& cfg) {
  const double f0 = v0.f;
  const double s0 = v0.g.dot(d);
  SearchOutcome out;
  auto eval = [&](double a) {
    Trial t;
    t.alpha = a;
    t.v = obj(x + a * d);
    t.slope = t.v.g.dot(d);
    ++out.evaluations;
    return t;
  };
  auto armijo = [&](const Trial& t) { return t.v.f <= f0 + cfg.c1 * t.alpha * s0; };
  auto curvature = [&](const Trial& t) { return std::abs(t.slope) <= -cfg.c2 * s0; };

  Trial prev;
  prev.alpha = 0.0;
  prev.v = v0;
  prev.slope = s0;
  double a = alpha0;
  bool zooming = false;
  Trial lo, hi;
  while (out.evaluations < cfg.max_attempts) {
    if (!zooming) {
      Trial t = eval(a);
      if (!std::isfinite(t.v.f) || !armijo(t) || (prev.alpha > 0.0 && t.v.f >= prev.v.f)) {
        lo = prev;
        hi = t;
        zooming = true;
      } else if (curvature(t)) {
        out.ok = true;
        out.accepted = t;
        return out;
      } else if (t.slope >= 0.0) {
        lo = t;
        hi = prev;
        zooming = true;
      } else {
        prev = t;
        a = 2.0 * t.alpha;
      }
      continue;
    }
    const double aj = std::isfinite(hi.v.f) ? interpolate(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
    Trial t = eval(aj);
    if (!std::isfinite(t.v.f) || !armijo(t) || t.v.f >= lo.v.f) {
      hi = t;
    } else {
      if (curvature(t)) {
        out.ok = true;
        out.accepted = t;
        return out;
      }
      if (t.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = t;
    }
  }
  return out;
}

}  // namespace

LbfgsResult minimize(const Objective& objective, const Eigen::VectorXd& x0, const LbfgsConfig& config,
                     const std::function<void(const Eigen::VectorXd&)>& on_restart) {
  config.validate();
  LbfgsResult res;
  Eigen::VectorXd x = x0;
  ObjectiveValue v = objective(x);
  res.evaluations = 1;
  res.x_best = x;
  res.f_best = v.f;
  res.history.push_back({0, v.f, v.jb, v.jo, v.g.norm(), 0.0, false, false, true});

  std::deque<Pair> mem;
  int iter = 0;
  int failed_in_row = 0;
  while (iter < config.max_iterations && v.g.norm() > config.gtol) {
    Eigen::VectorXd d = two_loop(v.g, mem);
    bool steepest = mem.empty();
    if (!(d.dot(v.g) < 0.0)) {
      d = -v.g;
      steepest = true;
    }
    // First step along steepest descent: aim at half the quadratic model's
    // distance to f = 0.
    const double alpha0 =
        mem.empty() ? config.initial_step * std::max(v.f, 1e-300) / std::max(v.g.squaredNorm(), 1e-300) : 1.0;
    const SearchOutcome ls = strong_wolfe(objective, x, v, d, alpha0, config);
    res.evaluations += ls.evaluations;
    if (!ls.ok) {
      if (++failed_in_row > 2) break;
      mem.clear();
      if (on_restart) on_restart(x);
      v = objective(x);
      ++res.evaluations;
      res.history.push_back({iter, v.f, v.jb, v.jo, v.g.norm(), 0.0, true, steepest, false});
      if (v.f < res.f_best) {
        res.f_best = v.f;
        res.x_best = x;
      }
      continue;
    }
    failed_in_row = 0;
    ++iter;
    const Eigen::VectorXd x_new = x + ls.accepted.alpha * d;
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = ls.accepted.v.g - v.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      mem.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(mem.size()) > config.memory) mem.pop_front();
    }
    const double s0 = v.g.dot(d);
    const double slack = ls.accepted.v.f - v.f - config.c1 * ls.accepted.alpha * s0;
    const double ratio = std::abs(ls.accepted.slope) / std::abs(s0);
    x = x_new;
    v = ls.accepted.v;
    res.history.push_back(
        {iter, v.f, v.jb, v.jo, v.g.norm(), ls.accepted.alpha, false, steepest, true, slack, ratio});
    if (v.f < res.f_best) {
      res.f_best = v.f;
      res.x_best = x;
    }
  }
  return res;
}

void write_history_csv(std::ostream& os, const std::vector<IterationRecord>& history) {
  os << "iter,J,Jb,Jo,gnorm,alpha,restart\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%d,%.10e,%.10e,%.10e,%.10e,%.10e,%d\n", r.iter, r.j, r.jb, r.jo, r.gnorm,
                  r.alpha, r.restart ? 1 : 0);
    os << buf;
  }
}

}  // namespace icoadv
