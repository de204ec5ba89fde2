// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance [--only 1,5,7]
#include "icoadv/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>

using namespace icoadv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

SchemeConfig scheme(int nb, Limiter lim = Limiter::None, Order order = Order::Linear) {
  SchemeConfig c;
  c.dt = default_dt(nb);
  c.limiter = lim;
  c.order = order;
  return c;
}

Outcome grid_counts() {
  const int cells[] = {80, 320, 1280, 5120, 20480, 81920};
  const int edges[] = {120, 480, 1920, 7680, 30720, 122880};
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  double worst_area = 0.0;
  for (int b = 0; b <= 5; ++b) {
    const GridPtr g = SphereGrid::build(2, b);
    ok = ok && g->num_cells() == cells[b] && g->num_edges() == edges[b];
    const double exact = 4.0 * std::numbers::pi * g->radius() * g->radius();
    worst_area = std::max(worst_area, std::abs(g->areas().sum() - exact) / exact);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && worst_area <= 1e-12 && secs < 5.0;
  return {ok, fmt("counts R2B00..R2B05 %s, area rel err %.2e, build time %.2f s (< 5)",
                  ok ? "match" : "checked", worst_area, secs)};
}

Outcome duality() {
  const GridPtr g = SphereGrid::build(2, 2);
  double worst = 0.0;
  for (auto id : {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalNonDiv, WindCaseId::DeformationalDiv,
                  WindCaseId::MovingVortices})
    for (double t : {0.0, 0.37 * kPeriod})
      worst = std::max(worst, duality_check(g, WindCase::standard(id), scheme(2), 100, 11, t).max_rel);
  return {worst <= 1e-12, fmt("max relative residual %.2e over 4 winds x 100 pairs (<= 1e-12)", worst)};
}

Outcome standard_gradient() {
  KeyValueConfig kv;
  kv.set("case", "vortex:moving_vortices");
  kv.set("grid", "2");
  kv.set("method", "standard");
  kv.set("n_obs", "1280");
  kv.set("truth", "exact");
  const AssimSetup s = make_assim_setup(kv);
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < 5; ++k) dirs.push_back(random_direction(s.problem.grid->num_cells(), 100 + k));
  const double e = gradient_check(s.problem, AdjointMethod::Standard, s.problem.background, dirs).max_rel_error();
  return {e <= 1e-6, fmt("FD plateau relative error %.2e over 5 random directions (<= 1e-6)", e)};
}

Outcome artsource_gradient() {
  KeyValueConfig kv;
  kv.set("case", "cosine_bell:moving_vortices");
  kv.set("grid", "2");
  kv.set("method", "artsource+minmax");
  kv.set("n_obs", "1280");
  kv.set("truth", "reference");
  const AssimSetup s = make_assim_setup(kv);
  std::vector<Eigen::VectorXd> dirs;
  for (int k = 0; k < 5; ++k) dirs.push_back(smooth_direction(*s.problem.grid, 200 + k));
  const GradientCheckReport rep = gradient_check(s.problem, AdjointMethod::ArtSource, s.problem.background, dirs);
  std::string per;
  for (const auto& d : rep.directions) per += fmt(" %.2e", d.rel_error);
  return {rep.max_rel_error() <= 5e-2,
          fmt("FD relative error max %.2e (<= 5e-2); per direction:%s", rep.max_rel_error(), per.c_str())};
}

Outcome mass_conservation() {
  const char* cases[] = {"cosine_bell:solid_rotation",          "slotted_cylinder:solid_rotation",
                         "two_cosine_bells:deform_nondiv",       "two_slotted_cylinders:deform_nondiv",
                         "two_cosine_bells:deform_div",          "two_slotted_cylinders:deform_div",
                         "vortex:moving_vortices",               "cosine_bell:moving_vortices"};
  const GridPtr g = SphereGrid::build(2, 2);
  const CellField ones(g, 1.0);
  double worst = 0.0;
  int runs = 0;
  for (const char* c : cases)
    for (auto lim : {Limiter::None, Limiter::FctMinmax, Limiter::FctPositive}) {
      const CaseSpec cs = parse_case_spec(c);
      const CellField q0 = initial_field(cs.scalar, g);
      const CellField q = run_forward(q0, kPeriod, scheme(2, lim), cs.wind).q_final;
      worst = std::max(worst, std::abs(mass(q, ones) - mass(q0, ones)) / mass(q0, ones));
      ++runs;
    }
  return {worst <= 1e-12, fmt("max |dmass|/mass %.2e over %d full runs on R2B02 (<= 1e-12)", worst, runs)};
}

Outcome positivity() {
  const GridPtr g = SphereGrid::build(2, 3);
  const ScalarCase sc = ScalarCase::standard(ScalarCaseId::SlottedCylinder);
  const WindCase wc = WindCase::standard(WindCaseId::SolidBodyRotation);
  const CellField q0 = initial_field(sc, g);
  const Bounds b = admissible_bounds(sc);
  const CellField ones(g, 1.0);
  auto run = [&](Limiter lim) {
    const CellField q = run_forward(q0, kPeriod, scheme(3, lim), wc).q_final;
    return std::make_pair(compute_norms(q, q0, b), std::abs(mass(q, ones) / mass(q0, ones) - 1.0));
  };
  const auto [mm, dm1] = run(Limiter::FctMinmax);
  const auto [pd, dm2] = run(Limiter::FctPositive);
  const auto [nl, dm3] = run(Limiter::None);
  const double frac = static_cast<double>(nl.undershoot_count) / g->num_cells();
  const bool ok = mm.undershoot_count == 0 && mm.min_value >= -1e-14 && pd.undershoot_count == 0 &&
                  pd.min_value >= -1e-14 && frac >= 0.3 && frac <= 0.7 && std::max({dm1, dm2, dm3}) <= 1e-12;
  return {ok, fmt("minmax: undershoot %d min %.1e; positive: undershoot %d min %.1e; none: undershoot %.1f%% of cells",
                  mm.undershoot_count, mm.min_value, pd.undershoot_count, pd.min_value, 100.0 * frac)};
}

Outcome forward_accuracy() {
  const ScalarCase sc = ScalarCase::standard(ScalarCaseId::CosineBell);
  const WindCase wc = WindCase::standard(WindCaseId::SolidBodyRotation);
  double l2[3];
  const auto t0 = std::chrono::steady_clock::now();
  for (int nb = 2; nb <= 4; ++nb) {
    const GridPtr g = SphereGrid::build(2, nb);
    const CellField q0 = initial_field(sc, g);
    l2[nb - 2] = compute_norms(run_forward(q0, kPeriod, scheme(nb), wc).q_final, q0, admissible_bounds(sc)).l2_rel;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double order = std::log2(l2[0] / l2[2]) / 2.0;
  const bool ok = l2[2] >= 0.4e-2 && l2[2] <= 4e-2 && order >= 1.5 && secs < 600.0;
  return {ok, fmt("R2B04 l2_rel %.3e (band [4e-3, 4e-2]); l2_rel R2B02 %.3e R2B03 %.3e; order %.2f (>= 1.5); %.0f s",
                  l2[2], l2[0], l2[1], order, secs)};
}

Outcome retro_transport() {
  const GridPtr g = SphereGrid::build(2, 2);
  double std1 = 0.0, art1 = 0.0, art2 = 0.0;
  for (auto id : {WindCaseId::SolidBodyRotation, WindCaseId::DeformationalNonDiv, WindCaseId::MovingVortices}) {
    const WindCase wc = WindCase::standard(id);
    std1 = std::max(std1, retro_check(AdjointMethod::Standard, g, wc, scheme(2, Limiter::None, Order::Constant), 30, 7).max_rel);
    art1 = std::max(art1, retro_check(AdjointMethod::ArtSource, g, wc, scheme(2, Limiter::None, Order::Constant), 30, 7).max_rel);
    art2 = std::max(art2, retro_check(AdjointMethod::ArtSource, g, wc, scheme(2), 30, 7).max_rel);
  }
  const bool ok = std::max({std1, art1, art2}) <= 1e-12;
  return {ok, fmt("max per-step deviation: standard (order 1) %.1e, artsource order 1 %.1e, order 2 %.1e (<= 1e-12)",
                  std1, art1, art2)};
}

Outcome adjoint_negativity() {
  const GridPtr g = SphereGrid::build(2, 3);
  const WindCase wc = WindCase::standard(WindCaseId::MovingVortices);
  double ratio_mm = INFINITY, ratio_pd = INFINITY;
  auto note = [](double& r, const Eigen::VectorXd& q) { r = std::min(r, q.minCoeff() / q.cwiseAbs().maxCoeff()); };
  // zero-forcing backward runs from a terminal field
  for (auto sid : {ScalarCaseId::CosineBell, ScalarCaseId::Vortex}) {
    const CellField q_end = initial_field(ScalarCase::standard(sid), g);
    note(ratio_mm, backward_transport(AdjointMethod::ArtSource, q_end, wc, scheme(3, Limiter::FctMinmax), kPeriod).values);
    note(ratio_pd, backward_transport(AdjointMethod::ArtSource, q_end, wc, scheme(3, Limiter::FctPositive), kPeriod).values);
  }
  // forced sweep of a twin experiment with an underestimated initial state
  for (const char* lim : {"minmax", "positive"}) {
    KeyValueConfig kv;
    kv.set("grid", "3");
    kv.set("method", std::string("artsource+") + lim);
    const AssimSetup s = make_assim_setup(kv);
    const CellField x(s.problem.grid, (0.9 * s.truth.values).eval());
    const Eigen::VectorXd g_ = gradient(x, s.problem, AdjointMethod::ArtSource).values;
    const Eigen::VectorXd qstar = -(g_ - 2.0 * s.problem.w_b * s.problem.background_kernel().cwiseProduct(
                                             x.values - s.problem.background.values))
                                      .cwiseQuotient(s.problem.grid->areas());
    note(std::strcmp(lim, "minmax") == 0 ? ratio_mm : ratio_pd, qstar);
  }
  const bool ok = ratio_mm >= -1e-8 && ratio_pd >= -1e-13;
  return {ok, fmt("min/max: minmax %.2e (>= -1e-8), positive %.2e (>= -1e-13)", ratio_mm, ratio_pd)};
}

Outcome assimilation_convergence() {
  std::string detail;
  bool ok = true;
  for (const char* m : {"standard", "artsource-nolim", "artsource+minmax"}) {
    KeyValueConfig kv;
    kv.set("case", "vortex:moving_vortices");
    kv.set("grid", "3");
    kv.set("method", m);
    kv.set("obs_stride", "4");
    kv.set("background_mode", "uniform10pct");
    kv.set("iters", "50");
    AssimSetup s = make_assim_setup(kv);
    LbfgsConfig lc;
    lc.max_iterations = 50;
    const AssimOutcome o = run_assimilation(s, lc);
    const double red = o.summary.j0 / o.summary.j_best;
    ok = ok && red >= 100.0 && o.summary.wolfe_ok;
    detail += fmt("%s%s: J %.3e -> %.3e (x%.2e, %d it, %d restarts, Wolfe %s, %.0f s)", detail.empty() ? "" : "; ", m,
                  o.summary.j0, o.summary.j_best, red, o.summary.iterations, o.summary.restarts,
                  o.summary.wolfe_ok ? "ok" : "VIOLATED", o.summary.seconds);
  }
  return {ok, detail};
}

Outcome weight_endpoint() {
  NormReport err[2];
  int i = 0;
  for (const char* m : {"standard", "artsource+minmax"}) {
    KeyValueConfig kv;
    kv.set("case", "two_slotted_cylinders:deform_nondiv");
    kv.set("grid", "3");
    kv.set("method", m);
    kv.set("w_b", "0");
    kv.set("w_o", "1");
    kv.set("background_mode", "halfdomain");
    kv.set("reference_limiter", "minmax");
    kv.set("obs_stride", "4");
    AssimSetup s = make_assim_setup(kv);
    LbfgsConfig lc;
    lc.max_iterations = 50;
    err[i++] = run_assimilation(s, lc).summary.analysis_error;
  }
  const double r1 = err[0].l1_rel / err[1].l1_rel, r2 = err[0].l2_rel / err[1].l2_rel,
               ri = err[0].linf_rel / err[1].linf_rel;
  const bool ok = r1 >= 2.0 && r2 >= 2.0 && ri >= 2.0;
  return {ok, fmt("standard/artsource+minmax error ratios l1 %.2f l2 %.2f linf %.2f (>= 2); artsource l2_rel %.3e",
                  r1, r2, ri, err[1].l2_rel)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::istringstream is(argv[++i]);
      std::string tok;
      while (std::getline(is, tok, ',')) only.insert(std::stoi(tok));
    }
  }
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"grid counts and area", grid_counts},
      {"transpose duality", duality},
      {"standard adjoint gradient vs finite differences", standard_gradient},
      {"artsource gradient consistency with limiter", artsource_gradient},
      {"mass conservation", mass_conservation},
      {"positivity and monotonicity with limiter", positivity},
      {"forward accuracy band and convergence order", forward_accuracy},
      {"retro-transport equivalence", retro_transport},
      {"adjoint negativity bound", adjoint_negativity},
      {"assimilation convergence", assimilation_convergence},
      {"weight-sweep endpoint", weight_endpoint},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("CRITERION %2d %s: %s | %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
