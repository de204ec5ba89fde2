#include "icoadv/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

using namespace icoadv;
namespace fs = std::filesystem;

namespace {

struct Globals {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t seed = 1;
  std::string out_dir;
};

fs::path resolve(const Globals& g, const std::string& path) {
  if (path.empty() || g.out_dir.empty() || fs::path(path).is_absolute()) return path;
  fs::create_directories(g.out_dir);
  return fs::path(g.out_dir) / path;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_field(std::ostream& os, const Eigen::VectorXd& v) {
  char buf[48];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%ld %.17g\n", static_cast<long>(i), v[i]);
    os << buf;
  }
}

struct GridArgs {
  int nr = 2;
  int nb = 0;
  std::string out;
  bool report = false;
};

int cmd_grid(const Globals& g, const GridArgs& a) {
  const GridPtr grid = SphereGrid::build(a.nr, a.nb);
  std::printf("R%dB%02d cells %d edges %d vertices %d area_rel_err %.3e\n", a.nr, a.nb, grid->num_cells(),
              grid->num_edges(), grid->num_vertices(),
              std::abs(grid->total_area() / (4.0 * std::numbers::pi * grid->radius() * grid->radius()) - 1.0));
  if (a.report) {
    const GridMetrics m = grid_metrics_report(*grid);
    std::printf("min_area_km2 %.6g max_area_km2 %.6g min_edge_km %.6g max_edge_km %.6g edge_ratio %.6g "
                "triangle_edge_ratio %.6g\n",
                m.min_cell_area_km2, m.max_cell_area_km2, m.min_edge_km, m.max_edge_km, m.global_edge_ratio,
                m.triangle_edge_ratio);
  }
  if (!a.out.empty()) {
    auto out = open_out(resolve(g, a.out));
    write_grid(out, *grid);
  }
  return 0;
}

struct AdvectArgs {
  std::string case_spec = "cosine_bell:solid_rotation";
  int nb = 3;
  double dt = 0.0;
  double t_end = kPeriod;
  std::string limiter = "none";
  int order = 2;
  std::string out;
  std::vector<std::string> dump;
};

int cmd_advect(const Globals& g, const AdvectArgs& a) {
  const CaseSpec cs = parse_case_spec(a.case_spec);
  const GridPtr grid = SphereGrid::build(2, a.nb);
  SchemeConfig c;
  c.dt = a.dt > 0.0 ? a.dt : default_dt(a.nb);
  c.limiter = parse_limiter(a.limiter);
  c.order = a.order == 1 ? Order::Constant : Order::Linear;
  c.validate();
  const CellField q0 = initial_field(cs.scalar, grid);
  const int nt = steps_for(a.t_end, c.dt);
  int dump_every = 0;
  std::ofstream dump;
  if (!a.dump.empty()) {
    dump_every = std::stoi(a.dump.at(0));
    if (dump_every < 1) throw std::invalid_argument("--dump-every needs K >= 1");
    dump = open_out(resolve(g, a.dump.at(1)));
  }
  CellField q = q0;
  WindProvider winds(cs.wind, grid);
  double max_courant = 0.0;
  for (int n = 0; n < nt; ++n) {
    if (dump_every && n % dump_every == 0) {
      dump << "LEVEL " << n << ' ' << n * c.dt << '\n';
      write_field(dump, q.values);
    }
    const EdgeWind& w = winds.at(step_wind_time(n, c.dt));
    max_courant = std::max(max_courant, departure_points(w, c.dt, *grid, c.cfl_max).max_courant);
    q = step(q, w, c);
  }
  if (dump_every) {
    dump << "LEVEL " << nt << ' ' << nt * c.dt << '\n';
    write_field(dump, q.values);
  }
  const CellField ones(grid, 1.0);
  const double dm = (mass(q, ones) - mass(q0, ones)) / mass(q0, ones);
  std::string csv = "case,grid,dt,n_steps,limiter,order," + norm_csv_header() + ",mass_rel_change,max_courant\n";
  char head[160];
  std::snprintf(head, sizeof(head), "%s,R2B%02d,%g,%d,%s,%d,", a.case_spec.c_str(), a.nb, c.dt, nt,
                to_string(c.limiter).c_str(), a.order);
  char tail[64];
  std::snprintf(tail, sizeof(tail), ",%.10e,%.6f\n", dm, max_courant);
  std::string row = head;
  if (has_closed_form(cs.scalar, cs.wind) || std::abs(a.t_end - kPeriod) < 1e-9 * kPeriod) {
    row += to_csv_row(compute_norms(q, exact_solution(cs.scalar, cs.wind, a.t_end, grid),
                                    admissible_bounds(cs.scalar)));
  } else {
    row += "nan,nan,nan,nan,nan,nan,nan,nan,nan,nan";
  }
  row += tail;
  std::cout << csv << row;
  if (!a.out.empty()) {
    auto out = open_out(resolve(g, a.out));
    out << csv << row;
  }
  return 0;
}

struct AdjointTestArgs {
  std::string method = "standard";
  std::string case_spec = "vortex:moving_vortices";
  std::string check = "duality";
  int nb = 2;
  std::string limiter = "none";
  int order = 2;
  int pairs = 100;
  int steps = 20;
  int directions = 5;
  int obs_stride = 1;
  std::string out;
};

int cmd_adjoint_test(const Globals& g, const AdjointTestArgs& a) {
  using nlohmann::json;
  const CaseSpec cs = parse_case_spec(a.case_spec);
  const AdjointMethod method = parse_adjoint_method(a.method);
  const GridPtr grid = SphereGrid::build(2, a.nb);
  SchemeConfig c;
  c.dt = default_dt(a.nb);
  c.limiter = parse_limiter(a.limiter);
  c.order = a.order == 1 ? Order::Constant : Order::Linear;
  json j{{"check", a.check},        {"method", a.method}, {"case", a.case_spec}, {"grid", a.nb},
         {"limiter", a.limiter},    {"order", a.order},   {"seed", g.seed},      {"threads", g.threads}};
  double residual = 0.0, tol = 0.0;
  if (a.check == "duality") {
    if (method != AdjointMethod::Standard) throw std::invalid_argument("duality applies to the standard adjoint");
    residual = duality_check(grid, cs.wind, c, a.pairs, g.seed).max_rel;
    tol = 1e-12;
    j["pairs"] = a.pairs;
  } else if (a.check == "retro") {
    if (!cs.wind.divergence_free()) throw std::invalid_argument("retro check needs a divergence-free wind");
    residual = retro_check(method, grid, cs.wind, c, a.steps, g.seed).max_rel;
    tol = 1e-12;
    j["steps"] = a.steps;
  } else if (a.check == "gradient") {
    KeyValueConfig kv;
    kv.set("case", a.case_spec);
    kv.set("grid", std::to_string(a.nb));
    kv.set("method", method == AdjointMethod::Standard ? "standard" : "artsource+" + a.limiter);
    kv.set("order", std::to_string(a.order));
    kv.set("obs_stride", std::to_string(a.obs_stride));
    if (!has_closed_form(cs.scalar, cs.wind)) kv.set("truth", "reference");
    AssimSetup s = make_assim_setup(kv);
    std::vector<Eigen::VectorXd> dirs;
    for (int k = 0; k < a.directions; ++k)
      dirs.push_back(method == AdjointMethod::Standard ? random_direction(grid->num_cells(), g.seed + k)
                                                       : smooth_direction(*grid, g.seed + k));
    const GradientCheckReport rep = gradient_check(s.problem, method, s.problem.background, dirs);
    residual = rep.max_rel_error();
    tol = method == AdjointMethod::Standard && c.limiter == Limiter::None ? 1e-6 : 5e-2;
    for (const auto& d : rep.directions)
      j["directions"].push_back({{"adjoint", d.adjoint}, {"fd", d.best_fd}, {"eps", d.best_eps}, {"rel_error", d.rel_error}});
  } else {
    throw std::invalid_argument("unknown check: " + a.check);
  }
  j["residual"] = residual;
  j["tolerance"] = tol;
  j["passed"] = residual <= tol;
  std::cout << j.dump(2) << '\n';
  if (!a.out.empty()) {
    auto out = open_out(resolve(g, a.out));
    out << j.dump(2) << '\n';
  }
  return residual <= tol ? 0 : 1;
}

struct AssimilateArgs {
  std::string config;
  std::vector<std::string> sets;
  int iters = -1;
  std::string out = "costs.csv";
  std::string xout;
};

int cmd_assimilate(const Globals& g, const AssimilateArgs& a) {
  KeyValueConfig kv = a.config.empty() ? KeyValueConfig{} : KeyValueConfig::from_file(a.config);
  for (const auto& s : a.sets) kv.set_assignment(s);
  AssimSetup s = make_assim_setup(kv);
  LbfgsConfig lc;
  lc.max_iterations = a.iters >= 0 ? a.iters : s.iterations;
  const AssimOutcome o = run_assimilation(s, lc);
  {
    auto out = open_out(resolve(g, a.out));
    write_history_csv(out, o.result.history);
  }
  if (!a.xout.empty()) {
    auto out = open_out(resolve(g, a.xout));
    write_field(out, o.result.x_best);
  }
  std::cout << assim_summary_csv_header() << '\n' << to_csv_row(o.summary) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string family;
  std::string config;
  std::vector<std::string> sets;
  bool full = false;
};

int cmd_experiment(const Globals& g, const ExperimentArgs& a) {
  ExperimentSpec spec;
  spec.family = a.family;
  if (!a.config.empty()) spec.params = KeyValueConfig::from_file(a.config);
  for (const auto& s : a.sets) spec.params.set_assignment(s);
  spec.out_dir = g.out_dir.empty() ? fs::path("out") / a.family : fs::path(g.out_dir);
  spec.seed = g.seed;
  spec.threads = g.threads;
  spec.full = a.full;
  return run_experiment(spec, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume tracer advection, adjoints and 4D-Var on icosahedral grids"};
  app.require_subcommand(0, 1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (recorded; the solvers run serially)")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out_dir, "Output directory");

  GridArgs ga;
  auto* grid = app.add_subcommand("grid", "Build a grid, print counts, optionally dump it");
  grid->add_option("--nr", ga.nr, "Root division")->check(CLI::Range(1, 8));
  grid->add_option("--nb", ga.nb, "Bisection levels")->required()->check(CLI::Range(0, 9));
  grid->add_option("--out", ga.out, "Grid dump file");
  grid->add_flag("--report", ga.report, "Print area and edge-length metrics");

  AdvectArgs aa;
  auto* advect = app.add_subcommand("advect", "Run one advection test and report error norms");
  advect->add_option("--case", aa.case_spec, "<scalar>:<wind>");
  advect->add_option("--grid-nb", aa.nb, "Bisection levels")->check(CLI::Range(0, 9));
  advect->add_option("--dt", aa.dt, "Time step in seconds (default depends on grid)");
  advect->add_option("--t-end", aa.t_end, "Final time in seconds");
  advect->add_option("--limiter", aa.limiter, "none, minmax or positive");
  advect->add_option("--order", aa.order, "Reconstruction order")->check(CLI::IsMember({1, 2}));
  advect->add_option("--out", aa.out, "Norms CSV file");
  advect->add_option("--dump-every", aa.dump, "K FILE: write every K-th level")->expected(2);

  AdjointTestArgs ta;
  auto* adj = app.add_subcommand("adjoint-test", "Duality, retro-transport or gradient check; JSON result");
  adj->add_option("--method", ta.method)->check(CLI::IsMember({"standard", "artsource"}));
  adj->add_option("--case", ta.case_spec, "<scalar>:<wind>");
  adj->add_option("--check", ta.check)->check(CLI::IsMember({"duality", "retro", "gradient"}));
  adj->add_option("--grid-nb", ta.nb)->check(CLI::Range(0, 6));
  adj->add_option("--limiter", ta.limiter);
  adj->add_option("--order", ta.order)->check(CLI::IsMember({1, 2}));
  adj->add_option("--pairs", ta.pairs);
  adj->add_option("--steps", ta.steps);
  adj->add_option("--directions", ta.directions);
  adj->add_option("--obs-stride", ta.obs_stride);
  adj->add_option("--out", ta.out, "JSON output file");

  AssimilateArgs sa;
  auto* assim = app.add_subcommand("assimilate", "4D-Var twin experiment with L-BFGS");
  assim->add_option("--config", sa.config, "key=value run config")->check(CLI::ExistingFile);
  assim->add_option("--set", sa.sets, "Override a config entry, key=value");
  assim->add_option("--iters", sa.iters, "L-BFGS iterations");
  assim->add_option("--out", sa.out, "Cost history CSV");
  assim->add_option("--xout", sa.xout, "Optimized initial field");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run an experiment family");
  exp->add_option("--family", ea.family)->required()->check(CLI::IsMember(experiment_families()));
  exp->add_option("--config", ea.config, "key=value parameters")->check(CLI::ExistingFile);
  exp->add_option("--set", ea.sets, "Override a parameter, key=value");
  exp->add_flag("--full", ea.full, "Paper-scale grid (R2B4)");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }
  try {
    if (grid->parsed()) return cmd_grid(g, ga);
    if (advect->parsed()) return cmd_advect(g, aa);
    if (adj->parsed()) return cmd_adjoint_test(g, ta);
    if (assim->parsed()) return cmd_assimilate(g, sa);
    return cmd_experiment(g, ea);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
