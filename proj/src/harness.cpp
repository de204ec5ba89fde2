#include "icoadv/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace icoadv {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& is) {
  KeyValueConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  return parse(in);
}

void KeyValueConfig::set_assignment(const std::string& assignment) {
  std::istringstream is(assignment);
  const KeyValueConfig one = parse(is);
  if (one.values_.empty()) throw std::invalid_argument("expected key=value, got '" + assignment + "'");
  for (const auto& [k, v] : one.values_) values_[k] = v;
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("config: missing key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key, "");
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw std::invalid_argument("config: '" + key + "' is not a number: " + v);
  return d;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double d = get_double(key, 0.0);
  if (d != std::floor(d)) throw std::invalid_argument("config: '" + key + "' is not an integer");
  return static_cast<int>(d);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key, const std::string& fallback) const {
  std::vector<std::string> out;
  std::istringstream is(get(key, fallback));
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

CaseSpec parse_case_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument("case must be <scalar>:<wind>, got " + std::string(spec));
  return {ScalarCase::standard(parse_scalar_case(spec.substr(0, colon))),
          WindCase::standard(parse_wind_case(spec.substr(colon + 1)))};
}

int parse_grid_level(std::string_view s) {
  std::string t(s);
  if (t.rfind("R2B", 0) == 0 || t.rfind("r2b", 0) == 0) t = t.substr(3);
  std::size_t pos = 0;
  int nb = -1;
  try {
    nb = std::stoi(t, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != t.size() || nb < 0 || nb > 9) throw std::invalid_argument("bad grid level: " + std::string(s));
  return nb;
}

double default_dt(int n_b) { return 600.0 * std::ldexp(1.0, 4 - n_b); }

std::string MethodSpec::label() const {
  if (method == AdjointMethod::Standard) return "standard";
  if (limiter == Limiter::None) return "artsource-nolim";
  return "artsource+" + std::string(limiter == Limiter::FctMinmax ? "minmax" : "positive");
}

MethodSpec parse_method_spec(std::string_view label) {
  if (label == "standard") return {AdjointMethod::Standard, Limiter::None};
  if (label == "artsource") return {AdjointMethod::ArtSource, Limiter::FctMinmax};
  if (label == "artsource-nolim" || label == "artsource+none") return {AdjointMethod::ArtSource, Limiter::None};
  if (label.rfind("artsource+", 0) == 0) return {AdjointMethod::ArtSource, parse_limiter(label.substr(10))};
  throw std::invalid_argument("unknown method: " + std::string(label));
}

AssimSetup make_assim_setup(const KeyValueConfig& cfg) {
  AssimSetup s;
  s.cases = parse_case_spec(cfg.get("case", "vortex:moving_vortices"));
  const int nb = parse_grid_level(cfg.get("grid", "3"));
  const GridPtr grid = SphereGrid::build(2, nb);

  const std::string method = cfg.get("method", "artsource+minmax");
  s.method = parse_method_spec(method);
  if (cfg.has("limiter")) {
    const Limiter l = parse_limiter(cfg.get("limiter", ""));
    if (s.method.method == AdjointMethod::Standard && l != Limiter::None)
      throw std::invalid_argument("standard adjoint undefined for limited scheme");
    s.method.limiter = l;
  }

  SchemeConfig scheme;
  scheme.dt = cfg.get_double("dt", default_dt(nb));
  scheme.order = cfg.get_int("order", 2) == 1 ? Order::Constant : Order::Linear;
  scheme.limiter = s.method.limiter;
  scheme.validate();

  AssimProblem& p = s.problem;
  p.grid = grid;
  p.wind = s.cases.wind;
  p.config = scheme;
  p.horizon = cfg.get_double("T", kPeriod);
  p.w_b = cfg.get_double("w_b", 0.5);
  p.w_o = cfg.get_double("w_o", 0.5);
  p.checkpoint_stride = cfg.get_int("checkpoint_stride", 1);

  s.truth = initial_field(s.cases.scalar, grid);
  const double split = cfg.get_double("split_lon", std::numbers::pi);
  p.background = make_background(s.truth, parse_background_mode(cfg.get("background_mode", "uniform10pct")), split);

  const int n_obs = cfg.has("n_obs") ? cfg.get_int("n_obs", 0) : grid->num_cells() / cfg.get_int("obs_stride", 4);
  const TruthSource source = parse_truth_source(cfg.get("truth", "reference"));
  SchemeConfig ref = scheme;
  const std::string ref_lim = cfg.get("reference_limiter", "model");
  if (ref_lim != "model") ref.limiter = parse_limiter(ref_lim);
  p.obs = make_observations(source, s.cases.scalar, s.cases.wind, n_obs, grid, ref, p.horizon);
  s.iterations = cfg.get_int("iters", 50);
  p.validate();
  return s;
}

bool history_is_wolfe(const std::vector<IterationRecord>& history, const LbfgsConfig& config) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    const IterationRecord& r = history[i];
    if (r.restart) continue;
    if (!r.wolfe || !(r.armijo_slack <= 0.0) || !(r.curvature_ratio <= config.c2)) return false;
  }
  return true;
}

AssimOutcome run_assimilation(AssimSetup& setup, const LbfgsConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const Bounds bounds = admissible_bounds(setup.cases.scalar);
  AssimOutcome out;
  AssimRunSummary& s = out.summary;
  s.label = setup.method.label();
  s.n_b = setup.problem.grid->n_b();
  s.n_obs = setup.problem.obs.num_obs();
  s.w_b = setup.problem.w_b;
  s.w_o = setup.problem.w_o;
  s.background_error = compute_norms(setup.problem.background, setup.truth, bounds);
  out.result = minimize(setup.problem, setup.method.method, config);
  const auto& h = out.result.history;
  s.iterations = h.back().iter;
  s.restarts = static_cast<int>(std::count_if(h.begin(), h.end(), [](const IterationRecord& r) { return r.restart; }));
  s.evaluations = out.result.evaluations;
  s.j0 = h.front().j;
  s.j_best = out.result.f_best;
  s.analysis_error = compute_norms(CellField(setup.problem.grid, out.result.x_best), setup.truth, bounds);
  s.wolfe_ok = history_is_wolfe(h, config);
  s.seconds = seconds_since(t0);
  return out;
}

std::string assim_summary_csv_header() {
  return "method,grid,n_obs,w_b,w_o,iterations,restarts,evaluations,J0,J_best,reduction,wolfe,"
         "bg_l1_rel,bg_l2_rel,bg_linf_rel," +
         norm_csv_header();
}

std::string to_csv_row(const AssimRunSummary& s) {
  std::ostringstream os;
  os << s.label << ",R2B" << (s.n_b < 10 ? "0" : "") << s.n_b << ',' << s.n_obs << ',' << fmt(s.w_b) << ','
     << fmt(s.w_o) << ',' << s.iterations << ',' << s.restarts << ',' << s.evaluations << ',' << fmt(s.j0) << ','
     << fmt(s.j_best) << ',' << fmt(s.j_best > 0.0 ? s.j0 / s.j_best : INFINITY) << ',' << (s.wolfe_ok ? 1 : 0)
     << ',' << fmt(s.background_error.l1_rel) << ',' << fmt(s.background_error.l2_rel) << ','
     << fmt(s.background_error.linf_rel) << ',' << to_csv_row(s.analysis_error);
  return os.str();
}

CellField backward_transport(AdjointMethod method, const CellField& q_end, const WindCase& wind,
                             const SchemeConfig& config, double horizon) {
  const GridPtr& grid = q_end.grid;
  const SphereGrid& g = *grid;
  const Eigen::VectorXd rho = density_of(config, g);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.num_cells());
  const bool steady = wind.id == WindCaseId::SolidBodyRotation;
  const int nt = steps_for(horizon, config.dt);
  WindProvider winds(wind, grid);
  std::optional<LinearFluxOperator> op;
  Eigen::VectorXd q = q_end.values;
  for (int n = nt - 1; n >= 0; --n) {
    const EdgeWind& w = winds.at(step_wind_time(n, config.dt));
    if (method == AdjointMethod::Standard) {
      if (!op || !steady) op = assemble_forward_operator(w, rho, config.dt, g, config);
      q = standard_adjoint_step(q, *op, zero, rho, config.dt);
    } else {
      q = artsource_adjoint_step(q, w, rho, config.dt, zero, g, config);
    }
  }
  return CellField(grid, q);
}

const std::vector<std::string>& experiment_families() {
  static const std::vector<std::string> f{"advect-table",    "adjoint-compare",  "assim-convergence",
                                          "assim-obs-sweep", "assim-mesh-sweep", "assim-weight-sweep"};
  return f;
}

namespace {

using nlohmann::json;

struct Context {
  const ExperimentSpec& spec;
  std::ostream& log;
  json manifest;
  std::string stage;

  void write(const std::string& name, const std::string& content) {
    const auto path = spec.out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    manifest["outputs"].push_back(name);
  }

  void note_grid(const SphereGrid& g, double dt, int nt, double max_courant) {
    json j{{"n_r", g.n_r()},   {"n_b", g.n_b()}, {"cells", g.num_cells()},       {"edges", g.num_edges()},
           {"vertices", g.num_vertices()}, {"dt", dt}, {"n_steps", nt}, {"max_courant", max_courant}};
    manifest["grids"].push_back(j);
    manifest["max_courant"] = std::max(manifest.value("max_courant", 0.0), max_courant);
  }

  template <typename F>
  auto timed(const std::string& name, F&& f) {
    stage = name;
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      manifest["timings"][name] = seconds_since(t0);
    } else {
      auto r = f();
      manifest["timings"][name] = seconds_since(t0);
      return r;
    }
  }
};

int default_grid(const ExperimentSpec& spec) { return spec.full ? 4 : 3; }

KeyValueConfig with_defaults(const ExperimentSpec& spec) {
  KeyValueConfig p = spec.params;
  if (!p.has("grid")) p.set("grid", std::to_string(default_grid(spec)));
  return p;
}

double max_courant_of(const AssimSetup& s) {
  return run_forward(s.problem.background, s.problem.horizon, s.problem.config, s.problem.wind).max_courant;
}

void advect_table(Context& ctx) {
  const KeyValueConfig p = with_defaults(ctx.spec);
  const CaseSpec cs = parse_case_spec(p.get("case", "cosine_bell:solid_rotation"));
  const int nb = parse_grid_level(p.get("grid", ""));
  const GridPtr grid = ctx.timed("grid", [&] { return SphereGrid::build(2, nb); });
  SchemeConfig base;
  base.dt = p.get_double("dt", default_dt(nb));
  base.order = p.get_int("order", 2) == 1 ? Order::Constant : Order::Linear;
  const double horizon = p.get_double("T", kPeriod);
  const CellField q0 = initial_field(cs.scalar, grid);
  const CellField q_end = exact_solution(cs.scalar, cs.wind, horizon, grid);
  const Bounds bounds = admissible_bounds(cs.scalar);
  const CellField ones(grid, 1.0);

  struct Row {
    std::string name;
    bool adjoint;
    AdjointMethod method;
    Limiter limiter;
  };
  const std::vector<Row> rows{{"forward-nolim", false, AdjointMethod::Standard, Limiter::None},
                              {"standard-adjoint", true, AdjointMethod::Standard, Limiter::None},
                              {"artsource-nolim", true, AdjointMethod::ArtSource, Limiter::None},
                              {"forward+minmax", false, AdjointMethod::Standard, Limiter::FctMinmax},
                              {"artsource+minmax", true, AdjointMethod::ArtSource, Limiter::FctMinmax}};
  std::string csv = "scheme," + norm_csv_header() + ",mass_rel_change\n";
  double max_courant = 0.0;
  for (const Row& r : rows) {
    SchemeConfig c = base;
    c.limiter = r.limiter;
    ctx.log << "  " << r.name << '\n';
    CellField q = ctx.timed(r.name, [&] {
      if (r.adjoint) return backward_transport(r.method, q_end, cs.wind, c, horizon);
      ForwardResult fr = run_forward(q0, horizon, c, cs.wind);
      max_courant = std::max(max_courant, fr.max_courant);
      return fr.q_final;
    });
    const CellField& start = r.adjoint ? q_end : q0;
    const CellField& target = r.adjoint ? q0 : q_end;
    const double m0 = mass(start, ones);
    const double dm = (mass(q, ones) - m0) / m0;
    csv += r.name + "," + to_csv_row(compute_norms(q, target, bounds)) + "," + fmt(dm) + "\n";
  }
  ctx.note_grid(*grid, base.dt, steps_for(horizon, base.dt), max_courant);
  ctx.write("advect_table.csv", csv);
}

void adjoint_compare(Context& ctx) {
  KeyValueConfig p = ctx.spec.params;
  if (!p.has("grid")) p.set("grid", "2");
  const int directions = p.get_int("directions", 5);
  const std::vector<std::string> labels = p.get_list("methods", "standard,artsource-nolim,artsource+minmax");
  std::string fd_csv = "method,direction,adjoint,fd,rel_error,eps\n";
  std::string sim_csv = "method,gnorm,cosine_vs_standard,rel_diff_vs_standard\n";
  Eigen::VectorXd g_std;
  bool first = true;
  for (const std::string& label : labels) {
    KeyValueConfig pc = p;
    pc.set("method", label);
    AssimSetup s = ctx.timed("setup:" + label, [&] { return make_assim_setup(pc); });
    if (first) ctx.note_grid(*s.problem.grid, s.problem.config.dt, s.problem.num_steps(), max_courant_of(s));
    first = false;
    std::vector<Eigen::VectorXd> dirs;
    for (int k = 0; k < directions; ++k) dirs.push_back(smooth_direction(*s.problem.grid, ctx.spec.seed + k));
    const GradientCheckReport rep = ctx.timed("fd:" + label, [&] {
      return gradient_check(s.problem, s.method.method, s.problem.background, dirs);
    });
    for (std::size_t k = 0; k < rep.directions.size(); ++k) {
      const auto& d = rep.directions[k];
      fd_csv += label + "," + std::to_string(k) + "," + fmt(d.adjoint) + "," + fmt(d.best_fd) + "," +
                fmt(d.rel_error) + "," + fmt(d.best_eps) + "\n";
    }
    const Eigen::VectorXd g = gradient(s.problem.background, s.problem, s.method.method).values;
    if (g_std.size() == 0 && s.method.method == AdjointMethod::Standard) g_std = g;
    const double cosine = g_std.size() ? g.dot(g_std) / (g.norm() * g_std.norm()) : NAN;
    const double rel = g_std.size() ? (g - g_std).norm() / g_std.norm() : NAN;
    sim_csv += label + "," + fmt(g.norm()) + "," + fmt(cosine) + "," + fmt(rel) + "\n";
  }
  ctx.write("adjoint_fd.csv", fd_csv);
  ctx.write("adjoint_similarity.csv", sim_csv);
}

std::string history_name(const std::string& tag) {
  std::string t = tag;
  std::replace(t.begin(), t.end(), '+', '_');
  return "history_" + t + ".csv";
}

void record_run(Context& ctx, const std::string& tag, const AssimOutcome& o, std::string& summary) {
  std::ostringstream h;
  write_history_csv(h, o.result.history);
  ctx.write(history_name(tag), h.str());
  summary += to_csv_row(o.summary) + "\n";
  ctx.log << "  " << tag << ": J " << o.summary.j0 << " -> " << o.summary.j_best << " (" << o.summary.iterations
          << " iterations, " << o.summary.restarts << " restarts)\n";
}

// Runs one assimilation per variant; `vary` adjusts the config for variant i.
void assim_family(Context& ctx, const KeyValueConfig& base, const std::vector<std::string>& tags,
                  const std::function<void(KeyValueConfig&, std::size_t)>& vary) {
  std::string summary = assim_summary_csv_header() + "\n";
  std::map<int, bool> noted;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    KeyValueConfig c = base;
    vary(c, i);
    AssimSetup s = ctx.timed("setup:" + tags[i], [&] { return make_assim_setup(c); });
    if (!noted[s.problem.grid->n_b()]) {
      ctx.note_grid(*s.problem.grid, s.problem.config.dt, s.problem.num_steps(), max_courant_of(s));
      noted[s.problem.grid->n_b()] = true;
    }
    LbfgsConfig lc;
    lc.max_iterations = s.iterations;
    const AssimOutcome o = ctx.timed("minimize:" + tags[i], [&] { return run_assimilation(s, lc); });
    record_run(ctx, tags[i], o, summary);
  }
  ctx.write("summary.csv", summary);
}

void assim_convergence(Context& ctx) {
  const KeyValueConfig p = with_defaults(ctx.spec);
  const auto methods = p.get_list("methods", "standard,artsource-nolim,artsource+minmax");
  assim_family(ctx, p, methods, [&](KeyValueConfig& c, std::size_t i) { c.set("method", methods[i]); });
}

void assim_obs_sweep(Context& ctx) {
  const KeyValueConfig p = with_defaults(ctx.spec);
  const auto strides = p.get_list("obs_strides", "1,2,4,8");
  std::vector<std::string> tags;
  for (const auto& s : strides) tags.push_back("stride" + s);
  assim_family(ctx, p, tags, [&](KeyValueConfig& c, std::size_t i) { c.set("obs_stride", strides[i]); });
}

void assim_mesh_sweep(Context& ctx) {
  const KeyValueConfig p = ctx.spec.params;
  const auto grids = p.get_list("grids", ctx.spec.full ? "2,3,4" : "2,3");
  std::vector<std::string> tags;
  for (const auto& g : grids) tags.push_back("R2B" + std::to_string(parse_grid_level(g)));
  assim_family(ctx, p, tags, [&](KeyValueConfig& c, std::size_t i) {
    c.set("grid", grids[i]);
    if (!p.has("dt")) c.set("dt", fmt(default_dt(parse_grid_level(grids[i]))));
  });
}

void assim_weight_sweep(Context& ctx) {
  KeyValueConfig p = with_defaults(ctx.spec);
  if (!p.has("case")) p.set("case", "two_slotted_cylinders:deform_nondiv");
  if (!p.has("background_mode")) p.set("background_mode", "halfdomain");
  if (!p.has("reference_limiter")) p.set("reference_limiter", "minmax");
  const auto weights = p.get_list("w_o_values", "0.5,0.6,0.7,0.8,0.9,1.0");
  const auto methods = p.get_list("methods", "standard,artsource+minmax");
  std::vector<std::string> tags;
  std::vector<std::pair<std::string, std::string>> runs;
  for (const auto& m : methods)
    for (const auto& w : weights) {
      tags.push_back(m + "_wo" + w);
      runs.emplace_back(m, w);
    }
  assim_family(ctx, p, tags, [&](KeyValueConfig& c, std::size_t i) {
    c.set("method", runs[i].first);
    const double wo = std::stod(runs[i].second);
    c.set("w_o", fmt(wo));
    c.set("w_b", fmt(1.0 - wo));
  });
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  Context ctx{spec, log, json::object(), "validate"};
  try {
    const auto& fam = experiment_families();
    if (std::find(fam.begin(), fam.end(), spec.family) == fam.end())
      throw std::invalid_argument("unknown experiment family: " + spec.family);
    std::filesystem::create_directories(spec.out_dir);
    ctx.manifest["family"] = spec.family;
    ctx.manifest["seed"] = spec.seed;
    ctx.manifest["threads"] = spec.threads;
    ctx.manifest["full"] = spec.full;
    ctx.manifest["version"] = "0.1.0";
    ctx.manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
    ctx.manifest["params"] = spec.params.entries();
    ctx.manifest["outputs"] = json::array();
    ctx.manifest["grids"] = json::array();
    log << "experiment " << spec.family << '\n';
    const auto t0 = std::chrono::steady_clock::now();
    if (spec.family == "advect-table") advect_table(ctx);
    else if (spec.family == "adjoint-compare") adjoint_compare(ctx);
    else if (spec.family == "assim-convergence") assim_convergence(ctx);
    else if (spec.family == "assim-obs-sweep") assim_obs_sweep(ctx);
    else if (spec.family == "assim-mesh-sweep") assim_mesh_sweep(ctx);
    else assim_weight_sweep(ctx);
    ctx.manifest["timings"]["total"] = seconds_since(t0);
    ctx.stage = "manifest";
    std::ofstream m(spec.out_dir / "manifest.json");
    m << ctx.manifest.dump(2) << '\n';
    if (!m) throw std::runtime_error("cannot write manifest.json");
    return 0;
  } catch (const std::exception& e) {
    log << "error in stage '" << ctx.stage << "': " << e.what() << '\n';
    return 1;
  }
}

}  // namespace icoadv
