#include <doctest.h>

#include "icoadv/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace icoadv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("icoadv_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("key=value config parsing") {
  std::istringstream is("# run\ncase = vortex:moving_vortices\n\n grid=R2B2  # coarse\nw_b = 0.25\nlist = a, b ,c\n");
  const KeyValueConfig c = KeyValueConfig::parse(is);
  CHECK(c.get("case", "") == "vortex:moving_vortices");
  CHECK(parse_grid_level(c.get("grid", "")) == 2);
  CHECK(c.get_double("w_b", 0.0) == 0.25);
  CHECK(c.get_int("missing", 7) == 7);
  CHECK(c.get_list("list", "") == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS(c.get_int("w_b", 0));
  CHECK_THROWS(c.require("nothing"));
  std::istringstream bad("just words\n");
  CHECK_THROWS(KeyValueConfig::parse(bad));
  KeyValueConfig d;
  d.set_assignment("iters=3");
  CHECK(d.get_int("iters", 0) == 3);
  CHECK_THROWS(d.set_assignment("noequals"));
}

TEST_CASE("case, grid and method names") {
  const CaseSpec cs = parse_case_spec("slotted_cylinder:deform_div");
  CHECK(cs.scalar.id == ScalarCaseId::SlottedCylinder);
  CHECK(cs.wind.id == WindCaseId::DeformationalDiv);
  CHECK_THROWS(parse_case_spec("cosine_bell"));
  CHECK(parse_grid_level("R2B04") == 4);
  CHECK(parse_grid_level("3") == 3);
  CHECK_THROWS(parse_grid_level("R2Bx"));
  CHECK(default_dt(4) == 600.0);
  CHECK(default_dt(3) == 1200.0);
  for (const char* m : {"standard", "artsource-nolim", "artsource+minmax", "artsource+positive"})
    CHECK(parse_method_spec(m).label() == m);
  CHECK_THROWS(parse_method_spec("adjoint"));
}

TEST_CASE("assimilation set-up from a config") {
  KeyValueConfig c;
  c.set("grid", "1");
  c.set("T", std::to_string(10 * 4800.0));
  c.set("method", "standard");
  c.set("obs_stride", "2");
  const AssimSetup s = make_assim_setup(c);
  CHECK(s.problem.grid->num_cells() == 320);
  CHECK(s.problem.obs.num_obs() == 160);
  CHECK(s.problem.obs.num_levels() == 11);
  CHECK(s.problem.config.limiter == Limiter::None);
  c.set("limiter", "minmax");
  CHECK_THROWS_WITH(make_assim_setup(c), "standard adjoint undefined for limited scheme");
}

TEST_CASE("short assimilation keeps Wolfe steps") {
  KeyValueConfig c;
  c.set("grid", "1");
  c.set("T", std::to_string(20 * 4800.0));
  c.set("iters", "8");
  AssimSetup s = make_assim_setup(c);
  LbfgsConfig lc;
  lc.max_iterations = s.iterations;
  const AssimOutcome o = run_assimilation(s, lc);
  CHECK(o.summary.wolfe_ok);
  CHECK(o.summary.j_best < o.summary.j0);
  CHECK(o.summary.label == "artsource+minmax");
}

TEST_CASE("experiment outputs, manifest and reproducibility") {
  ExperimentSpec spec;
  spec.family = "advect-table";
  spec.params.set("grid", "1");
  spec.out_dir = scratch("a");
  std::ostringstream log;
  REQUIRE(run_experiment(spec, log) == 0);
  const std::string table = slurp(spec.out_dir / "advect_table.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);
  const auto m = nlohmann::json::parse(slurp(spec.out_dir / "manifest.json"));
  CHECK(m["grids"][0]["cells"] == 320);
  CHECK(m["grids"][0].contains("dt"));
  CHECK(m["grids"][0].contains("n_steps"));
  CHECK(m.contains("max_courant"));
  CHECK(m["timings"].contains("total"));
  spec.out_dir = scratch("b");
  REQUIRE(run_experiment(spec, log) == 0);
  CHECK(slurp(spec.out_dir / "advect_table.csv") == table);
}

TEST_CASE("experiment errors name the stage") {
  ExperimentSpec spec;
  spec.family = "nonsense";
  spec.out_dir = scratch("c");
  std::ostringstream log;
  CHECK(run_experiment(spec, log) != 0);
  spec.family = "advect-table";
  spec.params.set("case", "cosine_bell:nowhere");
  CHECK(run_experiment(spec, log) != 0);
  CHECK(log.str().find("error in stage") != std::string::npos);
}
