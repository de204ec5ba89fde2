#ifndef ICOADV_HARNESS_HPP_
#define ICOADV_HARNESS_HPP_
// Experiment orchestration: key=value run configs, assimilation set-up from a
// config, and the experiment families that write CSV tables and a JSON
// manifest into an output directory.

#include "icoadv/assim.hpp"
#include "icoadv/checks.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace icoadv {

/// Text config: one `key = value` per line, `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& is);
  static KeyValueConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Applies `key=value`.
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  /// Comma-separated list.
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const;
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct CaseSpec {
  ScalarCase scalar;
  WindCase wind;
};

/// "scalar:wind", e.g. "cosine_bell:solid_rotation".
CaseSpec parse_case_spec(std::string_view spec);
/// "3" or "R2B3" (also "R2B03").
int parse_grid_level(std::string_view s);
/// Keeps the Courant number near 0.35 for solid-body rotation.
double default_dt(int n_b);

/// Method labels: standard, artsource-nolim, artsource+minmax, artsource+positive.
struct MethodSpec {
  AdjointMethod method = AdjointMethod::ArtSource;
  Limiter limiter = Limiter::FctMinmax;
  std::string label() const;
};
MethodSpec parse_method_spec(std::string_view label);

struct AssimSetup {
  AssimProblem problem;
  MethodSpec method;
  CaseSpec cases;
  CellField truth;
  int iterations = 50;
};

/// Keys: case, grid, dt, T, w_b, w_o, n_obs (or obs_stride), background_mode,
/// method, limiter, order, truth (exact|reference), reference_limiter,
/// checkpoint_stride, split_lon, iters. Missing keys take the defaults of a
/// moving-vortices twin experiment on R2B3.
AssimSetup make_assim_setup(const KeyValueConfig& cfg);

struct AssimRunSummary {
  std::string label;
  int n_b = 0;
  int n_obs = 0;
  double w_b = 0.0;
  double w_o = 0.0;
  int iterations = 0;
  int restarts = 0;
  int evaluations = 0;
  double j0 = 0.0;
  double j_best = 0.0;
  NormReport background_error;
  NormReport analysis_error;
  bool wolfe_ok = true;
  double seconds = 0.0;
};

struct AssimOutcome {
  LbfgsResult result;
  AssimRunSummary summary;
};

/// Minimizes from the background; setup.problem is left in its final state
/// (restarts move its background).
AssimOutcome run_assimilation(AssimSetup& setup, const LbfgsConfig& config);

/// Checks every accepted record against the strong Wolfe conditions.
bool history_is_wolfe(const std::vector<IterationRecord>& history, const LbfgsConfig& config);

std::string assim_summary_csv_header();
std::string to_csv_row(const AssimRunSummary& s);

/// Adjoint sweep with zero forcing started from q_end at the final time.
CellField backward_transport(AdjointMethod method, const CellField& q_end, const WindCase& wind,
                             const SchemeConfig& config, double horizon);

struct ExperimentSpec {
  std::string family;
  KeyValueConfig params;
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 1;
  int threads = 1;
  bool full = false;
};

const std::vector<std::string>& experiment_families();

/// Runs one family and writes its CSV files and manifest.json into out_dir.
/// Returns 0 on success; errors are reported on `log` with the failing stage.
int run_experiment(const ExperimentSpec& spec, std::ostream& log);

}  // namespace icoadv

#endif  // ICOADV_HARNESS_HPP_
