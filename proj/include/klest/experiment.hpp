#ifndef KLEST_EXPERIMENT_HPP
#define KLEST_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "klest/estimator.hpp"
#include "klest/landweber.hpp"
#include "klest/problems.hpp"
#include "klest/validation.hpp"

namespace klest {

/// Flat `section.key = value` configuration. `values` always holds the
/// effective configuration with every default filled in.
struct ExperimentConfig {
  std::map<std::string, std::string> values;
  std::filesystem::path base_dir = ".";

  std::string generator;
  long n = 0;
  double eta = 0.0;
  double beta = 0.0;
  double depth = 0.0;
  std::string matrix_path, data_path, x_true_path;

  double noise_rel = 0.0;
  std::uint64_t noise_seed = 0;

  LandweberConfig landweber;
  std::string x0_path;

  EstimatorConfig estimator;

  bool run_tikhonov = false;
  std::vector<double> levels;
  std::vector<std::uint64_t> seeds;
  bool run_svd_check = false;
  std::vector<double> mu_grid;
  double growth_threshold = kGrowthThreshold;

  std::string trace_path, report_path, bounds_path;
};

/// Default value of every recognised key.
const std::map<std::string, std::string>& config_defaults();

/// Validates keys and values and fills defaults. Throws ConfigError.
ExperimentConfig make_config(const std::map<std::string, std::string>& entries,
                             const std::filesystem::path& base_dir = ".");
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig with_overrides(const ExperimentConfig& cfg,
                                const std::map<std::string, std::string>& overrides);

/// Path relative to the config file directory unless absolute.
std::filesystem::path resolve_path(const ExperimentConfig& cfg, const std::string& p);

struct ExperimentResult {
  ProblemSpec problem;
  std::optional<NoisyData> noise;
  Vector data;
  IterationTrace trace;
  EstimateTrack track;
  BoundCurves bounds;
  std::optional<SourceConditionModel> bound_model;
  std::optional<RateExperimentResult> rate;
  std::optional<SmoothnessVerdict> smoothness;
  std::optional<SpectralFit> spectral;
  std::vector<std::string> notes;
};

ProblemSpec build_problem(const ExperimentConfig& cfg);

/// Landweber, estimator and the validations enabled in cfg. Writes nothing.
ExperimentResult run_pipeline(const ExperimentConfig& cfg);

nlohmann::ordered_json make_report(const ExperimentConfig& cfg, const ExperimentResult& r);

void write_trace_csv(std::ostream& out, const ExperimentResult& r);
void write_track_csv(std::ostream& out, const ExperimentResult& r);
void write_bounds_csv(std::ostream& out, const ExperimentResult& r);

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

/// Maps the active exception onto an exit code and prints it to err.
int report_exception(std::ostream& err);

/// Runs the pipeline and writes the trace CSV and the JSON report.
int run_estimate(const ExperimentConfig& cfg, std::ostream& err);

const std::vector<std::string>& figure_names();
ExperimentConfig figure_config(const std::string& name);

/// Writes <name>_track.csv, <name>_bounds.csv and <name>_report.json.
int run_figure_suite(const std::string& name, const std::filesystem::path& out_dir,
                     std::ostream& err, const std::map<std::string, std::string>& overrides = {});

struct TikhonovRow {
  std::string problem;
  std::optional<double> mu_hat;
  std::optional<double> predicted;
  std::optional<double> observed;
  std::optional<double> observed_rel;
  bool misfit = false;
  std::string note;
};

inline constexpr double kMisfitThreshold = 0.1;

std::vector<TikhonovRow> tikhonov_table(const std::vector<ExperimentConfig>& cfgs);
void write_tikhonov_csv(std::ostream& out, const std::vector<TikhonovRow>& rows);
int run_tikhonov_table(const std::vector<ExperimentConfig>& cfgs, const std::filesystem::path& out,
                       std::ostream& err);

/// Spectral summability check only; prints the JSON result to out.
int run_svd_check(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace klest

#endif  // KLEST_EXPERIMENT_HPP
