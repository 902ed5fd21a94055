#pragma once

#include "proxsarah/metrics.hpp"
#include "proxsarah/solvers.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace proxsarah {

/// One `solver = <name> key=value ...` line of a run configuration.
struct SolverSpec {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::size_t line = 0;
};

/// Flat `key = value` run configuration. See README for the schema.
struct ExperimentConfig {
  std::string problem = "nnpca";  // nnpca | binclass
  std::string dataset = "synthetic";
  std::size_t synthetic_n = 1000;
  std::size_t synthetic_d = 50;
  std::optional<std::uint64_t> synthetic_seed;  // defaults to seed
  double separability = 0.9;
  std::optional<std::size_t> dimension;
  std::string loss = "two-layer";
  std::optional<double> lambda;  // defaults to 1/n
  double omega = 1.0;
  double test_fraction = 0.0;
  bool normalize = true;
  double epochs = 20.0;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  std::size_t rows_per_epoch = 10;
  OutputRule output_iterate = OutputRule::kLast;
  bool wall_clock = false;
  std::optional<double> f_star;
  std::vector<SolverSpec> solvers;

  std::filesystem::path base_dir;  // relative dataset paths are resolved against it
};

/// Throws ParseError (with the line number) for malformed input or unknown keys.
ExperimentConfig parse_experiment_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Command-line values that take precedence over the file.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> epochs;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> threads;
};

void apply_overrides(ExperimentConfig& cfg, const RunOverrides& overrides);

struct SolverOutcome {
  std::string label;
  std::string family;
  RunResult result;
  std::filesystem::path csv;
};

struct ExperimentOutcome {
  std::vector<SolverOutcome> solvers;
  std::vector<std::filesystem::path> svg_files;
  std::filesystem::path manifest;
  double f_star = 0.0;
  bool absolute_residual = false;
};

/// Loads the problem, runs every solver, fills relative residuals against the
/// session F*, and writes CSV traces, SVG plots and manifest.json.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kTraceCsvHeader =
    "epoch_fraction,objective,rel_residual,grad_map_norm_sq,train_acc,test_acc,wall_ms";

/// Header line plus one row per trace row; reals with 17 significant digits,
/// absent accuracies as empty fields.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart; with log_y, nonpositive values are dropped.
std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<PlotSeries>& series, bool log_y);

}  // namespace proxsarah
