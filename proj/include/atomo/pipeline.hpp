#pragma once

#include "atomo/config.hpp"
#include "atomo/frame.hpp"
#include "atomo/metrics.hpp"
#include "atomo/svtd.hpp"
#include "atomo/turbulence.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace atomo {

/// Builds the operator after the extent check; ConfigError lists violating pairs.
TomographyOperator make_operator(const ExperimentConfig& config);

/// SVD cache for (geometry, s, n). With ATOMO_CACHE_DIR set, a matching cache file
/// is loaded from there, or written after a fresh build.
SvtdCache obtain_svd_cache(const SystemGeometry& geometry, double s, int n);

struct Reconstruction {
  LayerStack stack;
  std::vector<double> residuals;  // empty for svtd
};

/// Runs the configured solver. cache is used (and checked) for svtd.
Reconstruction run_solver(const SolverConfig& solver, const WavefrontSet& waves, const TomographyOperator& op,
                          const SvtdCache* cache);

struct PipelineResult {
  ScreenSet screens;
  WavefrontSet waves;
  Reconstruction reconstruction;
  QualityReport report;
  std::map<std::string, double> timings;  // seconds
};

/// simulate -> forward -> reconstruct -> evaluate in memory.
PipelineResult run_experiment(const ExperimentConfig& config, const TomographyOperator& op,
                              const SvtdCache* cache = nullptr);

/// run_experiment plus artifacts in out_dir: screens/, wavefronts/, reconstructions/,
/// report.csv, layers.csv, residuals.csv and manifest.json.
PipelineResult run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Artifact writers and readers shared by the pipeline and the CLI steps.
void write_stack(const std::filesystem::path& dir, const std::string& stem, const LayerStack& stack);
LayerStack read_stack(const std::filesystem::path& dir, const std::string& stem, const TomographyOperator& op);
void write_waves(const std::filesystem::path& dir, const WavefrontSet& waves);
WavefrontSet read_waves(const std::filesystem::path& dir, const TomographyOperator& op);
void write_report(const std::filesystem::path& out_dir, const QualityReport& report);
void write_residuals(const std::filesystem::path& out_dir, const std::vector<double>& residuals);
void write_manifest(const std::filesystem::path& out_dir, const ExperimentConfig& config,
                    const std::map<std::string, double>& timings, const std::string& step);

enum class SweepParameter { Alpha, Iterations };

SweepParameter parse_sweep_parameter(const std::string& name);

struct SweepRow {
  double value = 0.0;
  std::vector<double> layer_errors;
  double mean_rms = 0.0;
  double mean_strehl = 0.0;
};

/// One reconstruction per value on shared screens and a shared SVD cache.
/// Alpha sweeps set a Tikhonov filter on the svtd solver; iteration sweeps set
/// solver.iterations. With csv_path set, writes value, layer_error_<l>, mean_rms,
/// mean_strehl.
std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepParameter parameter,
                            const std::vector<double>& values,
                            const std::optional<std::filesystem::path>& csv_path = std::nullopt);

struct DiagnoseResult {
  PicardReport picard;
  WellposednessReport wellposedness;
};

/// Picard diagnostic on the simulated data with the configured s, and the
/// well-posedness scan of the geometry. Writes picard.csv and wellposedness.csv.
DiagnoseResult diagnose(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Reads report.csv, layers.csv and residuals.csv from an artifact directory and
/// writes plotdata/error_vs_separation.csv, plotdata/layer_errors.csv and
/// plotdata/residual_history.csv.
void export_plotdata(const std::filesystem::path& artifact_dir);

}  // namespace atomo
