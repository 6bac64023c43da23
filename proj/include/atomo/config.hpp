#pragma once

#include "atomo/geometry.hpp"
#include "atomo/metrics.hpp"
#include "atomo/svtd.hpp"
#include "atomo/turbulence.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace atomo {

enum class SolverKind { Svtd, Fd, IterativeFd, Gradient };

std::string to_string(SolverKind kind);
SolverKind parse_solver_kind(const std::string& name);

struct SolverConfig {
  SolverKind kind = SolverKind::Svtd;
  double sobolev_order = 1.0;
  FilterSpec filter = FilterSpec::tikhonov(1e-2);
  int iterations = 5;
  double step_scale = 1.0;
};

/// One guide star with its direction in arcsec.
struct StarConfig {
  double x_arcsec = 0.0;
  double y_arcsec = 0.0;
  StarKind kind = StarKind::NGS;
};

/// Ring of equally spaced stars; expanded into SystemGeometry::stars on load.
struct AsterismConfig {
  int count = 6;
  double radius_arcsec = 30.0;
  StarKind kind = StarKind::NGS;
  double first_angle_deg = 0.0;
};

struct EvaluationConfig {
  int grid_size = 5;
  double fov_arcsec = 120.0;
};

struct DiagnosticsConfig {
  double picard_threshold = 1.5;
  int histogram_bins = 20;
};

struct ExperimentConfig {
  std::string name = "custom";
  SystemGeometry geometry;
  std::vector<StarConfig> stars;          // listed first
  std::vector<AsterismConfig> asterisms;  // appended in order; geometry.stars holds the expansion
  int n = 64;
  TurbulenceParams turbulence;
  SolverConfig solver;
  EvaluationConfig evaluation;
  DiagnosticsConfig diagnostics;
  std::uint64_t seed = 1;
  std::string output_dir = "atomo-out";

  /// Rebuilds geometry.stars from stars and asterisms.
  void expand_stars();
  EvaluationGrid evaluation_grid() const;
  /// Geometry, grid and solver invariants. Does not run the extent check.
  void validate() const;
};

/// Parses a JSON config. Unknown keys, wrong types and invalid values raise
/// ConfigError. Missing keys take the defaults above.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the fully resolved config (every default filled in).
std::string config_to_json(const ExperimentConfig& config, int indent = 2);

/// FNV-1a of config_to_json(config, -1).
std::uint64_t config_hash(const ExperimentConfig& config);

/// Built-in presets: "ngs6" and "mixed".
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

}  // namespace atomo
