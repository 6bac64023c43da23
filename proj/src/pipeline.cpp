#include "atomo/pipeline.hpp"

#include "atomo/errors.hpp"
#include "atomo/io.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace atomo {

namespace fs = std::filesystem;

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string indexed(const std::string& stem, std::size_t i) {
  return stem + "_" + std::to_string(i) + ".atgr";
}

}  // namespace

TomographyOperator make_operator(const ExperimentConfig& config) {
  config.validate();
  return TomographyOperator(config.geometry, config.n);
}

SvtdCache obtain_svd_cache(const SystemGeometry& geometry, double s, int n) {
  const char* dir = std::getenv("ATOMO_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return decompose_all(geometry, s, n);
  const fs::path path = fs::path(dir) / ("svd_" + hex(geometry_hash(geometry)) + "_n" + std::to_string(n) +
                                         "_s" + format_double(s) + ".atsv");
  if (fs::exists(path)) {
    try {
      SvtdCache cache = read_svd_cache(path);
      cache.check(geometry, n);
      if (cache.sobolev_order() == s) return cache;
    } catch (const ConfigError& e) {
      std::clog << "atomo: ignoring unusable SVD cache " << path << ": " << e.what() << '\n';
    }
  }
  SvtdCache cache = decompose_all(geometry, s, n);
  write_svd_cache(path, cache);
  return cache;
}

Reconstruction run_solver(const SolverConfig& solver, const WavefrontSet& waves, const TomographyOperator& op,
                          const SvtdCache* cache) {
  SolverOptions options;
  options.iterations = solver.iterations;
  options.step_scale = solver.step_scale;
  switch (solver.kind) {
    case SolverKind::Svtd: {
      if (cache == nullptr) {
        const SvtdCache fresh = obtain_svd_cache(op.geometry(), solver.sobolev_order, op.n());
        return {reconstruct(waves, fresh, op, solver.filter), {}};
      }
      if (cache->sobolev_order() != solver.sobolev_order) {
        throw ConfigError("SVD cache was built for a different Sobolev order");
      }
      return {reconstruct(waves, *cache, op, solver.filter), {}};
    }
    case SolverKind::Fd:
      options.iterations = 1;
      [[fallthrough]];
    case SolverKind::IterativeFd: {
      auto r = iterative_fd(waves, op, options);
      return {std::move(r.stack), std::move(r.residuals)};
    }
    case SolverKind::Gradient: {
      auto r = gradient_solve(waves, op, options);
      return {std::move(r.stack), std::move(r.residuals)};
    }
  }
  throw ConfigError("unknown solver");
}

PipelineResult run_experiment(const ExperimentConfig& config, const TomographyOperator& op,
                              const SvtdCache* cache) {
  PipelineResult result;
  auto t0 = Clock::now();
  TurbulenceParams params = config.turbulence;
  params.seed = config.seed;
  result.screens = generate_screens(params, op);
  result.timings["simulate"] = seconds_since(t0);

  t0 = Clock::now();
  result.waves = apply_forward(result.screens.screens, op);
  result.timings["forward"] = seconds_since(t0);

  t0 = Clock::now();
  std::optional<SvtdCache> local;
  if (config.solver.kind == SolverKind::Svtd && cache == nullptr) {
    local = obtain_svd_cache(op.geometry(), config.solver.sobolev_order, op.n());
    cache = &*local;
  }
  result.reconstruction = run_solver(config.solver, result.waves, op, cache);
  result.timings["reconstruct"] = seconds_since(t0);

  t0 = Clock::now();
  result.report = evaluate_quality(result.reconstruction.stack, result.screens.screens, op, config.evaluation_grid());
  result.timings["evaluate"] = seconds_since(t0);
  return result;
}

void write_stack(const fs::path& dir, const std::string& stem, const LayerStack& stack) {
  for (std::size_t l = 0; l < stack.size(); ++l) write_grid(dir / indexed(stem, l), stack.layers[l]);
}

LayerStack read_stack(const fs::path& dir, const std::string& stem, const TomographyOperator& op) {
  LayerStack stack;
  for (std::size_t l = 0; l < op.layer_count(); ++l) stack.layers.push_back(read_grid(dir / indexed(stem, l)));
  op.check(stack);
  return stack;
}

void write_waves(const fs::path& dir, const WavefrontSet& waves) {
  for (std::size_t g = 0; g < waves.size(); ++g) write_grid(dir / indexed("star", g), waves.stars[g]);
}

WavefrontSet read_waves(const fs::path& dir, const TomographyOperator& op) {
  WavefrontSet waves;
  for (std::size_t g = 0; g < op.star_count(); ++g) waves.stars.push_back(read_grid(dir / indexed("star", g)));
  op.check(waves);
  return waves;
}

void write_report(const fs::path& out_dir, const QualityReport& report) {
  CsvTable table;
  table.header = {"theta_x_arcsec", "theta_y_arcsec", "separation_arcsec", "rms", "strehl"};
  for (std::size_t i = 0; i < report.directions.size(); ++i) {
    const double tx = rad_to_arcsec(report.directions[i].first);
    const double ty = rad_to_arcsec(report.directions[i].second);
    table.rows.push_back({format_double(tx), format_double(ty), format_double(std::hypot(tx, ty)),
                          format_double(report.rms[i]), format_double(report.strehl[i])});
  }
  table.write(out_dir / "report.csv");

  CsvTable layers;
  layers.header = {"layer", "relative_error"};
  for (std::size_t l = 0; l < report.layer_errors.size(); ++l) {
    layers.rows.push_back({std::to_string(l), format_double(report.layer_errors[l])});
  }
  layers.write(out_dir / "layers.csv");
}

void write_residuals(const fs::path& out_dir, const std::vector<double>& residuals) {
  CsvTable table;
  table.header = {"iteration", "residual"};
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    table.rows.push_back({std::to_string(k), format_double(residuals[k])});
  }
  table.write(out_dir / "residuals.csv");
}

void write_manifest(const fs::path& out_dir, const ExperimentConfig& config,
                    const std::map<std::string, double>& timings, const std::string& step) {
  json m;
  m["atomo_version"] = ATOMO_VERSION;
  m["step"] = step;
  m["config_hash"] = hex(config_hash(config));
  m["geometry_hash"] = hex(geometry_hash(config.geometry));
  m["strehl_proxy"] = "exp(-rms^2), rms piston-removed over the aperture";
  m["config"] = json::parse(config_to_json(config));
  json t = json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  m["timings_seconds"] = t;
  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
  if (!out) throw ConfigError("cannot write manifest in " + out_dir.string());
  out << m.dump(2) << '\n';
}

PipelineResult run_pipeline(const ExperimentConfig& config, const fs::path& out_dir) {
  const auto t0 = Clock::now();
  const TomographyOperator op = make_operator(config);
  PipelineResult result = run_experiment(config, op);
  write_stack(out_dir / "screens", "layer", result.screens.screens);
  write_waves(out_dir / "wavefronts", result.waves);
  write_stack(out_dir / "reconstructions", "layer", result.reconstruction.stack);
  write_report(out_dir, result.report);
  write_residuals(out_dir, result.reconstruction.residuals);
  result.timings["total"] = seconds_since(t0);
  write_manifest(out_dir, config, result.timings, "pipeline");
  return result;
}

SweepParameter parse_sweep_parameter(const std::string& name) {
  if (name == "alpha") return SweepParameter::Alpha;
  if (name == "iterations") return SweepParameter::Iterations;
  throw ConfigError("sweep parameter must be 'alpha' or 'iterations'");
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepParameter parameter,
                            const std::vector<double>& values, const std::optional<fs::path>& csv_path) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("sweep values must be finite");
    if (parameter == SweepParameter::Alpha && !(v > 0.0)) throw ConfigError("alpha values must be positive");
    if (parameter == SweepParameter::Iterations && (v < 0.0 || v != std::floor(v))) {
      throw ConfigError("iteration values must be non-negative integers");
    }
  }
  ExperimentConfig base = config;
  if (parameter == SweepParameter::Alpha && base.solver.kind != SolverKind::Svtd) {
    throw ConfigError("alpha sweeps need the svtd solver");
  }
  if (parameter == SweepParameter::Iterations && base.solver.kind == SolverKind::Svtd) {
    throw ConfigError("iteration sweeps need an iterative solver");
  }
  if (parameter == SweepParameter::Iterations && base.solver.kind == SolverKind::Fd) {
    base.solver.kind = SolverKind::IterativeFd;
  }
  const TomographyOperator op = make_operator(base);
  TurbulenceParams params = base.turbulence;
  params.seed = base.seed;
  const ScreenSet screens = generate_screens(params, op);
  const WavefrontSet waves = apply_forward(screens.screens, op);
  std::optional<SvtdCache> cache;
  if (base.solver.kind == SolverKind::Svtd) {
    cache = obtain_svd_cache(op.geometry(), base.solver.sobolev_order, op.n());
  }
  const EvaluationGrid grid = base.evaluation_grid();

  std::vector<SweepRow> rows;
  for (double v : values) {
    SolverConfig solver = base.solver;
    if (parameter == SweepParameter::Alpha) {
      solver.filter = FilterSpec::tikhonov(v);
    } else {
      solver.iterations = static_cast<int>(v);
    }
    const Reconstruction r = run_solver(solver, waves, op, cache ? &*cache : nullptr);
    const QualityReport q = evaluate_quality(r.stack, screens.screens, op, grid);
    rows.push_back({v, q.layer_errors, q.mean_rms, q.mean_strehl});
  }

  if (csv_path) {
    CsvTable table;
    table.header.push_back(parameter == SweepParameter::Alpha ? "alpha" : "iterations");
    for (std::size_t l = 0; l < op.layer_count(); ++l) table.header.push_back("layer_error_" + std::to_string(l));
    table.header.push_back("mean_rms");
    table.header.push_back("mean_strehl");
    for (const auto& row : rows) {
      std::vector<std::string> cells{format_double(row.value)};
      for (double e : row.layer_errors) cells.push_back(format_double(e));
      cells.push_back(format_double(row.mean_rms));
      cells.push_back(format_double(row.mean_strehl));
      table.rows.push_back(std::move(cells));
    }
    table.write(*csv_path);
  }
  return rows;
}

DiagnoseResult diagnose(const ExperimentConfig& config, const fs::path& out_dir) {
  const TomographyOperator op = make_operator(config);
  TurbulenceParams params = config.turbulence;
  params.seed = config.seed;
  const ScreenSet screens = generate_screens(params, op);
  const WavefrontSet waves = apply_forward(screens.screens, op);
  const SvtdCache cache = obtain_svd_cache(op.geometry(), config.solver.sobolev_order, op.n());

  DiagnoseResult result;
  result.picard = picard_diagnostic(waves, cache, config.diagnostics.picard_threshold);
  result.wellposedness = wellposedness_scan(op.geometry(), op.n(), config.diagnostics.histogram_bins);

  CsvTable picard;
  picard.header = {"index", "sigma", "partial_sum"};
  for (std::size_t i = 0; i < result.picard.sigmas.size(); ++i) {
    picard.rows.push_back(
        {std::to_string(i), format_double(result.picard.sigmas[i]), format_double(result.picard.partial_sums[i])});
  }
  picard.write(out_dir / "picard.csv");

  CsvTable well;
  well.header = {"log10_sigma_lo", "log10_sigma_hi", "count"};
  const auto& w = result.wellposedness;
  for (std::size_t b = 0; b < w.counts.size(); ++b) {
    well.rows.push_back({format_double(w.bin_edges[b]), format_double(w.bin_edges[b + 1]), std::to_string(w.counts[b])});
  }
  well.write(out_dir / "wellposedness.csv");
  return result;
}

void export_plotdata(const fs::path& artifact_dir) {
  for (const char* name : {"report.csv", "layers.csv"}) {
    if (!fs::exists(artifact_dir / name)) {
      throw ConfigError("export-plotdata: missing " + (artifact_dir / name).string());
    }
  }
  const fs::path out = artifact_dir / "plotdata";

  const CsvTable report = CsvTable::read(artifact_dir / "report.csv");
  const int cx = report.column("theta_x_arcsec");
  const int cy = report.column("theta_y_arcsec");
  const int crms = report.column("rms");
  const int cs = report.column("strehl");
  CsvTable sep;
  sep.header = {"theta_x_arcsec", "theta_y_arcsec", "separation_arcsec", "rms", "strehl"};
  for (const auto& row : report.rows) {
    const double tx = std::stod(row.at(cx));
    const double ty = std::stod(row.at(cy));
    sep.rows.push_back({row.at(cx), row.at(cy), format_double(std::hypot(tx, ty)), row.at(crms), row.at(cs)});
  }
  sep.write(out / "error_vs_separation.csv");

  CsvTable layers = CsvTable::read(artifact_dir / "layers.csv");
  layers.write(out / "layer_errors.csv");

  CsvTable history;
  history.header = {"iteration", "residual"};
  if (fs::exists(artifact_dir / "residuals.csv")) history = CsvTable::read(artifact_dir / "residuals.csv");
  history.write(out / "residual_history.csv");
}

}  // namespace atomo
