#include "atomo/errors.hpp"
#include "atomo/io.hpp"
#include "atomo/parallel.hpp"
#include "atomo/pipeline.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace atomo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::string preset_name;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = 1;
};

ExperimentConfig resolve(const CommonOptions& o) {
  if (!o.config_path.empty() && !o.preset_name.empty()) {
    throw ConfigError("use either --config or --preset, not both");
  }
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = load_config(o.config_path);
  } else {
    cfg = preset(o.preset_name.empty() ? "ngs6" : o.preset_name);
  }
  if (o.seed_set) {
    cfg.seed = o.seed;
    cfg.turbulence.seed = o.seed;
  }
  if (!o.out.empty()) cfg.output_dir = o.out;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse sweep value '" + item + "'");
    }
  }
  return values;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_report(const QualityReport& r) {
  std::cout << "layer errors:";
  for (double e : r.layer_errors) std::cout << ' ' << e;
  std::cout << "\nmean rms " << r.mean_rms << ", center rms " << r.center_rms << ", outer rms " << r.outer_rms
            << ", mean strehl proxy " << r.mean_strehl << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atmospheric tomography: simulate, reconstruct and evaluate multi-layer turbulence"};
  app.require_subcommand(1);
  app.fallthrough();
  CommonOptions common;
  app.add_option("--config", common.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--preset", common.preset_name, "built-in preset (ngs6, mixed)");
  app.add_option_function<std::uint64_t>(
      "--seed", [&](const std::uint64_t& s) { common.seed = s, common.seed_set = true; }, "master RNG seed");
  app.add_option("--out", common.out, "output directory");
  app.add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "generate turbulence screens");
  auto* forward = app.add_subcommand("forward", "project screens to guide-star wavefronts");
  auto* recon = app.add_subcommand("reconstruct", "reconstruct layers from wavefronts");
  auto* evaluate = app.add_subcommand("evaluate", "score reconstructions against screens");
  auto* pipeline = app.add_subcommand("pipeline", "simulate, forward, reconstruct and evaluate");
  auto* sweep_cmd = app.add_subcommand("sweep", "quality against alpha or iteration count");
  std::string sweep_param = "alpha";
  std::string sweep_values;
  sweep_cmd->add_option("--param", sweep_param, "alpha or iterations");
  sweep_cmd->add_option("--values", sweep_values, "comma separated values")->required();
  auto* diag = app.add_subcommand("diagnose", "Picard diagnostic and well-posedness scan");
  auto* plot = app.add_subcommand("export-plotdata", "long-format CSV tables from an artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    set_thread_count(common.threads);
    const auto t0 = std::chrono::steady_clock::now();

    if (plot->parsed()) {
      const fs::path dir = common.out.empty() ? fs::path(resolve(common).output_dir) : fs::path(common.out);
      export_plotdata(dir);
      std::cout << "wrote " << (dir / "plotdata").string() << '\n';
      return 0;
    }

    const ExperimentConfig cfg = resolve(common);
    const fs::path out = cfg.output_dir;

    if (pipeline->parsed()) {
      const auto result = run_pipeline(cfg, out);
      print_report(result.report);
      std::cout << "artifacts in " << out.string() << '\n';
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const auto rows = sweep(cfg, parse_sweep_parameter(sweep_param), parse_values(sweep_values), out / "sweep.csv");
      for (const auto& r : rows) std::cout << r.value << ": mean rms " << r.mean_rms << '\n';
      std::cout << "wrote " << (out / "sweep.csv").string() << '\n';
      return 0;
    }
    if (diag->parsed()) {
      const auto d = diagnose(cfg, out);
      std::cout << "picard growth ratio " << d.picard.growth_ratio << " -> "
                << (d.picard.plateau ? "plateau" : "diverging") << '\n'
                << "min sigma " << d.wellposedness.min_sigma << " at (" << d.wellposedness.argmin_j << ", "
                << d.wellposedness.argmin_k << ")\n";
      return 0;
    }

    const TomographyOperator op = make_operator(cfg);
    std::map<std::string, double> timings;
    if (simulate->parsed()) {
      TurbulenceParams params = cfg.turbulence;
      params.seed = cfg.seed;
      write_stack(out / "screens", "layer", generate_screens(params, op).screens);
      timings["simulate"] = elapsed(t0);
      write_manifest(out, cfg, timings, "simulate");
    } else if (forward->parsed()) {
      write_waves(out / "wavefronts", apply_forward(read_stack(out / "screens", "layer", op), op));
      timings["forward"] = elapsed(t0);
      write_manifest(out, cfg, timings, "forward");
    } else if (recon->parsed()) {
      const auto r = run_solver(cfg.solver, read_waves(out / "wavefronts", op), op, nullptr);
      write_stack(out / "reconstructions", "layer", r.stack);
      write_residuals(out, r.residuals);
      timings["reconstruct"] = elapsed(t0);
      write_manifest(out, cfg, timings, "reconstruct");
    } else if (evaluate->parsed()) {
      const auto report = evaluate_quality(read_stack(out / "reconstructions", "layer", op),
                                           read_stack(out / "screens", "layer", op), op, cfg.evaluation_grid());
      write_report(out, report);
      print_report(report);
      timings["evaluate"] = elapsed(t0);
      write_manifest(out, cfg, timings, "evaluate");
    }
    std::cout << "artifacts in " << out.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "atomo: error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "atomo: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "atomo: error: " << e.what() << '\n';
    return 1;
  }
}
