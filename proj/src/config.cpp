#include "atomo/config.hpp"

#include "atomo/errors.hpp"

#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace atomo {

namespace {

using json = nlohmann::ordered_json;

// Checked access to one JSON object: every key read is recorded and leftovers are rejected.
class Section {
 public:
  Section(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) { return node_.at(key); }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) throw ConfigError(path(key) + ": expected a number");
    out = at(key).get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    out = at(key).get<int>();
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!at(key).is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
    out = at(key).get<std::uint64_t>();
  }

  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(path(key) + ": expected a string");
    out = at(key).get<std::string>();
  }

 private:
  const json& node_;
  std::string where_;
  std::set<std::string> seen_;
};

StarKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "NGS") return StarKind::NGS;
  if (s == "LGS") return StarKind::LGS;
  throw ConfigError(where + ": star kind must be \"NGS\" or \"LGS\"");
}

std::string kind_name(StarKind k) { return k == StarKind::NGS ? "NGS" : "LGS"; }

FilterSpec::Kind parse_filter_kind(const std::string& s, const std::string& where) {
  if (s == "tikhonov") return FilterSpec::Kind::Tikhonov;
  if (s == "truncation") return FilterSpec::Kind::Truncation;
  if (s == "pseudo_inverse") return FilterSpec::Kind::PseudoInverse;
  throw ConfigError(where + ": filter kind must be tikhonov, truncation or pseudo_inverse");
}

std::string filter_kind_name(FilterSpec::Kind k) {
  switch (k) {
    case FilterSpec::Kind::Tikhonov: return "tikhonov";
    case FilterSpec::Kind::Truncation: return "truncation";
    case FilterSpec::Kind::PseudoInverse: return "pseudo_inverse";
  }
  return "";
}

const json& array_at(Section& sec, const std::string& key) {
  const json& arr = sec.at(key);
  if (!arr.is_array()) throw ConfigError(sec.path(key) + ": expected an array");
  return arr;
}

void parse_geometry(const json& node, ExperimentConfig& cfg) {
  Section sec(node, "geometry");
  auto& g = cfg.geometry;
  if (sec.has("aperture")) {
    Section ap(sec.at("aperture"), "geometry.aperture");
    ap.number("outer_radius", g.aperture.outer_radius);
    ap.number("inner_radius", g.aperture.inner_radius);
  }
  if (sec.has("stars")) {
    cfg.stars.clear();
    const json& arr = array_at(sec, "stars");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "geometry.stars[" + std::to_string(i) + "]";
      Section st(arr[i], where);
      StarConfig star;
      st.number("x_arcsec", star.x_arcsec);
      st.number("y_arcsec", star.y_arcsec);
      std::string kind = "NGS";
      st.text("kind", kind);
      star.kind = parse_kind(kind, where);
      cfg.stars.push_back(star);
    }
  }
  if (sec.has("asterisms")) {
    cfg.asterisms.clear();
    const json& arr = array_at(sec, "asterisms");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string where = "geometry.asterisms[" + std::to_string(i) + "]";
      Section as(arr[i], where);
      AsterismConfig a;
      as.integer("count", a.count);
      as.number("radius_arcsec", a.radius_arcsec);
      as.number("first_angle_deg", a.first_angle_deg);
      std::string kind = "NGS";
      as.text("kind", kind);
      a.kind = parse_kind(kind, where);
      if (a.count < 1) throw ConfigError(where + ".count: must be positive");
      cfg.asterisms.push_back(a);
    }
  }
  if (sec.has("layers")) {
    g.layers.clear();
    const json& arr = array_at(sec, "layers");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section ly(arr[i], "geometry.layers[" + std::to_string(i) + "]");
      LayerSpec layer;
      ly.number("height", layer.height);
      ly.number("weight", layer.weight);
      g.layers.push_back(layer);
    }
  }
  sec.number("lgs_height", g.lgs_height);
  sec.number("extension_half_width", g.extension_half_width);
}

}  // namespace

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::Svtd: return "svtd";
    case SolverKind::Fd: return "fd";
    case SolverKind::IterativeFd: return "iterative_fd";
    case SolverKind::Gradient: return "gradient";
  }
  return "";
}

SolverKind parse_solver_kind(const std::string& name) {
  if (name == "svtd") return SolverKind::Svtd;
  if (name == "fd") return SolverKind::Fd;
  if (name == "iterative_fd") return SolverKind::IterativeFd;
  if (name == "gradient") return SolverKind::Gradient;
  throw ConfigError("solver.kind must be svtd, fd, iterative_fd or gradient (got '" + name + "')");
}

void ExperimentConfig::expand_stars() {
  geometry.stars.clear();
  for (const auto& s : stars) {
    geometry.stars.push_back({arcsec_to_rad(s.x_arcsec), arcsec_to_rad(s.y_arcsec), s.kind});
  }
  for (const auto& a : asterisms) {
    const auto ring = ring_asterism(a.count, a.radius_arcsec, a.kind, a.first_angle_deg);
    geometry.stars.insert(geometry.stars.end(), ring.begin(), ring.end());
  }
}

EvaluationGrid ExperimentConfig::evaluation_grid() const {
  return EvaluationGrid::square(evaluation.grid_size, evaluation.fov_arcsec);
}

void ExperimentConfig::validate() const {
  geometry.validate();
  GridSpec{n, geometry.extension_half_width}.validate();
  turbulence.validate();
  solver.filter.validate();
  if (solver.sobolev_order < 0.0) throw ConfigError("solver.sobolev_order must be non-negative");
  if (solver.iterations < 0) throw ConfigError("solver.iterations must be non-negative");
  if (!(solver.step_scale > 0.0)) throw ConfigError("solver.step_scale must be positive");
  if (solver.kind == SolverKind::Svtd && !geometry.single_kind()) {
    throw ConfigError("solver svtd requires an NGS-only or LGS-only star set");
  }
  if (evaluation.grid_size < 1) throw ConfigError("evaluation.grid_size must be positive");
  if (!(evaluation.fov_arcsec >= 0.0)) throw ConfigError("evaluation.fov_arcsec must be non-negative");
  if (!(diagnostics.picard_threshold > 1.0)) throw ConfigError("diagnostics.picard_threshold must exceed 1");
  if (diagnostics.histogram_bins < 1) throw ConfigError("diagnostics.histogram_bins must be positive");
}

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  {
    Section sec(root, "config");
    sec.text("name", cfg.name);
    if (sec.has("preset")) {
      if (!sec.at("preset").is_string()) throw ConfigError("config.preset: expected a string");
      const std::string name = cfg.name;
      cfg = preset(sec.at("preset").get<std::string>());
      if (root.contains("name")) cfg.name = name;
    }
    if (sec.has("geometry")) parse_geometry(sec.at("geometry"), cfg);
    if (sec.has("grid")) {
      Section grid(sec.at("grid"), "grid");
      grid.integer("n", cfg.n);
    }
    if (sec.has("turbulence")) {
      Section t(sec.at("turbulence"), "turbulence");
      t.number("fried_parameter", cfg.turbulence.fried_parameter);
      t.number("reference_fried_parameter", cfg.turbulence.reference_fried_parameter);
      t.number("spectral_exponent", cfg.turbulence.spectral_exponent);
      t.number("outer_scale", cfg.turbulence.outer_scale);
    }
    if (sec.has("solver")) {
      Section s(sec.at("solver"), "solver");
      std::string kind = to_string(cfg.solver.kind);
      s.text("kind", kind);
      cfg.solver.kind = parse_solver_kind(kind);
      s.number("sobolev_order", cfg.solver.sobolev_order);
      s.integer("iterations", cfg.solver.iterations);
      s.number("step_scale", cfg.solver.step_scale);
      if (s.has("filter")) {
        Section f(s.at("filter"), "solver.filter");
        std::string fk = filter_kind_name(cfg.solver.filter.kind);
        f.text("kind", fk);
        cfg.solver.filter.kind = parse_filter_kind(fk, "solver.filter.kind");
        f.number("parameter", cfg.solver.filter.parameter);
      }
    }
    if (sec.has("evaluation")) {
      Section e(sec.at("evaluation"), "evaluation");
      e.integer("grid_size", cfg.evaluation.grid_size);
      e.number("fov_arcsec", cfg.evaluation.fov_arcsec);
    }
    if (sec.has("diagnostics")) {
      Section d(sec.at("diagnostics"), "diagnostics");
      d.number("picard_threshold", cfg.diagnostics.picard_threshold);
      d.integer("histogram_bins", cfg.diagnostics.histogram_bins);
    }
    sec.unsigned64("seed", cfg.seed);
    sec.text("output_dir", cfg.output_dir);
  }
  cfg.expand_stars();
  cfg.turbulence.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg, int indent) {
  json root;
  root["name"] = cfg.name;
  json& g = root["geometry"];
  g["aperture"] = {{"outer_radius", cfg.geometry.aperture.outer_radius},
                   {"inner_radius", cfg.geometry.aperture.inner_radius}};
  g["stars"] = json::array();
  for (const auto& s : cfg.stars) {
    g["stars"].push_back({{"x_arcsec", s.x_arcsec}, {"y_arcsec", s.y_arcsec}, {"kind", kind_name(s.kind)}});
  }
  g["asterisms"] = json::array();
  for (const auto& a : cfg.asterisms) {
    g["asterisms"].push_back({{"count", a.count},
                              {"radius_arcsec", a.radius_arcsec},
                              {"kind", kind_name(a.kind)},
                              {"first_angle_deg", a.first_angle_deg}});
  }
  g["layers"] = json::array();
  for (const auto& l : cfg.geometry.layers) g["layers"].push_back({{"height", l.height}, {"weight", l.weight}});
  g["lgs_height"] = cfg.geometry.lgs_height;
  g["extension_half_width"] = cfg.geometry.extension_half_width;
  root["grid"] = {{"n", cfg.n}};
  root["turbulence"] = {{"fried_parameter", cfg.turbulence.fried_parameter},
                        {"reference_fried_parameter", cfg.turbulence.reference_fried_parameter},
                        {"spectral_exponent", cfg.turbulence.spectral_exponent},
                        {"outer_scale", cfg.turbulence.outer_scale}};
  root["solver"] = {{"kind", to_string(cfg.solver.kind)},
                    {"sobolev_order", cfg.solver.sobolev_order},
                    {"filter",
                     {{"kind", filter_kind_name(cfg.solver.filter.kind)}, {"parameter", cfg.solver.filter.parameter}}},
                    {"iterations", cfg.solver.iterations},
                    {"step_scale", cfg.solver.step_scale}};
  root["evaluation"] = {{"grid_size", cfg.evaluation.grid_size}, {"fov_arcsec", cfg.evaluation.fov_arcsec}};
  root["diagnostics"] = {{"picard_threshold", cfg.diagnostics.picard_threshold},
                         {"histogram_bins", cfg.diagnostics.histogram_bins}};
  root["seed"] = cfg.seed;
  root["output_dir"] = cfg.output_dir;
  return root.dump(indent);
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string text = config_to_json(config, -1);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> preset_names() { return {"ngs6", "mixed"}; }

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.geometry.aperture = {21.0, 0.28 * 21.0};
  cfg.geometry.layers = {{0.0, 0.75}, {4000.0, 0.15}, {12700.0, 0.1}};
  cfg.geometry.lgs_height = 90000.0;
  if (name == "ngs6") {
    cfg.asterisms = {{6, 30.0, StarKind::NGS, 0.0}};
    cfg.geometry.extension_half_width = 27.0;
    cfg.solver.kind = SolverKind::Svtd;
    cfg.solver.filter = FilterSpec::tikhonov(1e-4);
  } else if (name == "mixed") {
    cfg.asterisms = {{3, 80.0, StarKind::NGS, 0.0}, {6, 30.0, StarKind::LGS, 0.0}};
    cfg.geometry.extension_half_width = 31.0;
    cfg.solver.kind = SolverKind::IterativeFd;
  } else {
    throw ConfigError("unknown preset '" + name + "' (available: ngs6, mixed)");
  }
  cfg.output_dir = "atomo-" + name;
  cfg.expand_stars();
  cfg.turbulence.seed = cfg.seed;
  return cfg;
}

}  // namespace atomo
