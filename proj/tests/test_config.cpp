#include "atomo/config.hpp"
#include "atomo/errors.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

using namespace atomo;

TEST(Config, EmptyObjectTakesDefaults) {
  const auto cfg = parse_config(R"({"geometry": {"stars": [{"x_arcsec": 0, "y_arcsec": 0}],
                                                  "layers": [{"height": 0, "weight": 1}]}})");
  EXPECT_EQ(cfg.n, 64);
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.solver.kind, SolverKind::Svtd);
  EXPECT_EQ(cfg.solver.sobolev_order, 1.0);
  EXPECT_EQ(cfg.solver.iterations, 5);
  EXPECT_EQ(cfg.evaluation.grid_size, 5);
  EXPECT_EQ(cfg.evaluation.fov_arcsec, 120.0);
  EXPECT_EQ(cfg.turbulence.outer_scale, 100.0);
  ASSERT_EQ(cfg.geometry.stars.size(), 1u);
}

TEST(Config, PresetsAreValid) {
  for (const auto& name : preset_names()) {
    const auto cfg = preset(name);
    EXPECT_NO_THROW(cfg.validate()) << name;
    EXPECT_EQ(cfg.geometry.layers.size(), 3u);
  }
  const auto ngs6 = preset("ngs6");
  EXPECT_EQ(ngs6.geometry.stars.size(), 6u);
  EXPECT_TRUE(ngs6.geometry.single_kind());
  const auto mixed = preset("mixed");
  EXPECT_EQ(mixed.geometry.stars.size(), 9u);
  EXPECT_EQ(mixed.geometry.stars.front().kind, StarKind::NGS);
  EXPECT_EQ(mixed.geometry.stars.back().kind, StarKind::LGS);
  EXPECT_FALSE(mixed.geometry.single_kind());
  EXPECT_THROW(preset("nope"), ConfigError);
}

TEST(Config, PresetWithOverrides) {
  const auto cfg = parse_config(R"({"preset": "ngs6", "name": "mine", "seed": 7, "grid": {"n": 32},
                                    "solver": {"filter": {"parameter": 0.5}}})");
  EXPECT_EQ(cfg.name, "mine");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.turbulence.seed, 7u);
  EXPECT_EQ(cfg.n, 32);
  EXPECT_EQ(cfg.solver.filter.kind, FilterSpec::Kind::Tikhonov);
  EXPECT_EQ(cfg.solver.filter.parameter, 0.5);
  EXPECT_EQ(cfg.geometry.stars.size(), 6u);
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "grid": {"n": 32, "m": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "solver": {"filter": {"alpha": 1}}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "geometry": {"aperture": {"radius": 1}}})"), ConfigError);
}

TEST(Config, RejectsBadValues) {
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "grid": {"n": 33}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "grid": {"n": "64"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "seed": -1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "solver": {"kind": "magic"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "mixed", "solver": {"kind": "svtd"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "geometry": {"layers": [{"height": 0, "weight": 0.5}]}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"preset": "ngs6", "solver": {"filter": {"kind": "tikhonov", "parameter": 0}}})"),
               ConfigError);
}

TEST(Config, StarsAndAsterismsExpandInOrder) {
  const auto cfg = parse_config(R"({
    "geometry": {
      "stars": [{"x_arcsec": 10, "y_arcsec": -5, "kind": "NGS"}],
      "asterisms": [{"count": 4, "radius_arcsec": 20, "kind": "LGS", "first_angle_deg": 90}],
      "layers": [{"height": 0, "weight": 0.6}, {"height": 8000, "weight": 0.4}],
      "extension_half_width": 26
    },
    "solver": {"kind": "fd"}})");
  ASSERT_EQ(cfg.geometry.stars.size(), 5u);
  EXPECT_NEAR(cfg.geometry.stars[0].alpha_x, arcsec_to_rad(10.0), 1e-18);
  EXPECT_NEAR(cfg.geometry.stars[1].alpha_y, arcsec_to_rad(20.0), 1e-18);
  EXPECT_EQ(cfg.geometry.stars[4].kind, StarKind::LGS);
}

TEST(Config, CanonicalJsonRoundTripsAndHashes) {
  const auto cfg = preset("mixed");
  const std::string text = config_to_json(cfg);
  const auto back = parse_config(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
  auto other = cfg;
  other.seed = 2;
  EXPECT_NE(config_hash(other), config_hash(cfg));
  const auto j = nlohmann::json::parse(text);
  for (const char* key : {"name", "geometry", "grid", "turbulence", "solver", "evaluation", "diagnostics", "seed",
                          "output_dir"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
}

TEST(SolverKind, NamesRoundTrip) {
  for (auto k : {SolverKind::Svtd, SolverKind::Fd, SolverKind::IterativeFd, SolverKind::Gradient}) {
    EXPECT_EQ(parse_solver_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_solver_kind("svd"), ConfigError);
}
