#include "atomo/errors.hpp"
#include "atomo/svtd.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace atomo;
using namespace atomo::testing;

namespace {

SystemGeometry two_star_ground() {
  SystemGeometry g = single_star_geometry(0.0, 24.0);
  g.stars.push_back({arcsec_to_rad(30.0), 0.0, StarKind::NGS});
  return g;
}

LayerStack sample_stack(const TomographyOperator& op, const SvtdCache& cache, std::mt19937_64& rng) {
  return bandlimited_stack(op, cache.max_index(), rng);
}

double relative_error(const RealField& a, const RealField& b) {
  return std::sqrt((a.values - b.values).abs2().sum() / b.values.abs2().sum());
}

}  // namespace

TEST(BuildMatrix, ZeroFrequencyHasSqrtWeights) {
  const auto g = ngs6_geometry();
  for (double s : {0.0, 1.0, 2.0}) {
    const auto A = build_matrix(0, 0, s, g);
    ASSERT_EQ(A.entries.rows(), 6);
    ASSERT_EQ(A.entries.cols(), 3);
    const double w[] = {0.75, 0.15, 0.1};
    for (int st = 0; st < 6; ++st) {
      for (int l = 0; l < 3; ++l) {
        EXPECT_NEAR(A.entries(st, l).real(), std::sqrt(w[l]), 1e-15);
        EXPECT_EQ(A.entries(st, l).imag(), 0.0);
      }
    }
  }
}

TEST(BuildMatrix, GroundLayerEntriesAreEqual) {
  const auto A = build_matrix(5, -2, 0.0, two_star_ground());
  EXPECT_EQ(A.entries(0, 0), A.entries(1, 0));
  EXPECT_NEAR(std::abs(A.entries(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(BuildMatrix, SobolevOrderScalesEntries) {
  const auto g = ngs6_geometry();
  const auto a0 = build_matrix(1, 0, 0.0, g);
  const auto a2 = build_matrix(1, 0, 2.0, g);
  const double f = 1.0 / (1.0 + beta(0, g));
  EXPECT_LE((a2.entries - f * a0.entries).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(f, sobolev_factor(1, 0, 2.0, beta(2, g)), 1e-15);
}

TEST(BuildMatrix, EntryMagnitudesAndPhases) {
  auto g = ngs6_geometry();
  for (auto& s : g.stars) s.kind = StarKind::LGS;
  g.extension_half_width = 31.0;
  const auto A = build_matrix(4, -7, 1.0, g);
  for (int st = 0; st < 6; ++st) {
    for (int l = 0; l < 3; ++l) {
      const double c = min_cone_factor(l, g);
      const double h = g.layers[l].height;
      const double mag = sobolev_factor(4, -7, 1.0, beta(l, g)) * std::sqrt(g.layers[l].weight) / c;
      const double phase =
          std::numbers::pi * (4 * g.stars[st].alpha_x - 7 * g.stars[st].alpha_y) * h / (c * 31.0);
      EXPECT_NEAR(std::abs(A.entries(st, l) - std::polar(mag, phase)), 0.0, 1e-14);
    }
  }
}

TEST(BuildMatrix, RejectsMixedStars) {
  EXPECT_THROW(build_matrix(0, 0, 1.0, preset("mixed").geometry), ConfigError);
}

TEST(Decompose, TwoStarSingleLayerExample) {
  const auto svd = decompose(build_matrix(0, 0, 0.0, two_star_ground()));
  ASSERT_EQ(svd.rank, 1);
  EXPECT_NEAR(svd.sigma[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(svd.v(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(svd.u(0, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(svd.u(1, 0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(Decompose, FactorizationOrthonormalityAndPhase) {
  const auto g = ngs6_geometry();
  const auto cache = decompose_all(g, 1.0, 32);
  const int m = cache.max_index();
  ASSERT_EQ(cache.entries().size(), static_cast<std::size_t>((2 * m + 1) * (2 * m + 1)));
  for (int k = -m; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      const auto& svd = cache.at(j, k);
      ASSERT_EQ(svd.j, j);
      ASSERT_EQ(svd.k, k);
      ASSERT_LE(svd.rank, 3);
      const Eigen::MatrixXcd A = build_matrix(j, k, 1.0, g).entries;
      const Eigen::MatrixXcd R = svd.u * svd.sigma.asDiagonal() * svd.v.adjoint();
      ASSERT_LE((A - R).norm(), 1e-12 * A.norm()) << j << "," << k;
      const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(svd.rank, svd.rank);
      ASSERT_LE((svd.u.adjoint() * svd.u - I).norm(), 1e-12);
      ASSERT_LE((svd.v.adjoint() * svd.v - I).norm(), 1e-12);
      for (int n = 0; n < svd.rank; ++n) {
        if (n > 0) ASSERT_GE(svd.sigma[n - 1], svd.sigma[n]);
        int first = 0;
        while (std::abs(svd.v(first, n)) <= 1e-8 * svd.v.col(n).cwiseAbs().maxCoeff()) ++first;
        ASSERT_EQ(svd.v(first, n).imag(), 0.0);
        ASSERT_GT(svd.v(first, n).real(), 0.0);
      }
    }
  }
  EXPECT_EQ(cache.at(0, 0).rank, 1);
}

TEST(Decompose, SingularValuesScaleWithSobolevOrder) {
  const auto g = ngs6_geometry();
  const auto base = decompose_all(g, 0.0, 32);
  const double b = beta(0, g);
  for (double s : {1.0, 11.0 / 6.0, 2.0}) {
    const auto scaled = decompose_all(g, s, 32);
    double worst = 0.0;
    for (int k = -15; k <= 15; ++k) {
      for (int j = -15; j <= 15; ++j) {
        const auto& a = scaled.at(j, k);
        const auto& o = base.at(j, k);
        ASSERT_EQ(a.rank, o.rank);
        const double f = sobolev_factor(j, k, s, b);
        worst = std::max(worst, (a.sigma - f * o.sigma).cwiseAbs().maxCoeff());
        ASSERT_LE((a.v - o.v).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
    EXPECT_LE(worst, 1e-12) << s;
  }
}

TEST(Decompose, Deterministic) {
  const auto a = decompose_all(ngs6_geometry(), 1.0, 16);
  const auto b = decompose_all(ngs6_geometry(), 1.0, 16);
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    EXPECT_EQ(a.entries()[i].sigma, b.entries()[i].sigma);
    EXPECT_EQ(a.entries()[i].u, b.entries()[i].u);
    EXPECT_EQ(a.entries()[i].v, b.entries()[i].v);
  }
}

TEST(SvtdCache, CheckRejectsOtherGeometryOrGrid) {
  const auto g = ngs6_geometry();
  const auto cache = decompose_all(g, 1.0, 16);
  EXPECT_NO_THROW(cache.check(g, 16));
  EXPECT_THROW(cache.check(g, 32), ConfigError);
  auto other = g;
  other.layers[1].height = 4100.0;
  EXPECT_THROW(cache.check(other, 16), ConfigError);
  EXPECT_NE(geometry_hash(g), geometry_hash(other));
  EXPECT_EQ(geometry_hash(g), geometry_hash(ngs6_geometry()));
}

TEST(TikhonovGain, Examples) {
  EXPECT_EQ(tikhonov_gain(1.0, 1.0), 0.5);
  EXPECT_EQ(tikhonov_gain(0.0, 0.3), 0.0);
  EXPECT_NEAR(tikhonov_gain(0.1, 0.01), 1.0 / (2.0 * 0.1), 1e-14);
  for (double s = 0.0; s < 3.0; s += 0.01) EXPECT_LE(tikhonov_gain(s, 0.04), 1.0 / (2.0 * 0.2) + 1e-15);
}

TEST(FilterSpec, GainsAndValidation) {
  EXPECT_THROW(FilterSpec::tikhonov(0.0).validate(), ConfigError);
  EXPECT_THROW(FilterSpec::truncation(-1.0).validate(), ConfigError);
  EXPECT_NO_THROW(FilterSpec::truncation(0.0).validate());
  EXPECT_EQ(FilterSpec::truncation(0.5).gain(0.4, 1.0), 0.0);
  EXPECT_EQ(FilterSpec::truncation(0.5).gain(0.5, 1.0), 2.0);
  EXPECT_EQ(FilterSpec::pseudo_inverse().gain(0.25, 1.0), 4.0);
  EXPECT_EQ(FilterSpec::pseudo_inverse(1e-3).gain(1e-4, 1.0), 0.0);
  EXPECT_EQ(FilterSpec::tikhonov(1.0).gain(1.0, 3.0), 0.5);
}

TEST(Reconstruct, ZeroWavesGiveZeroStack) {
  const TomographyOperator op(ngs6_geometry(), 16);
  const auto cache = decompose_all(op.geometry(), 1.0, 16);
  const auto r = reconstruct(op.zero_waves(), cache, op, FilterSpec::tikhonov(1e-3));
  for (const auto& l : r.layers) EXPECT_EQ(max_abs(l.values), 0.0);
}

TEST(Reconstruct, RightSingularSpanIsRecoveredExactly) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const double s = 1.0;
  const auto cache = decompose_all(op.geometry(), s, 32);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<SpectralField> specs;
  for (std::size_t l = 0; l < 3; ++l) {
    specs.push_back(SpectralField::zeros(op.layer_grid(l), layer_context(op.geometry(), l)));
  }
  const int m = cache.max_index();
  for (int k = 0; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      if (k == 0 && j < 0) continue;
      const auto& svd = cache.at(j, k);
      Eigen::VectorXcd c(svd.rank);
      for (int n = 0; n < svd.rank; ++n) {
        c[n] = (j == 0 && k == 0) ? std::complex<double>(normal(rng), 0.0)
                                  : std::complex<double>(normal(rng), normal(rng));
      }
      const Eigen::VectorXcd d = svd.v * c;
      for (std::size_t l = 0; l < 3; ++l) {
        const double f = sobolev_factor(j, k, s, beta(l, op.geometry()));
        specs[l].at(j, k) = d[l] * f;
        specs[l].at(-j, -k) = std::conj(d[l] * f);
      }
    }
  }
  LayerStack phi;
  for (const auto& sp : specs) phi.layers.push_back(synthesize_real(sp));
  const auto waves = apply_periodic_forward(phi, op, s);
  const auto r = reconstruct(waves, cache, op, FilterSpec::pseudo_inverse());
  for (std::size_t l = 0; l < 3; ++l) EXPECT_LE(relative_error(r.layers[l], phi.layers[l]), 1e-8);
}

TEST(Reconstruct, RangeConsistency) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const auto cache = decompose_all(op.geometry(), 1.0, 32);
  std::mt19937_64 rng(4);
  const LayerStack phi = sample_stack(op, cache, rng);
  const auto waves = apply_periodic_forward(phi, op, 1.0);
  const auto r = reconstruct(waves, cache, op, FilterSpec::pseudo_inverse());
  const auto again = apply_periodic_forward(r, op, 1.0);
  for (std::size_t g = 0; g < waves.size(); ++g) EXPECT_LE(relative_error(again.stars[g], waves.stars[g]), 1e-8);
  // phi has a nullspace part (6 stars, 3 layers, rank 1 at the origin), so the minimum-norm
  // solution is no larger.
  EXPECT_LE(layer_norm(r, op), layer_norm(phi, op) * (1.0 + 1e-12));
}

TEST(Reconstruct, TikhonovNormDecreasesWithAlpha) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const auto cache = decompose_all(op.geometry(), 1.0, 32);
  std::mt19937_64 rng(5);
  const WavefrontSet waves = random_waves(op, rng);
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4}) {
    const double norm = layer_norm(reconstruct(waves, cache, op, FilterSpec::tikhonov(alpha)), op);
    EXPECT_LE(norm, previous);
    previous = norm;
  }
}

TEST(Reconstruct, Linearity) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const auto cache = decompose_all(op.geometry(), 1.0, 32);
  std::mt19937_64 rng(6);
  const WavefrontSet a = random_waves(op, rng);
  const WavefrontSet b = random_waves(op, rng);
  const auto filter = FilterSpec::tikhonov(1e-3);
  const auto lhs = reconstruct(2.0 * a + (-3.0) * b, cache, op, filter);
  const auto rhs = 2.0 * reconstruct(a, cache, op, filter) + (-3.0) * reconstruct(b, cache, op, filter);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_LE(max_abs(lhs.layers[l].values - rhs.layers[l].values), 1e-12 * max_abs(rhs.layers[l].values));
  }
}

TEST(Reconstruct, RejectsMismatchAndNonFinite) {
  const TomographyOperator op(ngs6_geometry(), 16);
  const auto cache = decompose_all(op.geometry(), 1.0, 32);
  EXPECT_THROW(reconstruct(op.zero_waves(), cache, op, FilterSpec::tikhonov(1e-3)), ConfigError);
  const auto good = decompose_all(op.geometry(), 1.0, 16);
  WavefrontSet bad = op.zero_waves();
  bad.stars[2].values(3, 3) = std::nan("");
  EXPECT_THROW(reconstruct(bad, good, op, FilterSpec::tikhonov(1e-3)), NumericalError);
}

TEST(Picard, ZeroWavesGiveZeroSums) {
  const TomographyOperator op(ngs6_geometry(), 16);
  const auto cache = decompose_all(op.geometry(), 1.0, 16);
  const auto r = picard_diagnostic(op.zero_waves(), cache);
  ASSERT_FALSE(r.partial_sums.empty());
  for (double v : r.partial_sums) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(r.plateau);
}

TEST(Picard, RangeConsistentDataPlateaus) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const auto cache = decompose_all(op.geometry(), 1.0, 32);
  std::mt19937_64 rng(7);
  const LayerStack phi = bandlimited_stack(op, 5, rng);
  const auto r = picard_diagnostic(apply_periodic_forward(phi, op, 1.0), cache);
  EXPECT_TRUE(r.plateau) << r.growth_ratio;
  for (std::size_t i = 1; i < r.sigmas.size(); ++i) ASSERT_LE(r.sigmas[i], r.sigmas[i - 1]);
}

TEST(Picard, WhiteNoiseDivergesForSmoothPrior) {
  const TomographyOperator op(ngs6_geometry(), 32);
  const auto cache = decompose_all(op.geometry(), 2.0, 32);
  std::mt19937_64 rng(8);
  WavefrontSet noise = op.zero_waves();
  for (auto& w : noise.stars) w.values = random_array(32, rng);
  const auto r = picard_diagnostic(noise, cache);
  EXPECT_FALSE(r.plateau) << r.growth_ratio;
}

TEST(Wellposedness, SingleStarSingleLayerIsFlat) {
  auto g = single_star_geometry(3000.0, 24.0);
  g.stars[0].kind = StarKind::LGS;
  const auto r = wellposedness_scan(g, 16);
  EXPECT_NEAR(r.min_sigma, 1.0 / (1.0 - 3000.0 / 90000.0), 1e-12);
  int total = 0;
  for (int c : r.counts) total += c;
  EXPECT_EQ(total, 15 * 15);
  EXPECT_EQ(r.bin_edges.size(), r.counts.size() + 1);
}

namespace {

// Two layers, two stars; star 2 shifts layer 2 by a fraction a of T.
SystemGeometry shift_fraction_geometry(double a) {
  SystemGeometry g;
  g.aperture = {21.0, 0.0};
  g.layers = {{0.0, 0.5}, {5000.0, 0.5}};
  g.extension_half_width = 27.0;
  g.stars = {{0.0, 0.0, StarKind::NGS}, {a * 27.0 / 5000.0, 0.0, StarKind::NGS}};
  return g;
}

}  // namespace

TEST(Wellposedness, RationalAndPerturbedConfigurations) {
  const auto rational = shift_fraction_geometry(0.125);
  const auto perturbed = shift_fraction_geometry(0.125 * (1.0 + 1.0 / std::sqrt(50.0)));
  double last_r = std::numeric_limits<double>::infinity();
  double last_p = last_r;
  for (int n : {16, 32, 64, 128}) {
    const auto r = wellposedness_scan(rational, n);
    const auto p = wellposedness_scan(perturbed, n);
    EXPECT_LE(r.min_sigma, last_r);
    EXPECT_LE(p.min_sigma, last_p);
    if (n >= 32) EXPECT_GE(r.min_sigma, p.min_sigma) << n;
    last_r = r.min_sigma;
    last_p = p.min_sigma;
  }
  // rational shifts only produce finitely many phases, so the bound stays fixed
  EXPECT_NEAR(last_r, wellposedness_scan(rational, 32).min_sigma, 1e-12);
}
