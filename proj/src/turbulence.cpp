#include "atomo/turbulence.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"

#include <cmath>
#include <random>

namespace atomo {

void TurbulenceParams::validate() const {
  if (!(fried_parameter > 0.0)) throw ConfigError("turbulence: fried_parameter must be positive");
  if (!(reference_fried_parameter > 0.0)) {
    throw ConfigError("turbulence: reference_fried_parameter must be positive");
  }
  if (!(spectral_exponent < -2.0)) throw ConfigError("turbulence: spectral_exponent must be below -2");
  if (!(outer_scale > 0.0)) throw ConfigError("turbulence: outer_scale must be positive");
}

ScreenSet generate_screens(const TurbulenceParams& params, const TomographyOperator& op) {
  params.validate();
  const int n = op.n();
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    if (!(params.outer_scale > op.layer_grid(l).spacing())) {
      throw ConfigError("turbulence: outer_scale must exceed the grid spacing");
    }
  }
  const double total = std::pow(params.reference_fried_parameter / params.fried_parameter, 5.0 / 3.0);

  ScreenSet set{op.zero_stack(), params};
  parallel_for(op.layer_count(), [&](std::size_t l) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(l)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Eigen::ArrayXXcd data(n, n);
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) data(iy, ix) = normal(rng);
    }
    fft2(data, false);
    const double width = 2.0 * op.layer_grid(l).half_width;
    const double floor2 = 1.0 / (params.outer_scale * params.outer_scale);
    for (int rx = 0; rx < n; ++rx) {
      const int j = rx < n / 2 ? rx : rx - n;
      for (int ry = 0; ry < n; ++ry) {
        const int k = ry < n / 2 ? ry : ry - n;
        const double kappa2 = (static_cast<double>(j) * j + static_cast<double>(k) * k) / (width * width);
        data(ry, rx) *= (j == 0 && k == 0) ? 0.0 : std::pow(kappa2 + floor2, 0.25 * params.spectral_exponent);
      }
    }
    fft2(data, true);
    Eigen::ArrayXXd screen = data.real();
    screen -= screen.mean();
    const double var = screen.square().mean();
    if (var > 0.0) screen *= std::sqrt(op.weight(l) * total / var);
    set.screens.layers[l].values = screen;
  });
  return set;
}

double screen_variance(const RealField& screen) { return screen.values.square().mean(); }

double sobolev_regularity_probe(const RealField& screen) {
  const int n = screen.grid.n;
  const SpectralField spec = analyze(screen, {screen.domain, screen.layer, 1.0});
  const int lo = std::max(2, n / 16);
  const int hi = n / 4;
  std::vector<double> sum(hi + 1, 0.0);
  std::vector<int> count(hi + 1, 0);
  for (int k = -hi; k <= hi; ++k) {
    for (int j = -hi; j <= hi; ++j) {
      const int r = static_cast<int>(std::lround(std::hypot(j, k)));
      if (r < lo || r > hi) continue;
      sum[r] += std::norm(spec.at(j, k));
      ++count[r];
    }
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int r = lo; r <= hi; ++r) {
    if (count[r] == 0 || sum[r] <= 0.0) continue;
    const double x = std::log(static_cast<double>(r));
    const double y = std::log(sum[r] / count[r]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace atomo
