#pragma once

#include "atomo/config.hpp"
#include "atomo/forward.hpp"
#include "atomo/geometry.hpp"
#include "atomo/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

namespace atomo::testing {

inline SystemGeometry ngs6_geometry() { return preset("ngs6").geometry; }

inline SystemGeometry single_star_geometry(double height = 0.0, double T = 21.0) {
  SystemGeometry g;
  g.aperture = {21.0, 0.0};
  g.stars = {{0.0, 0.0, StarKind::NGS}};
  g.layers = {{height, 1.0}};
  g.extension_half_width = T;
  return g;
}

inline Eigen::ArrayXXd random_array(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::ArrayXXd a(n, n);
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) a(iy, ix) = normal(rng);
  }
  return a;
}

/// Real field whose coefficients vanish outside |j|, |k| <= band.
inline RealField bandlimited_field(const GridSpec& grid, Domain domain, int layer, double gamma, int band,
                                   std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  SpectralField spec = SpectralField::zeros(grid, {domain, layer, gamma});
  for (int k = -band; k <= band; ++k) {
    for (int j = -band; j <= band; ++j) {
      if (k < 0 || (k == 0 && j < 0)) continue;
      const std::complex<double> c(normal(rng), (j == 0 && k == 0) ? 0.0 : normal(rng));
      spec.at(j, k) = c;
      spec.at(-j, -k) = std::conj(c);
    }
  }
  return synthesize_real(spec);
}

inline LayerStack random_stack(const TomographyOperator& op, std::mt19937_64& rng) {
  LayerStack s = op.zero_stack();
  for (auto& f : s.layers) f.values = random_array(op.n(), rng);
  return s;
}

inline LayerStack bandlimited_stack(const TomographyOperator& op, int band, std::mt19937_64& rng) {
  LayerStack s;
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    s.layers.push_back(bandlimited_field(op.layer_grid(l), Domain::Layer, static_cast<int>(l), op.weight(l), band, rng));
  }
  return s;
}

inline WavefrontSet random_waves(const TomographyOperator& op, std::mt19937_64& rng) {
  WavefrontSet w = op.zero_waves();
  for (auto& f : w.stars) f.values = random_array(op.n(), rng) * op.masks().aperture;
  return w;
}

inline double max_abs(const Eigen::ArrayXXd& a) { return a.abs().maxCoeff(); }

/// w_{jk}(x, y) scaled for half width R and weight gamma, sampled on grid.
inline Eigen::ArrayXXcd basis_samples(const GridSpec& grid, int j, int k, double gamma) {
  const double R = grid.half_width;
  Eigen::ArrayXXcd out(grid.n, grid.n);
  for (int ix = 0; ix < grid.n; ++ix) {
    for (int iy = 0; iy < grid.n; ++iy) {
      out(iy, ix) = std::sqrt(gamma) / (2 * R) *
                    std::polar(1.0, std::numbers::pi * (j * grid.coord(ix) + k * grid.coord(iy)) / R);
    }
  }
  return out;
}

inline double rel_l2(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) {
  return std::sqrt((a - b).abs2().sum() / b.abs2().sum());
}

// C^2 radial bump vanishing outside 6.4 < r < 20.4, inside the annulus
inline double bump(double r) {
  const double t = (r - 13.4) / 7.0;
  return std::abs(t) < 1.0 ? std::pow(1.0 - t * t, 3) : 0.0;
}

/// Smooth aperture data compactly supported away from the pupil edges.
inline WavefrontSet smooth_waves(const TomographyOperator& op) {
  WavefrontSet psi = op.zero_waves();
  const int n = op.n();
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      const double x = op.aperture_grid().coord(ix), y = op.aperture_grid().coord(iy);
      for (std::size_t g = 0; g < psi.size(); ++g) {
        psi.stars[g].values(iy, ix) = std::cos(0.15 * x + 0.1 * g) * std::sin(0.2 * y) * bump(std::hypot(x, y));
      }
    }
  }
  return psi;
}

/// Direct (non-FFT) evaluation of sum_g sum_jk <f, w_jk I_g> w_jk I_g over the full index set.
inline Eigen::ArrayXXd direct_series(const RealField& f, std::size_t l, const TomographyOperator& op) {
  const auto& grid = f.grid;
  const int n = grid.n;
  const double gamma = op.weight(l);
  const double h2 = grid.cell_area();
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(n, n);
  for (std::size_t g = 0; g < op.star_count(); ++g) {
    const Eigen::ArrayXXd part = f.values * op.masks().indicator[l][g];
    Eigen::ArrayXXcd acc = Eigen::ArrayXXcd::Zero(n, n);
    for (int k = -n / 2; k < n / 2; ++k) {
      for (int j = -n / 2; j < n / 2; ++j) {
        const Eigen::ArrayXXcd w = basis_samples(grid, j, k, gamma);
        const std::complex<double> c = (part.cast<std::complex<double>>() * w.conjugate()).sum() * h2 / gamma;
        acc += c * w;
      }
    }
    out += acc.real() * op.masks().indicator[l][g];
  }
  return out;
}

}  // namespace atomo::testing
