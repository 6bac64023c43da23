#include "atomo/geometry.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace atomo {

bool ApertureSpec::contains(double x, double y) const {
  const double r2 = x * x + y * y;
  return r2 <= outer_radius * outer_radius && r2 >= inner_radius * inner_radius;
}

void ApertureSpec::validate() const {
  if (!(inner_radius >= 0.0 && inner_radius < outer_radius) || !std::isfinite(outer_radius)) {
    throw ConfigError("aperture: require 0 <= inner_radius < outer_radius");
  }
}

double GuideStar::separation() const { return std::hypot(alpha_x, alpha_y); }

bool SystemGeometry::single_kind() const {
  return std::all_of(stars.begin(), stars.end(),
                     [&](const GuideStar& s) { return s.kind == stars.front().kind; });
}

void SystemGeometry::validate() const {
  aperture.validate();
  if (stars.empty()) throw ConfigError("geometry: at least one guide star required");
  if (layers.empty()) throw ConfigError("geometry: at least one layer required");
  bool seen_lgs = false;
  for (std::size_t g = 0; g < stars.size(); ++g) {
    const auto& s = stars[g];
    if (!std::isfinite(s.alpha_x) || !std::isfinite(s.alpha_y)) {
      throw ConfigError("geometry: star " + std::to_string(g) + " has a non-finite direction");
    }
    if (s.kind == StarKind::LGS) {
      seen_lgs = true;
    } else if (seen_lgs) {
      throw ConfigError("geometry: NGS entries must precede LGS entries (star " +
                        std::to_string(g) + ")");
    }
  }
  double weight_sum = 0.0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (!(layer.weight > 0.0)) {
      throw ConfigError("geometry: layer " + std::to_string(l) + " weight must be positive");
    }
    if (l > 0 && !(layer.height > layers[l - 1].height)) {
      throw ConfigError("geometry: layer heights must be strictly ascending");
    }
    if (!(layer.height >= 0.0 && layer.height < lgs_height)) {
      throw ConfigError("geometry: layer " + std::to_string(l) +
                        " must satisfy 0 <= h < lgs_height");
    }
    weight_sum += layer.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) {
    throw ConfigError("geometry: layer weights must sum to 1");
  }
  if (!(extension_half_width > 0.0)) {
    throw ConfigError("geometry: extension half width must be positive");
  }
}

void GridSpec::validate() const {
  if (n < 4 || n % 2 != 0) throw ConfigError("grid: n must be even and >= 4");
  if (!(half_width > 0.0)) throw ConfigError("grid: half width must be positive");
}

double cone_factor(const LayerSpec& layer, const GuideStar& star, double lgs_height) {
  if (!(layer.height < lgs_height)) {
    throw ConfigError("cone_factor: layer height must be below the LGS height");
  }
  if (star.kind == StarKind::NGS) return 1.0;
  return 1.0 - layer.height / lgs_height;
}

double min_cone_factor(std::size_t layer, const SystemGeometry& geometry) {
  double c = std::numeric_limits<double>::infinity();
  for (const auto& star : geometry.stars) {
    c = std::min(c, cone_factor(geometry.layers.at(layer), star, geometry.lgs_height));
  }
  return c;
}

double beta(std::size_t layer, const SystemGeometry& geometry) {
  const double cT = min_cone_factor(layer, geometry) * geometry.extension_half_width;
  return std::numbers::pi * std::numbers::pi / (cT * cT);
}

ExtentReport validate_extent(const SystemGeometry& geometry) {
  ExtentReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < geometry.layer_count(); ++l) {
    const double cT = min_cone_factor(l, geometry) * geometry.extension_half_width;
    for (std::size_t g = 0; g < geometry.star_count(); ++g) {
      const double reach =
          geometry.aperture.outer_radius + geometry.stars[g].separation() * geometry.layers[l].height;
      const double margin = cT - reach;
      report.worst_margin = std::min(report.worst_margin, margin);
      if (margin < 0.0) {
        report.ok = false;
        report.violations.emplace_back(static_cast<int>(l), static_cast<int>(g));
      }
    }
  }
  return report;
}

GridSpec aperture_grid(const SystemGeometry& geometry, int n) {
  GridSpec grid{n, geometry.extension_half_width};
  grid.validate();
  return grid;
}

GridSpec layer_grid(const SystemGeometry& geometry, std::size_t layer, int n) {
  GridSpec grid{n, min_cone_factor(layer, geometry) * geometry.extension_half_width};
  grid.validate();
  return grid;
}

Eigen::ArrayXXd LayerMasks::footprint(std::size_t layer) const {
  return (overlay.at(layer) >= 1.0).cast<double>();
}

LayerMasks build_masks(const SystemGeometry& geometry, int n) {
  const auto L = geometry.layer_count();
  const auto G = geometry.star_count();
  LayerMasks masks;

  const GridSpec ag = aperture_grid(geometry, n);
  masks.aperture.resize(n, n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      masks.aperture(iy, ix) = geometry.aperture.contains(ag.coord(ix), ag.coord(iy)) ? 1.0 : 0.0;
    }
  }

  masks.indicator.assign(L, std::vector<Eigen::ArrayXXd>(G));
  masks.overlay.assign(L, Eigen::ArrayXXd::Zero(n, n));
  parallel_for(L, [&](std::size_t l) {
    const GridSpec lg = layer_grid(geometry, l, n);
    const double h = geometry.layers[l].height;
    for (std::size_t g = 0; g < G; ++g) {
      const auto& star = geometry.stars[g];
      const double c = cone_factor(geometry.layers[l], star, geometry.lgs_height);
      auto& ind = masks.indicator[l][g];
      ind.resize(n, n);
      for (int iy = 0; iy < n; ++iy) {
        const double y = (lg.coord(iy) - star.alpha_y * h) / c;
        for (int ix = 0; ix < n; ++ix) {
          const double x = (lg.coord(ix) - star.alpha_x * h) / c;
          ind(iy, ix) = geometry.aperture.contains(x, y) ? 1.0 : 0.0;
        }
      }
      masks.overlay[l] += ind;
    }
  });
  return masks;
}

std::vector<GuideStar> ring_asterism(int count, double radius_arcsec, StarKind kind,
                                     double first_angle_deg) {
  std::vector<GuideStar> stars;
  const double r = arcsec_to_rad(radius_arcsec);
  for (int i = 0; i < count; ++i) {
    const double phi = (first_angle_deg + 360.0 * i / count) * std::numbers::pi / 180.0;
    stars.push_back({r * std::cos(phi), r * std::sin(phi), kind});
  }
  return stars;
}

}  // namespace atomo
