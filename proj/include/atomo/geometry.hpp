#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace atomo {

inline constexpr double kRadPerArcsec = std::numbers::pi / 648000.0;

inline double arcsec_to_rad(double arcsec) { return arcsec * kRadPerArcsec; }
inline double rad_to_arcsec(double rad) { return rad / kRadPerArcsec; }

/// Annular telescope aperture centred at the origin.
struct ApertureSpec {
  double outer_radius = 21.0;
  double inner_radius = 0.0;

  /// Boundary points count as inside.
  bool contains(double x, double y) const;
  void validate() const;
};

enum class StarKind { NGS, LGS };

struct GuideStar {
  double alpha_x = 0.0;  // rad
  double alpha_y = 0.0;  // rad
  StarKind kind = StarKind::NGS;

  double separation() const;
};

struct LayerSpec {
  double height = 0.0;  // m
  double weight = 1.0;  // turbulence weight gamma
};

/// Full description of a tomography problem. Stars are ordered NGS first.
struct SystemGeometry {
  ApertureSpec aperture;
  std::vector<GuideStar> stars;
  std::vector<LayerSpec> layers;
  double lgs_height = 90000.0;
  double extension_half_width = 27.0;  // T, half width of the square Omega_T

  std::size_t star_count() const { return stars.size(); }
  std::size_t layer_count() const { return layers.size(); }
  /// True when every star is NGS or every star is LGS.
  bool single_kind() const;
  /// Throws ConfigError on any violated invariant (not including the extent check).
  void validate() const;
};

/// Periodic n x n grid on [-R, R)^2 with samples at -R + i * 2R/n.
struct GridSpec {
  int n = 64;
  double half_width = 1.0;

  double spacing() const { return 2.0 * half_width / n; }
  double coord(int i) const { return -half_width + i * spacing(); }
  double cell_area() const { return spacing() * spacing(); }
  void validate() const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Cone coefficient c_{l,g}: 1 for NGS, 1 - h/h_LGS for LGS.
double cone_factor(const LayerSpec& layer, const GuideStar& star, double lgs_height);

/// c_l = min over stars of cone_factor.
double min_cone_factor(std::size_t layer, const SystemGeometry& geometry);

/// beta_{l,T} = pi^2 / (c_l T)^2.
double beta(std::size_t layer, const SystemGeometry& geometry);

struct ExtentReport {
  bool ok = true;
  double worst_margin = 0.0;                         // m
  std::vector<std::pair<int, int>> violations;       // (layer, star)
};

/// Checks outer_radius + |alpha_g| h_l <= c_l T for every (layer, star).
ExtentReport validate_extent(const SystemGeometry& geometry);

/// Grid on Omega_T.
GridSpec aperture_grid(const SystemGeometry& geometry, int n);
/// Grid on c_l Omega_T.
GridSpec layer_grid(const SystemGeometry& geometry, std::size_t layer, int n);

/// Indicator grids I_{lg} and overlay grids O_l; arrays are indexed (iy, ix).
struct LayerMasks {
  Eigen::ArrayXXd aperture;                          // Omega_A on the aperture grid
  std::vector<std::vector<Eigen::ArrayXXd>> indicator;  // [layer][star]
  std::vector<Eigen::ArrayXXd> overlay;              // [layer]

  /// Omega_l, i.e. points with O_l >= 1.
  Eigen::ArrayXXd footprint(std::size_t layer) const;
};

LayerMasks build_masks(const SystemGeometry& geometry, int n);

/// Equally spaced ring of stars; the first star sits at first_angle_deg.
std::vector<GuideStar> ring_asterism(int count, double radius_arcsec, StarKind kind,
                                     double first_angle_deg = 90.0);

}  // namespace atomo
