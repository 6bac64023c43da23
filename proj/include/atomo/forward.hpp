#pragma once

#include "atomo/geometry.hpp"
#include "atomo/spectral.hpp"

#include <Eigen/Sparse>

#include <cstddef>
#include <vector>

namespace atomo {

/// One real field per layer l on c_l Omega_T.
struct LayerStack {
  std::vector<RealField> layers;

  std::size_t size() const { return layers.size(); }
  LayerStack& operator+=(const LayerStack& other);
  LayerStack& operator-=(const LayerStack& other);
  LayerStack& operator*=(double a);
};

LayerStack operator+(LayerStack a, const LayerStack& b);
LayerStack operator-(LayerStack a, const LayerStack& b);
LayerStack operator*(double a, LayerStack b);

/// One real field per guide star on Omega_T, zero outside the aperture.
struct WavefrontSet {
  std::vector<RealField> stars;

  std::size_t size() const { return stars.size(); }
  WavefrontSet& operator+=(const WavefrontSet& other);
  WavefrontSet& operator-=(const WavefrontSet& other);
  WavefrontSet& operator*=(double a);
};

WavefrontSet operator+(WavefrontSet a, const WavefrontSet& b);
WavefrontSet operator-(WavefrontSet a, const WavefrontSet& b);
WavefrontSet operator*(double a, WavefrontSet b);

enum class Interpolation { Bilinear, Spectral };

using InterpolationMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discretized atmospheric tomography operator for one geometry and grid size.
/// Holds grids, masks and the bilinear stencils mapping layer l samples to the
/// positions c_{l,g} r + alpha_g h_l for every aperture-grid point r. Immutable.
class TomographyOperator {
 public:
  TomographyOperator(SystemGeometry geometry, int n);

  const SystemGeometry& geometry() const { return geometry_; }
  int n() const { return n_; }
  std::size_t layer_count() const { return geometry_.layer_count(); }
  std::size_t star_count() const { return geometry_.star_count(); }

  const GridSpec& aperture_grid() const { return aperture_grid_; }
  const GridSpec& layer_grid(std::size_t l) const { return layer_grids_.at(l); }
  const LayerMasks& masks() const { return masks_; }

  /// c_{l,g}
  double cone(std::size_t l, std::size_t g) const { return cones_(l, g); }
  double weight(std::size_t l) const { return geometry_.layers[l].weight; }
  /// Rows: aperture-grid points; columns: layer-grid points. Points are flattened
  /// in Eigen's column-major order, index iy + n * ix.
  const InterpolationMatrix& stencil(std::size_t g, std::size_t l) const {
    return stencils_[g * layer_count() + l];
  }

  LayerStack zero_stack() const;
  WavefrontSet zero_waves() const;

  void check(const LayerStack& stack) const;
  void check(const WavefrontSet& waves) const;

 private:
  SystemGeometry geometry_;
  int n_;
  GridSpec aperture_grid_;
  std::vector<GridSpec> layer_grids_;
  LayerMasks masks_;
  Eigen::MatrixXd cones_;
  std::vector<InterpolationMatrix> stencils_;
};

/// Periodic bilinear interpolation of samples on grid at (x, y).
double interpolate_bilinear(const Eigen::ArrayXXd& values, const GridSpec& grid, double x, double y);

/// (A_g phi)(r) = sum_l phi_l(c_{l,g} r + alpha_g h_l), masked to the aperture and
/// zero-extended. With mask_to_aperture = false the full periodic square is kept.
WavefrontSet apply_forward(const LayerStack& stack, const TomographyOperator& op,
                           bool mask_to_aperture = true);

/// Exact adjoint of the discretized apply_forward with respect to the Riemann-sum
/// inner products (aperture: h_A^2 sum; layers: h_l^2 / gamma_l sum).
LayerStack apply_adjoint(const WavefrontSet& waves, const TomographyOperator& op);

/// gamma_l / c_{l,g}^2 * phi_g((r - alpha_g h_l) / c_{l,g}) * I_{lg}(r) on layer l.
RealField adjoint_component(const RealField& wave, std::size_t g, std::size_t l,
                            const TomographyOperator& op, Interpolation interp);

/// Analytic adjoint formula evaluated on the layer grids.
LayerStack apply_adjoint_analytic(const WavefrontSet& waves, const TomographyOperator& op,
                                  Interpolation interp = Interpolation::Bilinear);

/// Analytic adjoint divided by O_l on Omega_l, zero where O_l = 0.
LayerStack apply_weighted_adjoint(const WavefrontSet& waves, const TomographyOperator& op,
                                  Interpolation interp = Interpolation::Bilinear);

/// Periodic operator on Omega_T via per-frequency matrices: for every in-band (j,k)
/// the layer coefficients (Sobolev order s) are mapped by the G x L frequency matrix
/// and synthesized against w_jk. Single-kind star sets only. No aperture masking.
WavefrontSet apply_periodic_forward(const LayerStack& stack, const TomographyOperator& op, double s);

/// Discrete inner products matching the operator's adjoint.
double wave_inner(const WavefrontSet& a, const WavefrontSet& b, const TomographyOperator& op);
double layer_inner(const LayerStack& a, const LayerStack& b, const TomographyOperator& op);
double wave_norm(const WavefrontSet& a, const TomographyOperator& op);
double layer_norm(const LayerStack& a, const TomographyOperator& op);

}  // namespace atomo
