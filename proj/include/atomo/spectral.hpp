#pragma once

#include "atomo/geometry.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace atomo {

enum class Domain { Aperture, Layer };

/// Samples of a field on a periodic grid. values(iy, ix) holds the sample at
/// (grid.coord(ix), grid.coord(iy)). Layer fields carry their layer index.
template <typename Scalar>
struct Field {
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  GridSpec grid;
  Domain domain = Domain::Aperture;
  int layer = -1;
  Values values;

  static Field zeros(const GridSpec& grid, Domain domain, int layer = -1) {
    return Field{grid, domain, layer, Values::Zero(grid.n, grid.n)};
  }
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

/// Basis scaling for a domain: (c, gamma) = (1, 1) on Omega_T, (c_l, gamma_l)
/// on layer l. The scaled half width c*T is taken from the field's grid.
struct SpectralContext {
  Domain domain = Domain::Aperture;
  int layer = -1;
  double gamma = 1.0;
};

SpectralContext aperture_context();
SpectralContext layer_context(const SystemGeometry& geometry, std::size_t layer);

/// Fourier coefficients against the scaled basis
///   w_{jk}(x, y) = sqrt(gamma) / (2R) * exp(i pi (j x + k y) / R),  R = grid half width,
/// over the full discrete index set j, k in [-n/2, n/2 - 1]. Algorithm-level
/// code restricts itself to in_band() indices, which drop the Nyquist row and column.
struct SpectralField {
  GridSpec grid;
  Domain domain = Domain::Aperture;
  int layer = -1;
  double gamma = 1.0;
  double sobolev_order = 0.0;  // s applied on top of raw coefficients
  Eigen::ArrayXXcd coeffs;     // stored at (k mod n, j mod n)

  int n() const { return grid.n; }
  int min_index() const { return -grid.n / 2; }
  int max_index() const { return grid.n / 2 - 1; }
  bool in_band(int j, int k) const {
    const int m = grid.n / 2 - 1;
    return j >= -m && j <= m && k >= -m && k <= m;
  }

  std::complex<double>& at(int j, int k) { return coeffs(wrap(k), wrap(j)); }
  const std::complex<double>& at(int j, int k) const { return coeffs(wrap(k), wrap(j)); }

  /// Zeroes the Nyquist row and column.
  void restrict_to_band();

  static SpectralField zeros(const GridSpec& grid, const SpectralContext& ctx);

 private:
  int wrap(int j) const {
    const int n = grid.n;
    return ((j % n) + n) % n;
  }
};

/// Unscaled 2-D DFT in place (forward: exp(-2 pi i ...), inverse: exp(+2 pi i ...)).
void fft2(Eigen::ArrayXXcd& data, bool inverse);

/// Riemann-sum coefficients <u, w_jk>_{L2(square, gamma)}. synthesize(analyze(f)) == f
/// on the grid, and a sampled basis function maps to a unit coefficient.
SpectralField analyze(const RealField& field, const SpectralContext& ctx);
SpectralField analyze(const ComplexField& field, const SpectralContext& ctx);

/// Sum over all stored coefficients of c_jk w_jk on the grid.
ComplexField synthesize(const SpectralField& spec);

/// Real part of synthesize(); imaginary residue above imag_tolerance (relative to
/// the field's max magnitude) is reported on std::clog before truncation.
RealField synthesize_real(const SpectralField& spec, double imag_tolerance = 1e-10);

/// (1 + beta |(j,k)|^2)^(-s/2)
double sobolev_factor(int j, int k, double s, double beta);

enum class ScaleDirection { Apply, Remove };

/// Multiplies (Apply) or divides (Remove) every coefficient by sobolev_factor.
SpectralField sobolev_scale(const SpectralField& spec, double s, double beta,
                            ScaleDirection direction);

/// sqrt(sum (1 + beta |(j,k)|^2)^s |c_jk|^2) over in-band indices.
double sobolev_norm(const SpectralField& spec, double s, double beta);

/// Copies values inside mask (nonzero entries), zero elsewhere.
RealField zero_extend(const RealField& field, const Eigen::ArrayXXd& mask);

/// Riemann-sum inner product (1/gamma) * h^2 * sum a b on a shared grid.
double inner_product(const RealField& a, const RealField& b, double gamma = 1.0);
double l2_norm(const RealField& a, double gamma = 1.0);

/// Evaluates sum over |j|,|k| <= band (clipped to the stored set) of c_jk w_jk at the
/// tensor grid (xs[p], ys[q]); result indexed (q, p). Points may lie off the grid.
Eigen::ArrayXXcd evaluate_tensor(const SpectralField& spec, const Eigen::VectorXd& xs,
                                 const Eigen::VectorXd& ys, int band);

/// Sampled coordinates of a grid as a vector.
Eigen::VectorXd grid_coords(const GridSpec& grid);

}  // namespace atomo
