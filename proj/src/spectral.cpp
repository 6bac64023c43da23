#include "atomo/spectral.hpp"

#include "atomo/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <iostream>
#include <numbers>

namespace atomo {

namespace {

using cd = std::complex<double>;

void check_context(Domain domain, int layer, const SpectralContext& ctx) {
  if (domain != ctx.domain || (domain == Domain::Layer && layer != ctx.layer)) {
    throw ConfigError("spectral: field domain does not match the basis context");
  }
  if (!(ctx.gamma > 0.0)) throw ConfigError("spectral: gamma must be positive");
}

// (-1)^(j+k) for the DFT index stored at (ry, rx).
double checker_sign(int ry, int rx, int n) {
  auto centred = [n](int r) { return r < n / 2 ? r : r - n; };
  return ((centred(ry) + centred(rx)) & 1) ? -1.0 : 1.0;
}

SpectralField analyze_complex(Eigen::ArrayXXcd data, const GridSpec& grid, Domain domain,
                              int layer, const SpectralContext& ctx) {
  check_context(domain, layer, ctx);
  const int n = grid.n;
  if (data.rows() != n || data.cols() != n) throw ConfigError("analyze: shape mismatch");
  fft2(data, false);
  const double scale = 2.0 * grid.half_width / (static_cast<double>(n) * n) / std::sqrt(ctx.gamma);
  for (int ry = 0; ry < n; ++ry) {
    for (int rx = 0; rx < n; ++rx) data(ry, rx) *= scale * checker_sign(ry, rx, n);
  }
  SpectralField spec;
  spec.grid = grid;
  spec.domain = domain;
  spec.layer = layer;
  spec.gamma = ctx.gamma;
  spec.coeffs = std::move(data);
  return spec;
}

}  // namespace

SpectralContext aperture_context() { return {Domain::Aperture, -1, 1.0}; }

SpectralContext layer_context(const SystemGeometry& geometry, std::size_t layer) {
  return {Domain::Layer, static_cast<int>(layer), geometry.layers.at(layer).weight};
}

void SpectralField::restrict_to_band() {
  const int r = grid.n / 2;  // storage index of the Nyquist frequency
  coeffs.row(r).setZero();
  coeffs.col(r).setZero();
}

SpectralField SpectralField::zeros(const GridSpec& grid, const SpectralContext& ctx) {
  SpectralField spec;
  spec.grid = grid;
  spec.domain = ctx.domain;
  spec.layer = ctx.layer;
  spec.gamma = ctx.gamma;
  spec.coeffs = Eigen::ArrayXXcd::Zero(grid.n, grid.n);
  return spec;
}

void fft2(Eigen::ArrayXXcd& data, bool inverse) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  Eigen::VectorXcd in, out;
  auto transform = [&] {
    if (inverse) {
      fft.inv(out, in);
    } else {
      fft.fwd(out, in);
    }
  };
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    in = data.row(r).transpose().matrix();
    transform();
    data.row(r) = out.transpose().array();
  }
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    in = data.col(c).matrix();
    transform();
    data.col(c) = out.array();
  }
}

SpectralField analyze(const RealField& field, const SpectralContext& ctx) {
  return analyze_complex(field.values.cast<cd>(), field.grid, field.domain, field.layer, ctx);
}

SpectralField analyze(const ComplexField& field, const SpectralContext& ctx) {
  return analyze_complex(field.values, field.grid, field.domain, field.layer, ctx);
}

ComplexField synthesize(const SpectralField& spec) {
  const int n = spec.n();
  Eigen::ArrayXXcd data = spec.coeffs;
  const double scale = std::sqrt(spec.gamma) / (2.0 * spec.grid.half_width);
  for (int ry = 0; ry < n; ++ry) {
    for (int rx = 0; rx < n; ++rx) data(ry, rx) *= scale * checker_sign(ry, rx, n);
  }
  fft2(data, true);
  return ComplexField{spec.grid, spec.domain, spec.layer, std::move(data)};
}

RealField synthesize_real(const SpectralField& spec, double imag_tolerance) {
  const ComplexField field = synthesize(spec);
  const double peak = field.values.abs().maxCoeff();
  const double residue = field.values.imag().abs().maxCoeff();
  if (peak > 0.0 && residue > imag_tolerance * peak) {
    std::clog << "atomo: warning: discarding imaginary residue " << residue / peak
              << " (relative) after synthesis\n";
  }
  return RealField{spec.grid, spec.domain, spec.layer, field.values.real()};
}

double sobolev_factor(int j, int k, double s, double beta) {
  return std::pow(1.0 + beta * (static_cast<double>(j) * j + static_cast<double>(k) * k), -0.5 * s);
}

SpectralField sobolev_scale(const SpectralField& spec, double s, double beta,
                            ScaleDirection direction) {
  if (s < 0.0) throw ConfigError("sobolev_scale: s must be non-negative");
  SpectralField out = spec;
  for (int k = spec.min_index(); k <= spec.max_index(); ++k) {
    for (int j = spec.min_index(); j <= spec.max_index(); ++j) {
      const double f = sobolev_factor(j, k, s, beta);
      out.at(j, k) = direction == ScaleDirection::Apply ? spec.at(j, k) * f : spec.at(j, k) / f;
    }
  }
  out.sobolev_order += direction == ScaleDirection::Apply ? s : -s;
  return out;
}

double sobolev_norm(const SpectralField& spec, double s, double beta) {
  if (s < 0.0) throw ConfigError("sobolev_norm: s must be non-negative");
  double sum = 0.0;
  for (int k = spec.min_index(); k <= spec.max_index(); ++k) {
    for (int j = spec.min_index(); j <= spec.max_index(); ++j) {
      if (!spec.in_band(j, k)) continue;
      const double f = sobolev_factor(j, k, s, beta);
      sum += std::norm(spec.at(j, k)) / (f * f);
    }
  }
  return std::sqrt(sum);
}

RealField zero_extend(const RealField& field, const Eigen::ArrayXXd& mask) {
  if (mask.rows() != field.values.rows() || mask.cols() != field.values.cols()) {
    throw ConfigError("zero_extend: mask shape mismatch");
  }
  RealField out = field;
  out.values = (mask != 0.0).select(field.values, 0.0);
  return out;
}

double inner_product(const RealField& a, const RealField& b, double gamma) {
  if (!(a.grid == b.grid)) throw ConfigError("inner_product: grid mismatch");
  return a.grid.cell_area() / gamma * (a.values * b.values).sum();
}

double l2_norm(const RealField& a, double gamma) { return std::sqrt(inner_product(a, a, gamma)); }

Eigen::ArrayXXcd evaluate_tensor(const SpectralField& spec, const Eigen::VectorXd& xs,
                                 const Eigen::VectorXd& ys, int band) {
  const int lo = std::max(spec.min_index(), -band);
  const int hi = std::min(spec.max_index(), band);
  const int m = hi - lo + 1;
  const double R = spec.grid.half_width;
  const double w = std::numbers::pi / R;

  Eigen::MatrixXcd C(m, m);  // (k, j)
  for (int k = lo; k <= hi; ++k) {
    for (int j = lo; j <= hi; ++j) C(k - lo, j - lo) = spec.at(j, k);
  }
  Eigen::MatrixXcd Ex(xs.size(), m), Ey(ys.size(), m);
  for (Eigen::Index p = 0; p < xs.size(); ++p) {
    for (int j = lo; j <= hi; ++j) Ex(p, j - lo) = std::polar(1.0, w * j * xs[p]);
  }
  for (Eigen::Index q = 0; q < ys.size(); ++q) {
    for (int k = lo; k <= hi; ++k) Ey(q, k - lo) = std::polar(1.0, w * k * ys[q]);
  }
  const double scale = std::sqrt(spec.gamma) / (2.0 * R);
  return (scale * (Ey * C * Ex.transpose())).array();
}

Eigen::VectorXd grid_coords(const GridSpec& grid) {
  Eigen::VectorXd xs(grid.n);
  for (int i = 0; i < grid.n; ++i) xs[i] = grid.coord(i);
  return xs;
}

}  // namespace atomo
