#include "atomo/forward.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"
#include "atomo/svtd.hpp"

#include <cmath>
#include <string>

namespace atomo {

namespace {

template <typename Set, typename Member>
void check_same_shape(const Set& a, const Set& b, Member member) {
  if ((a.*member).size() != (b.*member).size()) throw ConfigError("field set size mismatch");
  for (std::size_t i = 0; i < (a.*member).size(); ++i) {
    if (!((a.*member)[i].grid == (b.*member)[i].grid)) throw ConfigError("field grid mismatch");
  }
}

Eigen::Map<const Eigen::VectorXd> flat(const RealField& f) {
  return {f.values.data(), f.values.size()};
}

Eigen::Map<Eigen::VectorXd> flat(RealField& f) { return {f.values.data(), f.values.size()}; }

int wrap_index(int i, int n) { return ((i % n) + n) % n; }

}  // namespace

LayerStack& LayerStack::operator+=(const LayerStack& other) {
  check_same_shape(*this, other, &LayerStack::layers);
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].values += other.layers[l].values;
  return *this;
}

LayerStack& LayerStack::operator-=(const LayerStack& other) {
  check_same_shape(*this, other, &LayerStack::layers);
  for (std::size_t l = 0; l < layers.size(); ++l) layers[l].values -= other.layers[l].values;
  return *this;
}

LayerStack& LayerStack::operator*=(double a) {
  for (auto& f : layers) f.values *= a;
  return *this;
}

LayerStack operator+(LayerStack a, const LayerStack& b) { return a += b; }
LayerStack operator-(LayerStack a, const LayerStack& b) { return a -= b; }
LayerStack operator*(double a, LayerStack b) { return b *= a; }

WavefrontSet& WavefrontSet::operator+=(const WavefrontSet& other) {
  check_same_shape(*this, other, &WavefrontSet::stars);
  for (std::size_t g = 0; g < stars.size(); ++g) stars[g].values += other.stars[g].values;
  return *this;
}

WavefrontSet& WavefrontSet::operator-=(const WavefrontSet& other) {
  check_same_shape(*this, other, &WavefrontSet::stars);
  for (std::size_t g = 0; g < stars.size(); ++g) stars[g].values -= other.stars[g].values;
  return *this;
}

WavefrontSet& WavefrontSet::operator*=(double a) {
  for (auto& f : stars) f.values *= a;
  return *this;
}

WavefrontSet operator+(WavefrontSet a, const WavefrontSet& b) { return a += b; }
WavefrontSet operator-(WavefrontSet a, const WavefrontSet& b) { return a -= b; }
WavefrontSet operator*(double a, WavefrontSet b) { return b *= a; }

TomographyOperator::TomographyOperator(SystemGeometry geometry, int n)
    : geometry_(std::move(geometry)), n_(n) {
  geometry_.validate();
  const auto extent = validate_extent(geometry_);
  if (!extent.ok) {
    std::string pairs;
    for (auto [l, g] : extent.violations) {
      pairs += " (layer " + std::to_string(l) + ", star " + std::to_string(g) + ")";
    }
    throw ConfigError("extension half width too small; violating pairs:" + pairs);
  }
  aperture_grid_ = atomo::aperture_grid(geometry_, n);
  const auto L = layer_count();
  const auto G = star_count();
  for (std::size_t l = 0; l < L; ++l) layer_grids_.push_back(atomo::layer_grid(geometry_, l, n));
  masks_ = build_masks(geometry_, n);
  cones_.resize(L, G);
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t g = 0; g < G; ++g) {
      cones_(l, g) = cone_factor(geometry_.layers[l], geometry_.stars[g], geometry_.lgs_height);
    }
  }

  stencils_.resize(G * L);
  parallel_for(G * L, [&](std::size_t idx) {
    const std::size_t g = idx / L;
    const std::size_t l = idx % L;
    const auto& star = geometry_.stars[g];
    const auto& lg = layer_grids_[l];
    const double h = geometry_.layers[l].height;
    const double c = cones_(l, g);
    std::vector<Eigen::Triplet<double>> taps;
    taps.reserve(4 * static_cast<std::size_t>(n) * n);
    for (int ix = 0; ix < n; ++ix) {
      const double fx = (c * aperture_grid_.coord(ix) + star.alpha_x * h + lg.half_width) / lg.spacing();
      const int x0 = static_cast<int>(std::floor(fx));
      const double tx = fx - x0;
      for (int iy = 0; iy < n; ++iy) {
        const double fy = (c * aperture_grid_.coord(iy) + star.alpha_y * h + lg.half_width) / lg.spacing();
        const int y0 = static_cast<int>(std::floor(fy));
        const double ty = fy - y0;
        const int row = iy + n * ix;
        const int cx0 = wrap_index(x0, n), cx1 = wrap_index(x0 + 1, n);
        const int cy0 = wrap_index(y0, n), cy1 = wrap_index(y0 + 1, n);
        taps.emplace_back(row, cy0 + n * cx0, (1 - tx) * (1 - ty));
        taps.emplace_back(row, cy0 + n * cx1, tx * (1 - ty));
        taps.emplace_back(row, cy1 + n * cx0, (1 - tx) * ty);
        taps.emplace_back(row, cy1 + n * cx1, tx * ty);
      }
    }
    InterpolationMatrix P(n * n, n * n);
    P.setFromTriplets(taps.begin(), taps.end());
    stencils_[idx] = std::move(P);
  });
}

LayerStack TomographyOperator::zero_stack() const {
  LayerStack stack;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    stack.layers.push_back(RealField::zeros(layer_grids_[l], Domain::Layer, static_cast<int>(l)));
  }
  return stack;
}

WavefrontSet TomographyOperator::zero_waves() const {
  WavefrontSet waves;
  for (std::size_t g = 0; g < star_count(); ++g) {
    waves.stars.push_back(RealField::zeros(aperture_grid_, Domain::Aperture));
  }
  return waves;
}

void TomographyOperator::check(const LayerStack& stack) const {
  if (stack.size() != layer_count()) throw ConfigError("layer stack: layer count mismatch");
  for (std::size_t l = 0; l < layer_count(); ++l) {
    if (!(stack.layers[l].grid == layer_grids_[l]) || stack.layers[l].values.rows() != n_ ||
        stack.layers[l].values.cols() != n_) {
      throw ConfigError("layer stack: grid mismatch on layer " + std::to_string(l));
    }
  }
}

void TomographyOperator::check(const WavefrontSet& waves) const {
  if (waves.size() != star_count()) throw ConfigError("wavefront set: star count mismatch");
  for (const auto& w : waves.stars) {
    if (!(w.grid == aperture_grid_) || w.values.rows() != n_ || w.values.cols() != n_) {
      throw ConfigError("wavefront set: grid mismatch");
    }
  }
}

double interpolate_bilinear(const Eigen::ArrayXXd& values, const GridSpec& grid, double x, double y) {
  const int n = grid.n;
  const double fx = (x + grid.half_width) / grid.spacing();
  const double fy = (y + grid.half_width) / grid.spacing();
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  const int cx0 = wrap_index(x0, n), cx1 = wrap_index(x0 + 1, n);
  const int cy0 = wrap_index(y0, n), cy1 = wrap_index(y0 + 1, n);
  return (1 - tx) * (1 - ty) * values(cy0, cx0) + tx * (1 - ty) * values(cy0, cx1) +
         (1 - tx) * ty * values(cy1, cx0) + tx * ty * values(cy1, cx1);
}

WavefrontSet apply_forward(const LayerStack& stack, const TomographyOperator& op,
                           bool mask_to_aperture) {
  op.check(stack);
  WavefrontSet waves = op.zero_waves();
  parallel_for(op.star_count(), [&](std::size_t g) {
    auto out = flat(waves.stars[g]);
    for (std::size_t l = 0; l < op.layer_count(); ++l) out += op.stencil(g, l) * flat(stack.layers[l]);
    if (mask_to_aperture) waves.stars[g].values *= op.masks().aperture;
  });
  return waves;
}

LayerStack apply_adjoint(const WavefrontSet& waves, const TomographyOperator& op) {
  op.check(waves);
  LayerStack stack = op.zero_stack();
  const double ha2 = op.aperture_grid().cell_area();
  std::vector<RealField> masked = waves.stars;
  for (auto& w : masked) w.values *= op.masks().aperture;
  parallel_for(op.layer_count(), [&](std::size_t l) {
    auto out = flat(stack.layers[l]);
    for (std::size_t g = 0; g < op.star_count(); ++g) {
      out += op.stencil(g, l).transpose() * flat(masked[g]);
    }
    out *= op.weight(l) * ha2 / op.layer_grid(l).cell_area();
  });
  return stack;
}

RealField adjoint_component(const RealField& wave, std::size_t g, std::size_t l,
                            const TomographyOperator& op, Interpolation interp) {
  const int n = op.n();
  const auto& lg = op.layer_grid(l);
  const auto& star = op.geometry().stars.at(g);
  const double h = op.geometry().layers.at(l).height;
  const double c = op.cone(l, g);
  const double scale = op.weight(l) / (c * c);
  const auto& indicator = op.masks().indicator[l][g];

  RealField out = RealField::zeros(lg, Domain::Layer, static_cast<int>(l));
  Eigen::VectorXd xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = (lg.coord(i) - star.alpha_x * h) / c;
    ys[i] = (lg.coord(i) - star.alpha_y * h) / c;
  }
  if (interp == Interpolation::Bilinear) {
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        if (indicator(iy, ix) == 0.0) continue;
        out.values(iy, ix) = scale * interpolate_bilinear(wave.values, op.aperture_grid(), xs[ix], ys[iy]);
      }
    }
  } else {
    const SpectralField spec = analyze(wave, aperture_context());
    const Eigen::ArrayXXcd vals = evaluate_tensor(spec, xs, ys, n / 2 - 1);
    out.values = scale * vals.real() * indicator;
  }
  return out;
}

LayerStack apply_adjoint_analytic(const WavefrontSet& waves, const TomographyOperator& op,
                                  Interpolation interp) {
  op.check(waves);
  LayerStack stack = op.zero_stack();
  parallel_for(op.layer_count(), [&](std::size_t l) {
    for (std::size_t g = 0; g < op.star_count(); ++g) {
      stack.layers[l].values += adjoint_component(waves.stars[g], g, l, op, interp).values;
    }
  });
  return stack;
}

LayerStack apply_weighted_adjoint(const WavefrontSet& waves, const TomographyOperator& op,
                                  Interpolation interp) {
  LayerStack stack = apply_adjoint_analytic(waves, op, interp);
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    const auto& overlay = op.masks().overlay[l];
    stack.layers[l].values = (overlay >= 1.0).select(stack.layers[l].values / overlay.max(1.0), 0.0);
  }
  return stack;
}

WavefrontSet apply_periodic_forward(const LayerStack& stack, const TomographyOperator& op, double s) {
  op.check(stack);
  const auto& geometry = op.geometry();
  if (!geometry.single_kind()) {
    throw ConfigError("periodic forward requires an NGS-only or LGS-only star set");
  }
  const auto L = op.layer_count();
  const auto G = op.star_count();
  std::vector<SpectralField> layer_specs;
  std::vector<double> betas;
  for (std::size_t l = 0; l < L; ++l) {
    layer_specs.push_back(analyze(stack.layers[l], layer_context(geometry, l)));
    betas.push_back(beta(l, geometry));
  }
  std::vector<SpectralField> star_specs(G, SpectralField::zeros(op.aperture_grid(), aperture_context()));
  const int m = op.n() / 2 - 1;
  Eigen::VectorXcd coeffs(L);
  for (int k = -m; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      const FrequencyMatrix A = build_matrix(j, k, s, geometry);
      for (std::size_t l = 0; l < L; ++l) {
        // H^s coefficient <phi_l, w^(s)_{jk,l}> from the L2 coefficient
        coeffs[l] = layer_specs[l].at(j, k) / sobolev_factor(j, k, s, betas[l]);
      }
      const Eigen::VectorXcd out = A.entries * coeffs;
      for (std::size_t g = 0; g < G; ++g) star_specs[g].at(j, k) = out[g];
    }
  }
  WavefrontSet waves;
  for (std::size_t g = 0; g < G; ++g) waves.stars.push_back(synthesize_real(star_specs[g]));
  return waves;
}

double wave_inner(const WavefrontSet& a, const WavefrontSet& b, const TomographyOperator& op) {
  op.check(a);
  op.check(b);
  double sum = 0.0;
  for (std::size_t g = 0; g < a.size(); ++g) sum += inner_product(a.stars[g], b.stars[g]);
  return sum;
}

double layer_inner(const LayerStack& a, const LayerStack& b, const TomographyOperator& op) {
  op.check(a);
  op.check(b);
  double sum = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    sum += inner_product(a.layers[l], b.layers[l], op.weight(l));
  }
  return sum;
}

double wave_norm(const WavefrontSet& a, const TomographyOperator& op) {
  return std::sqrt(wave_inner(a, a, op));
}

double layer_norm(const LayerStack& a, const TomographyOperator& op) {
  return std::sqrt(layer_inner(a, a, op));
}

}  // namespace atomo
