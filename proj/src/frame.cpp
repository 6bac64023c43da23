#include "atomo/frame.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace atomo {

namespace {

void guard(const std::vector<double>& residuals, const char* solver) {
  const double r = residuals.back();
  if (!std::isfinite(r)) throw NumericalError(std::string(solver) + ": non-finite residual");
  const double best = *std::min_element(residuals.begin(), residuals.end());
  if (r > 10.0 * best) {
    throw NumericalError(std::string(solver) + ": residual grew more than 10x above its minimum");
  }
}

WavefrontSet masked(WavefrontSet w, const TomographyOperator& op) {
  for (auto& s : w.stars) s.values *= op.masks().aperture;
  return w;
}

}  // namespace

double FrameCoefficients::energy(std::size_t layer) const {
  double sum = 0.0;
  for (const auto& spec : coeffs.at(layer)) {
    const int m = spec.n() / 2 - 1;
    for (int k = -m; k <= m; ++k) {
      for (int j = -m; j <= m; ++j) sum += std::norm(spec.at(j, k));
    }
  }
  return sum;
}

FrameCoefficients frame_analyze(const LayerStack& stack, const TomographyOperator& op) {
  op.check(stack);
  FrameCoefficients out;
  out.coeffs.resize(op.layer_count());
  parallel_for(op.layer_count(), [&](std::size_t l) {
    const auto ctx = layer_context(op.geometry(), l);
    for (std::size_t g = 0; g < op.star_count(); ++g) {
      RealField f = stack.layers[l];
      f.values *= op.masks().indicator[l][g];
      out.coeffs[l].push_back(analyze(f, ctx));
    }
  });
  return out;
}

RealField frame_operator_apply(const RealField& f, std::size_t layer, const TomographyOperator& op) {
  if (!(f.grid == op.layer_grid(layer))) throw ConfigError("frame operator: grid mismatch");
  RealField out = f;
  out.values *= op.masks().overlay.at(layer);
  return out;
}

RealField frame_operator_series(const RealField& f, std::size_t layer, const TomographyOperator& op,
                                int band) {
  if (!(f.grid == op.layer_grid(layer))) throw ConfigError("frame operator: grid mismatch");
  const auto ctx = layer_context(op.geometry(), layer);
  RealField out = RealField::zeros(f.grid, Domain::Layer, static_cast<int>(layer));
  for (std::size_t g = 0; g < op.star_count(); ++g) {
    const auto& indicator = op.masks().indicator[layer][g];
    RealField part = f;
    part.values *= indicator;
    SpectralField spec = analyze(part, ctx);
    for (int k = spec.min_index(); k <= spec.max_index(); ++k) {
      for (int j = spec.min_index(); j <= spec.max_index(); ++j) {
        if (std::abs(j) > band || std::abs(k) > band) spec.at(j, k) = 0.0;
      }
    }
    out.values += synthesize_real(spec).values * indicator;
  }
  return out;
}

ComplexField dual_frame_eval(const FrameIndex& index, const TomographyOperator& op) {
  const auto& grid = op.layer_grid(index.layer);
  const auto& indicator = op.masks().indicator.at(index.layer).at(index.star);
  const auto& overlay = op.masks().overlay[index.layer];
  const double c = op.cone(index.layer, index.star);
  const double T = op.geometry().extension_half_width;
  const double amp = std::sqrt(op.weight(index.layer)) / c / (2.0 * T);
  const double w = std::numbers::pi / (c * T);

  ComplexField out = ComplexField::zeros(grid, Domain::Layer, static_cast<int>(index.layer));
  for (int ix = 0; ix < grid.n; ++ix) {
    for (int iy = 0; iy < grid.n; ++iy) {
      if (indicator(iy, ix) == 0.0) continue;
      if (overlay(iy, ix) < 1.0) throw NumericalError("dual frame: indicator set where the overlay is zero");
      const double phase = w * (index.j * grid.coord(ix) + index.k * grid.coord(iy));
      out.values(iy, ix) = std::polar(amp, phase) / overlay(iy, ix);
    }
  }
  return out;
}

double frame_sigma(std::size_t star, const TomographyOperator& op) {
  double sum = 0.0;
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    const double c = op.cone(l, star);
    sum += op.weight(l) / (c * c);
  }
  return std::sqrt(sum);
}

LayerStack frame_inverse_apply(const WavefrontSet& waves, const TomographyOperator& op,
                               Interpolation interp) {
  op.check(waves);
  LayerStack stack = op.zero_stack();
  std::vector<double> inv_sigma2(op.star_count());
  for (std::size_t g = 0; g < op.star_count(); ++g) inv_sigma2[g] = 1.0 / std::pow(frame_sigma(g, op), 2);
  parallel_for(op.layer_count(), [&](std::size_t l) {
    auto& values = stack.layers[l].values;
    for (std::size_t g = 0; g < op.star_count(); ++g) {
      values += inv_sigma2[g] * adjoint_component(waves.stars[g], g, l, op, interp).values;
    }
    const auto& overlay = op.masks().overlay[l];
    values = (overlay >= 1.0).select(values / overlay.max(1.0), 0.0);
  });
  return stack;
}

void SolverOptions::validate() const {
  if (iterations < 0) throw ConfigError("solver iterations must be non-negative");
  if (!(step_scale > 0.0)) throw ConfigError("solver step_scale must be positive");
}

double aperture_residual_norm(const WavefrontSet& w, const TomographyOperator& op) {
  return wave_norm(masked(w, op), op);
}

SolveResult iterative_fd(const WavefrontSet& data, const TomographyOperator& op,
                         const SolverOptions& options) {
  options.validate();
  op.check(data);
  SolveResult result{op.zero_stack(), {}};
  WavefrontSet residual = masked(data, op);
  std::vector<double> history{wave_norm(residual, op)};
  for (int it = 0; it < options.iterations; ++it) {
    LayerStack update = frame_inverse_apply(residual, op, options.interpolation);
    update *= options.step_scale;
    result.stack += update;
    residual = masked(data, op) - apply_forward(result.stack, op);
    history.push_back(wave_norm(residual, op));
    guard(history, "iterative FD");
  }
  if (options.record_residuals) result.residuals = std::move(history);
  return result;
}

SolveResult gradient_solve(const WavefrontSet& data, const TomographyOperator& op,
                           const SolverOptions& options) {
  options.validate();
  op.check(data);
  SolveResult result{op.zero_stack(), {}};
  WavefrontSet residual = masked(data, op);
  std::vector<double> history{wave_norm(residual, op)};
  for (int it = 0; it < options.iterations; ++it) {
    const LayerStack direction = apply_weighted_adjoint(residual, op, options.interpolation);
    const WavefrontSet image = apply_forward(direction, op);
    const double denom = wave_inner(image, image, op);
    if (denom <= 0.0) {
      history.push_back(history.back());
      continue;
    }
    const double tau = options.step_scale * wave_inner(residual, image, op) / denom;
    result.stack += tau * direction;
    residual -= tau * image;
    history.push_back(wave_norm(residual, op));
    guard(history, "gradient");
  }
  if (options.record_residuals) result.residuals = std::move(history);
  return result;
}

}  // namespace atomo
