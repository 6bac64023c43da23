#pragma once

#include "atomo/forward.hpp"

#include <vector>

namespace atomo {

struct FrameIndex {
  int j = 0;
  int k = 0;
  std::size_t layer = 0;
  std::size_t star = 0;
};

/// coeffs[l][g] holds <phi_l, w_{jk,lg}> over the layer grid's index set.
struct FrameCoefficients {
  std::vector<std::vector<SpectralField>> coeffs;

  /// Sum of |coefficient|^2 over in-band indices and all stars of layer l.
  double energy(std::size_t layer) const;
};

FrameCoefficients frame_analyze(const LayerStack& stack, const TomographyOperator& op);

/// S_l f = f * O_l.
RealField frame_operator_apply(const RealField& f, std::size_t layer, const TomographyOperator& op);

/// sum_g sum_{|j|,|k| <= band} <f, w_{jk,lg}> w_{jk,lg}, evaluated by transforms.
/// band >= n/2 uses the full discrete index set.
RealField frame_operator_series(const RealField& f, std::size_t layer, const TomographyOperator& op,
                                int band);

/// w_{jk,lg} / O_l on the layer grid, with w_{jk,lg} = sqrt(gamma_l)/c_{l,g} w_jk(r / c_{l,g}) I_{lg}(r).
/// Zero outside Omega_l. Throws NumericalError if I_{lg} = 1 somewhere O_l = 0.
ComplexField dual_frame_eval(const FrameIndex& index, const TomographyOperator& op);

/// sigma_g = sqrt(sum_l gamma_l c_{l,g}^-2)
double frame_sigma(std::size_t star, const TomographyOperator& op);

/// (A phi)_l = sum_g sigma_g^-2 A*_{g,xi} phi_g.
LayerStack frame_inverse_apply(const WavefrontSet& waves, const TomographyOperator& op,
                               Interpolation interp = Interpolation::Bilinear);

struct SolverOptions {
  int iterations = 5;
  double step_scale = 1.0;
  bool record_residuals = true;
  Interpolation interpolation = Interpolation::Bilinear;

  void validate() const;
};

struct SolveResult {
  LayerStack stack;
  std::vector<double> residuals;  // ||data - A phi_k|| on Omega_A, k = 0..iterations
};

/// ||w|| over the aperture only.
double aperture_residual_norm(const WavefrontSet& w, const TomographyOperator& op);

/// phi_{k+1} = phi_k + step_scale * frame_inverse_apply(data - A phi_k), phi_0 = 0.
/// Throws NumericalError once a residual exceeds 10x the smallest one seen.
SolveResult iterative_fd(const WavefrontSet& data, const TomographyOperator& op,
                         const SolverOptions& options);

/// Steepest descent on 0.5 ||A phi - data||^2 along the weighted adjoint of the
/// residual, with exact line search. Same divergence guard as iterative_fd.
SolveResult gradient_solve(const WavefrontSet& data, const TomographyOperator& op,
                           const SolverOptions& options);

}  // namespace atomo
