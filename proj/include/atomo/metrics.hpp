#pragma once

#include "atomo/forward.hpp"

#include <utility>
#include <vector>

namespace atomo {

/// Science directions in radians.
struct EvaluationGrid {
  std::vector<std::pair<double, double>> directions;

  /// size x size directions evenly covering [-fov/2, fov/2]^2 (fov in arcsec).
  static EvaluationGrid square(int size, double fov_arcsec);

  /// Index of the on-axis direction, or -1.
  int center_index() const;
  /// Corners and edge midpoints of the outermost ring (8 directions for odd sizes).
  std::vector<int> outermost_indices() const;
};

/// ||(recon - truth) 1_{Omega_l}|| / ||truth 1_{Omega_l}|| per layer; 0/0 gives 0.
std::vector<double> layer_error(const LayerStack& recon, const LayerStack& truth,
                                const TomographyOperator& op);

struct DirectionalResidual {
  RealField residual;  // on Omega_A, zero outside
  double rms = 0.0;    // piston-removed, over Omega_A
};

/// residual(r) = sum_l (truth_l - recon_l)(r + theta h_l) with c = 1.
DirectionalResidual directional_residual(const LayerStack& recon, const LayerStack& truth,
                                         double theta_x, double theta_y, const TomographyOperator& op);

/// Piston-removed RMS over the nonzero entries of mask.
double masked_rms(const Eigen::ArrayXXd& values, const Eigen::ArrayXXd& mask);

/// exp(-rms^2)
double marechal_strehl(double rms_phase);

struct QualityReport {
  std::vector<double> layer_errors;
  std::vector<std::pair<double, double>> directions;
  std::vector<double> rms;
  std::vector<double> strehl;
  double mean_rms = 0.0;
  double mean_strehl = 0.0;
  double center_rms = 0.0;
  double outer_rms = 0.0;  // mean over outermost_indices()
};

QualityReport evaluate_quality(const LayerStack& recon, const LayerStack& truth,
                               const TomographyOperator& op, const EvaluationGrid& grid);

}  // namespace atomo
