#include "atomo/metrics.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace atomo {

EvaluationGrid EvaluationGrid::square(int size, double fov_arcsec) {
  if (size < 1) throw ConfigError("evaluation grid size must be positive");
  if (!(fov_arcsec >= 0.0)) throw ConfigError("evaluation field of view must be non-negative");
  EvaluationGrid grid;
  for (int iy = 0; iy < size; ++iy) {
    for (int ix = 0; ix < size; ++ix) {
      const double fx = size == 1 ? 0.0 : -0.5 + static_cast<double>(ix) / (size - 1);
      const double fy = size == 1 ? 0.0 : -0.5 + static_cast<double>(iy) / (size - 1);
      grid.directions.emplace_back(arcsec_to_rad(fx * fov_arcsec), arcsec_to_rad(fy * fov_arcsec));
    }
  }
  return grid;
}

int EvaluationGrid::center_index() const {
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (std::abs(directions[i].first) < 1e-15 && std::abs(directions[i].second) < 1e-15) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<int> EvaluationGrid::outermost_indices() const {
  double ring = 0.0;
  for (const auto& [x, y] : directions) ring = std::max(ring, std::max(std::abs(x), std::abs(y)));
  std::vector<int> out;
  if (ring == 0.0) return out;
  const double tol = 1e-9 * ring;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    const double ax = std::abs(directions[i].first);
    const double ay = std::abs(directions[i].second);
    if (std::max(ax, ay) < ring - tol) continue;
    const bool corner = std::abs(ax - ay) <= tol;
    const bool midpoint = ax <= tol || ay <= tol;
    if (corner || midpoint) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<double> layer_error(const LayerStack& recon, const LayerStack& truth,
                                const TomographyOperator& op) {
  op.check(recon);
  op.check(truth);
  std::vector<double> errors;
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    const Eigen::ArrayXXd mask = op.masks().footprint(l);
    const double num = ((recon.layers[l].values - truth.layers[l].values) * mask).matrix().norm();
    const double den = (truth.layers[l].values * mask).matrix().norm();
    errors.push_back(den == 0.0 ? (num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : num / den);
  }
  return errors;
}

double masked_rms(const Eigen::ArrayXXd& values, const Eigen::ArrayXXd& mask) {
  const Eigen::ArrayXXd inside = (mask != 0.0).cast<double>();
  const double count = inside.sum();
  if (count == 0.0) return 0.0;
  const double mean = (values * inside).sum() / count;
  return std::sqrt(((values - mean).square() * inside).sum() / count);
}

DirectionalResidual directional_residual(const LayerStack& recon, const LayerStack& truth,
                                         double theta_x, double theta_y, const TomographyOperator& op) {
  op.check(recon);
  op.check(truth);
  const auto& geometry = op.geometry();
  const double sep = std::hypot(theta_x, theta_y);
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    const double h = geometry.layers[l].height;
    if (geometry.aperture.outer_radius + sep * h > op.layer_grid(l).half_width) {
      throw ConfigError("evaluation direction exceeds the layer extent on layer " + std::to_string(l));
    }
  }
  const auto& ag = op.aperture_grid();
  const auto& mask = op.masks().aperture;
  DirectionalResidual out{RealField::zeros(ag, Domain::Aperture), 0.0};
  for (std::size_t l = 0; l < op.layer_count(); ++l) {
    const Eigen::ArrayXXd diff = truth.layers[l].values - recon.layers[l].values;
    const double h = geometry.layers[l].height;
    for (int ix = 0; ix < ag.n; ++ix) {
      for (int iy = 0; iy < ag.n; ++iy) {
        if (mask(iy, ix) == 0.0) continue;
        out.residual.values(iy, ix) +=
            interpolate_bilinear(diff, op.layer_grid(l), ag.coord(ix) + theta_x * h, ag.coord(iy) + theta_y * h);
      }
    }
  }
  out.rms = masked_rms(out.residual.values, mask);
  return out;
}

double marechal_strehl(double rms_phase) {
  if (!(rms_phase >= 0.0)) throw ConfigError("marechal_strehl: rms must be non-negative");
  return std::exp(-rms_phase * rms_phase);
}

QualityReport evaluate_quality(const LayerStack& recon, const LayerStack& truth,
                               const TomographyOperator& op, const EvaluationGrid& grid) {
  QualityReport report;
  report.layer_errors = layer_error(recon, truth, op);
  report.directions = grid.directions;
  const auto count = grid.directions.size();
  report.rms.assign(count, 0.0);
  report.strehl.assign(count, 0.0);
  parallel_for(count, [&](std::size_t i) {
    const auto [tx, ty] = grid.directions[i];
    report.rms[i] = directional_residual(recon, truth, tx, ty, op).rms;
    report.strehl[i] = marechal_strehl(report.rms[i]);
  });
  if (count > 0) {
    for (std::size_t i = 0; i < count; ++i) {
      report.mean_rms += report.rms[i] / count;
      report.mean_strehl += report.strehl[i] / count;
    }
  }
  const int c = grid.center_index();
  report.center_rms = c >= 0 ? report.rms[c] : 0.0;
  const auto outer = grid.outermost_indices();
  for (int i : outer) report.outer_rms += report.rms[i] / outer.size();
  return report;
}

}  // namespace atomo
