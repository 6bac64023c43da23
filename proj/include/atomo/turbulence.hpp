#pragma once

#include "atomo/forward.hpp"

#include <cstdint>

namespace atomo {

inline constexpr double kKolmogorovExponent = -11.0 / 3.0;

struct TurbulenceParams {
  double fried_parameter = 0.129;            // r0, m
  double reference_fried_parameter = 0.129;  // r0 giving unit total variance
  double spectral_exponent = kKolmogorovExponent;
  double outer_scale = 100.0;  // m
  std::uint64_t seed = 1;

  void validate() const;
};

struct ScreenSet {
  LayerStack screens;
  TurbulenceParams params;
};

/// Spectral phase screens on each layer square: white noise shaped by
/// (kappa^2 + 1/L0^2)^(exponent/2) with the mean removed, then scaled so layer l
/// carries variance gamma_l * (r_ref / r0)^(5/3). Layer l draws from its own
/// generator seeded from (seed, l).
ScreenSet generate_screens(const TurbulenceParams& params, const TomographyOperator& op);

/// Mean of squares over the square.
double screen_variance(const RealField& screen);

/// Least-squares slope of log mean |c|^2 against log |(j,k)| with radial binning
/// over radii [max(2, n/16), n/4].
double sobolev_regularity_probe(const RealField& screen);

}  // namespace atomo
