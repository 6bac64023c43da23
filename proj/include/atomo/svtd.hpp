#pragma once

#include "atomo/forward.hpp"
#include "atomo/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace atomo {

/// Per-frequency G x L matrix of the periodic operator,
///   entry(g, l) = (1 + beta_l |(j,k)|^2)^(-s/2) sqrt(gamma_l) / c_l
///                 * exp(i pi (j alpha_g^x + k alpha_g^y) h_l / (c_l T)).
struct FrequencyMatrix {
  int j = 0;
  int k = 0;
  Eigen::MatrixXcd entries;
};

/// Requires a single-kind star set; throws ConfigError otherwise.
FrequencyMatrix build_matrix(int j, int k, double s, const SystemGeometry& geometry);

/// Thin SVD restricted to the numerical rank. Columns of v have their first
/// nonzero component real and positive; u follows as A v / sigma.
struct FrequencySvd {
  int j = 0;
  int k = 0;
  int rank = 0;
  Eigen::VectorXd sigma;  // descending, > 0
  Eigen::MatrixXcd u;     // G x rank
  Eigen::MatrixXcd v;     // L x rank
};

inline constexpr double kDefaultRankTolerance = 1e-10;

FrequencySvd decompose(const FrequencyMatrix& matrix, double rank_tol = kDefaultRankTolerance);

/// Content hash of a geometry (FNV-1a over its canonical binary form).
std::uint64_t geometry_hash(const SystemGeometry& geometry);

/// Per-frequency SVDs over the in-band index set of an n x n grid. Immutable once built.
class SvtdCache {
 public:
  SvtdCache() = default;
  SvtdCache(std::uint64_t geometry_hash, double s, int n, int stars, int layers,
            std::vector<FrequencySvd> entries);

  std::uint64_t geometry_hash() const { return geometry_hash_; }
  double sobolev_order() const { return s_; }
  int n() const { return n_; }
  int star_count() const { return stars_; }
  int layer_count() const { return layers_; }
  int max_index() const { return n_ / 2 - 1; }

  const FrequencySvd& at(int j, int k) const;
  const std::vector<FrequencySvd>& entries() const { return entries_; }

  /// Throws ConfigError unless the cache was built for (geometry, n).
  void check(const SystemGeometry& geometry, int n) const;

 private:
  std::uint64_t geometry_hash_ = 0;
  double s_ = 0.0;
  int n_ = 0;
  int stars_ = 0;
  int layers_ = 0;
  std::vector<FrequencySvd> entries_;  // k-major over [-m, m]^2, m = n/2 - 1
};

SvtdCache decompose_all(const SystemGeometry& geometry, double s, int n);

/// g_alpha(sigma) = sigma / (sigma^2 + alpha)
double tikhonov_gain(double sigma, double alpha);

struct FilterSpec {
  enum class Kind { Tikhonov, Truncation, PseudoInverse };

  Kind kind = Kind::Tikhonov;
  double parameter = 1e-2;  // alpha, sigma_min, or relative rank tolerance

  static FilterSpec tikhonov(double alpha) { return {Kind::Tikhonov, alpha}; }
  static FilterSpec truncation(double sigma_min) { return {Kind::Truncation, sigma_min}; }
  static FilterSpec pseudo_inverse(double rank_tol = kDefaultRankTolerance) {
    return {Kind::PseudoInverse, rank_tol};
  }

  void validate() const;
  /// Filtered inverse of sigma; sigma_max is the largest singular value of the same matrix.
  double gain(double sigma, double sigma_max) const;
  std::string describe() const;
};

/// Regularized SVTD reconstruction (fft2 of each wavefront, per-frequency filtered
/// pseudo-inverse, Sobolev factor, synthesis on each layer's square).
LayerStack reconstruct(const WavefrontSet& waves, const SvtdCache& cache,
                       const TomographyOperator& op, const FilterSpec& filter);

/// Cumulative sums of |u_n^H phi_jk|^2 / sigma_n^2 ordered by decreasing sigma.
/// growth_ratio = total / (sum over sigma >= 10 sigma_min); when sigma spans less
/// than a decade the split is at sqrt(sigma_min sigma_max). plateau iff
/// growth_ratio < threshold.
struct PicardReport {
  std::vector<double> sigmas;
  std::vector<double> partial_sums;
  double growth_ratio = 1.0;
  bool plateau = true;
};

PicardReport picard_diagnostic(const WavefrontSet& waves, const SvtdCache& cache,
                               double growth_threshold = 1.5);

struct WellposednessReport {
  double min_sigma = 0.0;
  int argmin_j = 0;
  int argmin_k = 0;
  std::vector<double> bin_edges;  // log10(sigma), ascending
  std::vector<int> counts;        // counts.size() == bin_edges.size() - 1
};

/// Smallest nonzero singular value of the s = 0 frequency matrices over the in-band set.
WellposednessReport wellposedness_scan(const SystemGeometry& geometry, int n, int bins = 20);

}  // namespace atomo
