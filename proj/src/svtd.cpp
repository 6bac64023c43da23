#include "atomo/svtd.hpp"

#include "atomo/errors.hpp"
#include "atomo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

namespace atomo {

namespace {

using cd = std::complex<double>;

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;

  void bytes(const void* p, std::size_t size) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < size; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
};

}  // namespace

FrequencyMatrix build_matrix(int j, int k, double s, const SystemGeometry& geometry) {
  if (!geometry.single_kind()) {
    throw ConfigError("SVTD requires an NGS-only or LGS-only star set");
  }
  const auto G = geometry.star_count();
  const auto L = geometry.layer_count();
  const double T = geometry.extension_half_width;
  FrequencyMatrix m{j, k, Eigen::MatrixXcd(G, L)};
  for (std::size_t l = 0; l < L; ++l) {
    const double c = min_cone_factor(l, geometry);
    const double h = geometry.layers[l].height;
    const double mag = sobolev_factor(j, k, s, beta(l, geometry)) * std::sqrt(geometry.layers[l].weight) / c;
    for (std::size_t g = 0; g < G; ++g) {
      const auto& star = geometry.stars[g];
      const double phase = std::numbers::pi * (j * star.alpha_x + k * star.alpha_y) * h / (c * T);
      m.entries(g, l) = std::polar(mag, phase);
    }
  }
  return m;
}

FrequencySvd decompose(const FrequencyMatrix& matrix, double rank_tol) {
  const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(matrix.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  while (rank < sv.size() && sv[rank] > rank_tol * smax && sv[rank] > 0.0) ++rank;

  FrequencySvd out;
  out.j = matrix.j;
  out.k = matrix.k;
  out.rank = rank;
  out.sigma = sv.head(rank);
  out.v = svd.matrixV().leftCols(rank);
  for (int n = 0; n < rank; ++n) {
    auto col = out.v.col(n);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-8 * scale) {
        col *= std::conj(col[i]) / std::abs(col[i]);
        col[i] = std::abs(col[i]);
        break;
      }
    }
  }
  out.u = matrix.entries * out.v;
  for (int n = 0; n < rank; ++n) out.u.col(n) /= out.sigma[n];
  return out;
}

std::uint64_t geometry_hash(const SystemGeometry& geometry) {
  Fnv f;
  f.f64(geometry.aperture.outer_radius);
  f.f64(geometry.aperture.inner_radius);
  f.u64(geometry.stars.size());
  for (const auto& s : geometry.stars) {
    f.f64(s.alpha_x);
    f.f64(s.alpha_y);
    f.u64(s.kind == StarKind::LGS ? 1 : 0);
  }
  f.u64(geometry.layers.size());
  for (const auto& l : geometry.layers) {
    f.f64(l.height);
    f.f64(l.weight);
  }
  f.f64(geometry.lgs_height);
  f.f64(geometry.extension_half_width);
  return f.h;
}

SvtdCache::SvtdCache(std::uint64_t geometry_hash, double s, int n, int stars, int layers,
                     std::vector<FrequencySvd> entries)
    : geometry_hash_(geometry_hash), s_(s), n_(n), stars_(stars), layers_(layers),
      entries_(std::move(entries)) {
  const int m = max_index();
  if (n < 4 || n % 2 != 0) throw ConfigError("SVD cache: invalid grid size");
  if (entries_.size() != static_cast<std::size_t>((2 * m + 1) * (2 * m + 1))) {
    throw ConfigError("SVD cache: entry count does not match the index set");
  }
  for (int k = -m; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      const auto& e = at(j, k);
      if (e.j != j || e.k != k) throw ConfigError("SVD cache: entries out of order");
      if (e.u.rows() != stars || e.v.rows() != layers || e.u.cols() != e.rank ||
          e.v.cols() != e.rank || e.sigma.size() != e.rank) {
        throw ConfigError("SVD cache: entry shape mismatch");
      }
    }
  }
}

const FrequencySvd& SvtdCache::at(int j, int k) const {
  const int m = max_index();
  if (std::abs(j) > m || std::abs(k) > m) throw ConfigError("SVD cache: frequency out of band");
  return entries_[static_cast<std::size_t>((k + m) * (2 * m + 1) + (j + m))];
}

void SvtdCache::check(const SystemGeometry& geometry, int n) const {
  if (geometry_hash_ != atomo::geometry_hash(geometry) || n_ != n ||
      stars_ != static_cast<int>(geometry.star_count()) ||
      layers_ != static_cast<int>(geometry.layer_count())) {
    throw ConfigError("SVD cache does not match the geometry or grid size");
  }
}

SvtdCache decompose_all(const SystemGeometry& geometry, double s, int n) {
  if (s < 0.0) throw ConfigError("Sobolev order must be non-negative");
  GridSpec{n, 1.0}.validate();
  const int m = n / 2 - 1;
  const int width = 2 * m + 1;
  std::vector<FrequencySvd> entries(static_cast<std::size_t>(width * width));
  build_matrix(0, 0, s, geometry);  // reject mixed geometries before spawning workers
  parallel_for(entries.size(), [&](std::size_t idx) {
    const int j = static_cast<int>(idx % width) - m;
    const int k = static_cast<int>(idx / width) - m;
    entries[idx] = decompose(build_matrix(j, k, s, geometry));
  });
  return SvtdCache(geometry_hash(geometry), s, n, static_cast<int>(geometry.star_count()),
                   static_cast<int>(geometry.layer_count()), std::move(entries));
}

double tikhonov_gain(double sigma, double alpha) { return sigma / (sigma * sigma + alpha); }

void FilterSpec::validate() const {
  switch (kind) {
    case Kind::Tikhonov:
      if (!(parameter > 0.0)) throw ConfigError("tikhonov alpha must be positive");
      break;
    case Kind::Truncation:
      if (!(parameter >= 0.0)) throw ConfigError("truncation sigma_min must be non-negative");
      break;
    case Kind::PseudoInverse:
      if (!(parameter >= 0.0 && parameter < 1.0)) throw ConfigError("rank tolerance must lie in [0, 1)");
      break;
  }
}

double FilterSpec::gain(double sigma, double sigma_max) const {
  switch (kind) {
    case Kind::Tikhonov:
      return tikhonov_gain(sigma, parameter);
    case Kind::Truncation:
      return sigma > 0.0 && sigma >= parameter ? 1.0 / sigma : 0.0;
    case Kind::PseudoInverse:
      return sigma > parameter * sigma_max && sigma > 0.0 ? 1.0 / sigma : 0.0;
  }
  return 0.0;
}

std::string FilterSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Tikhonov: os << "tikhonov(alpha=" << parameter << ")"; break;
    case Kind::Truncation: os << "truncation(sigma_min=" << parameter << ")"; break;
    case Kind::PseudoInverse: os << "pseudo_inverse(rank_tol=" << parameter << ")"; break;
  }
  return os.str();
}

LayerStack reconstruct(const WavefrontSet& waves, const SvtdCache& cache,
                       const TomographyOperator& op, const FilterSpec& filter) {
  filter.validate();
  op.check(waves);
  cache.check(op.geometry(), op.n());
  for (const auto& w : waves.stars) {
    if (!w.values.allFinite()) throw NumericalError("reconstruct: non-finite wavefront samples");
  }
  const auto& geometry = op.geometry();
  const auto G = op.star_count();
  const auto L = op.layer_count();
  const double s = cache.sobolev_order();

  std::vector<SpectralField> star_specs;
  for (const auto& w : waves.stars) star_specs.push_back(analyze(w, aperture_context()));
  std::vector<SpectralField> layer_specs;
  std::vector<double> betas;
  for (std::size_t l = 0; l < L; ++l) {
    layer_specs.push_back(SpectralField::zeros(op.layer_grid(l), layer_context(geometry, l)));
    betas.push_back(beta(l, geometry));
  }

  const int m = cache.max_index();
  const int width = 2 * m + 1;
  parallel_for(static_cast<std::size_t>(width), [&](std::size_t row) {
    const int k = static_cast<int>(row) - m;
    Eigen::VectorXcd data(G);
    for (int j = -m; j <= m; ++j) {
      const FrequencySvd& svd = cache.at(j, k);
      for (std::size_t g = 0; g < G; ++g) data[g] = star_specs[g].at(j, k);
      Eigen::VectorXcd d = Eigen::VectorXcd::Zero(L);
      const double smax = svd.rank > 0 ? svd.sigma[0] : 0.0;
      for (int n = 0; n < svd.rank; ++n) {
        d += filter.gain(svd.sigma[n], smax) * svd.u.col(n).dot(data) * svd.v.col(n);
      }
      for (std::size_t l = 0; l < L; ++l) {
        layer_specs[l].at(j, k) = d[l] * sobolev_factor(j, k, s, betas[l]);
      }
    }
  });

  LayerStack stack;
  for (std::size_t l = 0; l < L; ++l) stack.layers.push_back(synthesize_real(layer_specs[l]));
  return stack;
}

PicardReport picard_diagnostic(const WavefrontSet& waves, const SvtdCache& cache,
                               double growth_threshold) {
  const int m = cache.max_index();
  std::vector<SpectralField> specs;
  for (const auto& w : waves.stars) specs.push_back(analyze(w, aperture_context()));
  if (static_cast<int>(specs.size()) != cache.star_count()) {
    throw ConfigError("picard: star count does not match the cache");
  }

  std::vector<std::pair<double, double>> terms;
  Eigen::VectorXcd data(cache.star_count());
  for (int k = -m; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      const auto& svd = cache.at(j, k);
      for (int g = 0; g < cache.star_count(); ++g) data[g] = specs[g].at(j, k);
      for (int n = 0; n < svd.rank; ++n) {
        const double sigma = svd.sigma[n];
        terms.emplace_back(sigma, std::norm(svd.u.col(n).dot(data)) / (sigma * sigma));
      }
    }
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  PicardReport report;
  double sum = 0.0;
  for (const auto& [sigma, t] : terms) {
    sum += t;
    report.sigmas.push_back(sigma);
    report.partial_sums.push_back(sum);
  }
  if (terms.empty() || sum == 0.0) return report;

  const double smax = terms.front().first;
  const double smin = terms.back().first;
  const double split = smax >= 10.0 * smin ? 10.0 * smin : std::sqrt(smin * smax);
  double head = 0.0;
  for (const auto& [sigma, t] : terms) {
    if (sigma < split) break;
    head += t;
  }
  report.growth_ratio = head > 0.0 ? sum / head : std::numeric_limits<double>::infinity();
  report.plateau = report.growth_ratio < growth_threshold;
  return report;
}

WellposednessReport wellposedness_scan(const SystemGeometry& geometry, int n, int bins) {
  if (bins < 1) throw ConfigError("wellposedness_scan: bins must be positive");
  GridSpec{n, 1.0}.validate();
  const int m = n / 2 - 1;
  WellposednessReport report;
  report.min_sigma = std::numeric_limits<double>::infinity();
  std::vector<double> all;
  for (int k = -m; k <= m; ++k) {
    for (int j = -m; j <= m; ++j) {
      const FrequencySvd svd = decompose(build_matrix(j, k, 0.0, geometry));
      for (int i = 0; i < svd.rank; ++i) all.push_back(svd.sigma[i]);
      if (svd.rank > 0 && svd.sigma[svd.rank - 1] < report.min_sigma) {
        report.min_sigma = svd.sigma[svd.rank - 1];
        report.argmin_j = j;
        report.argmin_k = k;
      }
    }
  }
  if (all.empty()) return report;
  const auto [lo_it, hi_it] = std::minmax_element(all.begin(), all.end());
  double lo = std::log10(*lo_it);
  double hi = std::log10(*hi_it);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  for (int b = 0; b <= bins; ++b) report.bin_edges.push_back(lo + (hi - lo) * b / bins);
  report.counts.assign(bins, 0);
  for (double s : all) {
    const int b = std::clamp(static_cast<int>((std::log10(s) - lo) / (hi - lo) * bins), 0, bins - 1);
    ++report.counts[b];
  }
  return report;
}

}  // namespace atomo
