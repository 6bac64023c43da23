#pragma once

#include "atomo/spectral.hpp"
#include "atomo/svtd.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace atomo {

inline constexpr std::uint32_t kGridFileVersion = 1;
inline constexpr std::uint32_t kCacheFileVersion = 1;

/// Grid file: "ATGR", u32 version, u32 n, f64 half_width, u32 domain (0 aperture,
/// 1 layer), i32 layer, then n*n f64 samples with iy outer and ix inner.
/// All values little-endian.
void write_grid(const std::filesystem::path& path, const RealField& field);
RealField read_grid(const std::filesystem::path& path);

/// Cache file: "ATSV", u32 version, u64 geometry hash, f64 s, u32 n, u32 stars,
/// u32 layers, u32 count, then per frequency: i32 j, i32 k, i32 rank, sigma[rank],
/// u[stars x rank], v[layers x rank] (column-major, complex as (re, im)).
void write_svd_cache(const std::filesystem::path& path, const SvtdCache& cache);
SvtdCache read_svd_cache(const std::filesystem::path& path);

/// Minimal CSV table writer and reader (numeric or plain-text cells, no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(const std::filesystem::path& path) const;
  static CsvTable read(const std::filesystem::path& path);
  int column(const std::string& name) const;
};

/// Shortest text form that round-trips the double.
std::string format_double(double v);

}  // namespace atomo
