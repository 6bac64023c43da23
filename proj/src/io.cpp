#include "atomo/io.hpp"

#include "atomo/errors.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace atomo {

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  }

  void magic(const char (&tag)[5]) { buf_.append(tag, 4); }
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put(bits, 8);
  }

  void flush() {
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + path_.string() + " for writing");
    out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw ConfigError("failed writing " + path_.string());
  }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }

  std::filesystem::path path_;
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path_);
    std::ostringstream ss;
    ss << in.rdbuf();
    buf_ = ss.str();
  }

  void magic(const char (&tag)[5]) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, tag, 4) != 0) throw ConfigError(path_ + ": bad magic");
    pos_ += 4;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  std::uint64_t u64() { return get(8); }
  double f64() {
    const std::uint64_t bits = get(8);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  void finish() const {
    if (pos_ != buf_.size()) throw ConfigError(path_ + ": trailing bytes");
  }

 private:
  void need(std::size_t bytes) const {
    if (pos_ + bytes > buf_.size()) throw ConfigError(path_ + ": truncated file");
  }
  std::uint64_t get(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(bytes);
    return v;
  }

  std::string path_;
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_grid(const std::filesystem::path& path, const RealField& field) {
  const int n = field.grid.n;
  if (field.values.rows() != n || field.values.cols() != n) throw ConfigError("write_grid: shape mismatch");
  Writer w(path);
  w.magic("ATGR");
  w.u32(kGridFileVersion);
  w.u32(static_cast<std::uint32_t>(n));
  w.f64(field.grid.half_width);
  w.u32(field.domain == Domain::Layer ? 1 : 0);
  w.i32(field.layer);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) w.f64(field.values(iy, ix));
  }
  w.flush();
}

RealField read_grid(const std::filesystem::path& path) {
  Reader r(path);
  r.magic("ATGR");
  if (r.u32() != kGridFileVersion) throw ConfigError(path.string() + ": unsupported grid file version");
  RealField field;
  field.grid.n = static_cast<int>(r.u32());
  field.grid.half_width = r.f64();
  field.grid.validate();
  const std::uint32_t domain = r.u32();
  if (domain > 1) throw ConfigError(path.string() + ": bad domain tag");
  field.domain = domain == 1 ? Domain::Layer : Domain::Aperture;
  field.layer = r.i32();
  const int n = field.grid.n;
  field.values.resize(n, n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) field.values(iy, ix) = r.f64();
  }
  r.finish();
  return field;
}

void write_svd_cache(const std::filesystem::path& path, const SvtdCache& cache) {
  Writer w(path);
  w.magic("ATSV");
  w.u32(kCacheFileVersion);
  w.u64(cache.geometry_hash());
  w.f64(cache.sobolev_order());
  w.u32(static_cast<std::uint32_t>(cache.n()));
  w.u32(static_cast<std::uint32_t>(cache.star_count()));
  w.u32(static_cast<std::uint32_t>(cache.layer_count()));
  w.u32(static_cast<std::uint32_t>(cache.entries().size()));
  for (const auto& e : cache.entries()) {
    w.i32(e.j);
    w.i32(e.k);
    w.i32(e.rank);
    for (int i = 0; i < e.rank; ++i) w.f64(e.sigma[i]);
    for (const auto* m : {&e.u, &e.v}) {
      for (Eigen::Index i = 0; i < m->size(); ++i) {
        w.f64(m->data()[i].real());
        w.f64(m->data()[i].imag());
      }
    }
  }
  w.flush();
}

SvtdCache read_svd_cache(const std::filesystem::path& path) {
  Reader r(path);
  r.magic("ATSV");
  if (r.u32() != kCacheFileVersion) throw ConfigError(path.string() + ": unsupported cache file version");
  const std::uint64_t hash = r.u64();
  const double s = r.f64();
  const int n = static_cast<int>(r.u32());
  const int stars = static_cast<int>(r.u32());
  const int layers = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();
  std::vector<FrequencySvd> entries(count);
  for (auto& e : entries) {
    e.j = r.i32();
    e.k = r.i32();
    e.rank = r.i32();
    if (e.rank < 0 || e.rank > std::min(stars, layers)) throw ConfigError(path.string() + ": bad rank");
    e.sigma.resize(e.rank);
    for (int i = 0; i < e.rank; ++i) e.sigma[i] = r.f64();
    e.u.resize(stars, e.rank);
    e.v.resize(layers, e.rank);
    for (auto* m : {&e.u, &e.v}) {
      for (Eigen::Index i = 0; i < m->size(); ++i) {
        const double re = r.f64();
        m->data()[i] = {re, r.f64()};
      }
    }
  }
  r.finish();
  return SvtdCache(hash, s, n, stars, layers, std::move(entries));
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  CsvTable table;
  std::string text;
  bool first = true;
  while (std::getline(in, text)) {
    if (text.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (first) throw ConfigError(path.string() + ": empty CSV");
  return table;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw ConfigError("CSV column not found: " + name);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace atomo
