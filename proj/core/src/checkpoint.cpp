#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "mcal/driver.hpp"

namespace mcal {

// Plain little-endian binary layout:
//   magic "MCALCKPT" (8 bytes), u32 version,
//   f64 L, i32 D, i32 M, i32 n, i32 K, i32 n2, i32 history length,
//   f64 weights[K], f64 states[n2*K] column-major, f64 potential[M],
//   history records: i32 n, i32 pool_size, f64 dual, primal, defect, gap,
//   lower, moment_residual.
namespace {

constexpr char kMagic[8] = {'M', 'C', 'A', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("load_checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kVersion);
  put(os, ck.half_width);
  put(os, static_cast<std::int32_t>(ck.intervals));
  put(os, static_cast<std::int32_t>(ck.moment_count));
  put(os, static_cast<std::int32_t>(ck.iteration));
  const std::int32_t K = static_cast<std::int32_t>(ck.weights.size());
  const std::int32_t n2 = static_cast<std::int32_t>(ck.states.rows());
  put(os, K);
  put(os, n2);
  put(os, static_cast<std::int32_t>(ck.history.size()));
  os.write(reinterpret_cast<const char*>(ck.weights.data()),
           static_cast<std::streamsize>(sizeof(double)) * K);
  os.write(reinterpret_cast<const char*>(ck.states.data()),
           static_cast<std::streamsize>(sizeof(double)) * n2 * K);
  put(os, static_cast<std::int32_t>(ck.potential.size()));
  os.write(reinterpret_cast<const char*>(ck.potential.data()),
           static_cast<std::streamsize>(sizeof(double)) * ck.potential.size());
  for (const auto& r : ck.history) {
    put(os, static_cast<std::int32_t>(r.n));
    put(os, static_cast<std::int32_t>(r.pool_size));
    put(os, r.dual_value);
    put(os, r.primal_value);
    put(os, r.ground_defect);
    put(os, r.sdp_gap);
    put(os, r.lower_bound);
    put(os, r.moment_residual);
  }
  if (!os) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  }
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion) {
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.half_width = get<double>(is);
  ck.intervals = get<std::int32_t>(is);
  ck.moment_count = get<std::int32_t>(is);
  ck.iteration = get<std::int32_t>(is);
  const auto K = get<std::int32_t>(is);
  const auto n2 = get<std::int32_t>(is);
  const auto hist = get<std::int32_t>(is);
  if (K < 0 || n2 < 0 || hist < 0) throw std::runtime_error("load_checkpoint: corrupt header");
  ck.weights.resize(K);
  is.read(reinterpret_cast<char*>(ck.weights.data()),
          static_cast<std::streamsize>(sizeof(double)) * K);
  ck.states.resize(n2, K);
  is.read(reinterpret_cast<char*>(ck.states.data()),
          static_cast<std::streamsize>(sizeof(double)) * n2 * K);
  const auto M = get<std::int32_t>(is);
  ck.potential.resize(M);
  is.read(reinterpret_cast<char*>(ck.potential.data()),
          static_cast<std::streamsize>(sizeof(double)) * M);
  if (!is) throw std::runtime_error("load_checkpoint: truncated payload");
  ck.history.resize(static_cast<std::size_t>(hist));
  for (auto& r : ck.history) {
    r.n = get<std::int32_t>(is);
    r.pool_size = get<std::int32_t>(is);
    r.dual_value = get<double>(is);
    r.primal_value = get<double>(is);
    r.ground_defect = get<double>(is);
    r.sdp_gap = get<double>(is);
    r.lower_bound = get<double>(is);
    r.moment_residual = get<double>(is);
  }
  return ck;
}

}  // namespace mcal
