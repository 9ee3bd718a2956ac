#include "wavemap/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "wavemap/errors.hpp"

namespace wavemap {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ConfigError("snapshot: truncated header");
  return v;
}

std::size_t volume(int n, int N) {
  std::size_t p = 1;
  for (int a = 0; a < n; ++a) p *= static_cast<std::size_t>(N);
  return p;
}

}  // namespace

void write_snapshot(const std::string& path, const Snapshot& snap) {
  const std::size_t P = volume(snap.n, snap.N);
  for (const auto& a : snap.arrays)
    if (a.size() != P) throw ShapeError("snapshot: array size does not match header");
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("snapshot: cannot open " + tmp);
    os.write("GWF1", 4);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(snap.n));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(snap.N));
    put<double>(os, snap.L);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(snap.arrays.size()));
    for (const auto& a : snap.arrays) os.write(reinterpret_cast<const char*>(a.data()), P * sizeof(double));
    if (!os) throw ConfigError("snapshot: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("snapshot: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "GWF1", 4) != 0) throw ConfigError("snapshot: bad magic in " + path);
  Snapshot s;
  s.n = static_cast<int>(take<std::uint32_t>(is));
  s.N = static_cast<int>(take<std::uint32_t>(is));
  s.L = take<double>(is);
  auto count = take<std::uint32_t>(is);
  if (s.n < 1 || s.n > 6 || !is_power_of_two(s.N)) throw ConfigError("snapshot: invalid grid header");
  const std::size_t P = volume(s.n, s.N);
  s.arrays.assign(count, RealArray(P));
  for (auto& a : s.arrays) {
    is.read(reinterpret_cast<char*>(a.data()), P * sizeof(double));
    if (!is) throw ConfigError("snapshot: truncated payload in " + path);
  }
  return s;
}

Snapshot snapshot_of(const std::vector<LieAlgebraField>& fields) {
  if (fields.empty()) throw ShapeError("snapshot: no fields");
  Snapshot s;
  s.n = fields.front().grid().n;
  s.N = fields.front().grid().N;
  s.L = fields.front().grid().L;
  for (const auto& f : fields) {
    require_same_grid(fields.front(), f, "snapshot");
    for (int i = 0; i < 3; ++i) s.arrays.push_back(f.component(i));
  }
  return s;
}

std::vector<LieAlgebraField> fields_of(const Snapshot& snap) {
  if (snap.arrays.size() % 3 != 0) throw ShapeError("snapshot: array count is not a multiple of 3");
  Grid g;
  g.n = snap.n;
  g.N = snap.N;
  g.L = snap.L;
  std::vector<LieAlgebraField> out;
  for (std::size_t f = 0; f < snap.arrays.size(); f += 3)
    out.push_back(LieAlgebraField::from_physical(g, {snap.arrays[f], snap.arrays[f + 1], snap.arrays[f + 2]}));
  return out;
}

}  // namespace wavemap
