#include "torus/snapshot.hpp"

#include <cstdio>
#include <fstream>

#include "common/error.hpp"

namespace mfg {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

bool get_u32(std::ifstream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
  return true;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

}  // namespace

void write_snapshots(const std::string& path, const std::vector<Field>& fields) {
  auto out = open_out(path);
  for (const Field& f : fields) {
    put_u32(out, std::uint32_t(f.grid().dim()));
    put_u32(out, std::uint32_t(f.grid().points()));
    out.write(reinterpret_cast<const char*>(f.raw().data()), std::streamsize(f.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path);
}

void write_snapshot(const std::string& path, const Field& f) { write_snapshots(path, {f}); }

std::vector<Field> read_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<Field> out;
  std::uint32_t dim = 0, M = 0;
  while (get_u32(in, dim)) {
    if (!get_u32(in, M)) throw IoError("truncated snapshot header in " + path);
    const Grid g{int(dim), int(M)};
    Field f(g);
    if (!in.read(reinterpret_cast<char*>(f.raw().data()), std::streamsize(f.size() * sizeof(double))))
      throw IoError("truncated snapshot payload in " + path);
    out.push_back(std::move(f));
  }
  return out;
}

void write_field_csv(const std::string& path, const Field& f, const std::string& config_hash) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open " + path + " for writing");
  if (!config_hash.empty()) std::fprintf(fp, "# config_hash=%s\n", config_hash.c_str());
  const Grid& g = f.grid();
  if (g.dim() == 1) {
    std::fprintf(fp, "i,value\n");
    for (int i = 0; i < g.points(); ++i) std::fprintf(fp, "%d,%.17g\n", i, f[g.index(i)]);
  } else {
    std::fprintf(fp, "i,j,value\n");
    for (int i = 0; i < g.points(); ++i)
      for (int j = 0; j < g.points(); ++j) std::fprintf(fp, "%d,%d,%.17g\n", i, j, f[g.index(i, j)]);
  }
  if (std::fclose(fp) != 0) throw IoError("write failed for " + path);
}

}  // namespace mfg
