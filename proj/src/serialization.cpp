#include "dualflow/serialization.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace dualflow {

namespace {

constexpr char kMagic[8] = {'D', 'F', 'L', 'O', 'W', 'B', 'I', 'N'};

void put_u32(char* dst, uint32_t v) { std::memcpy(dst, &v, 4); }
uint32_t get_u32(const char* src) {
  uint32_t v;
  std::memcpy(&v, src, 4);
  return v;
}

}  // namespace

void write_field_csv(const Field& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const auto& g = f.grid();
  out << "t";
  for (int d = 0; d < g.space_dim(); ++d) out << ",x" << d;
  for (int c = 0; c < f.comps(); ++c) out << ",c" << c;
  out << "\n";
  char buf[32];
  for (int t = 0; t < g.nt(); ++t) {
    for (int64_t s = 0; s < g.space_points(); ++s) {
      std::snprintf(buf, sizeof(buf), "%.17g", g.time_at(t));
      out << buf;
      for (int d = 0; d < g.space_dim(); ++d) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.coordinate(s, d));
        out << ',' << buf;
      }
      for (int c = 0; c < f.comps(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", f.at(t, s, c));
        out << ',' << buf;
      }
      out << "\n";
    }
  }
}

void write_field_binary(const Field& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  char header[64] = {};
  std::memcpy(header, kMagic, 8);
  put_u32(header + 8, 1);
  put_u32(header + 12, 1);
  put_u32(header + 16, static_cast<uint32_t>(f.grid().nt()));
  put_u32(header + 20, static_cast<uint32_t>(f.grid().nx()));
  put_u32(header + 24, static_cast<uint32_t>(f.grid().config().players()));
  put_u32(header + 28, static_cast<uint32_t>(f.grid().config().state_dim()));
  put_u32(header + 32, static_cast<uint32_t>(f.comps()));
  const double T = f.grid().horizon();
  std::memcpy(header + 36, &T, 8);
  out.write(header, 64);
  out.write(reinterpret_cast<const char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
}

Field read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char header[64];
  in.read(header, 64);
  if (!in || std::memcmp(header, kMagic, 8) != 0) {
    throw std::runtime_error("bad field binary header in " + path);
  }
  if (get_u32(header + 8) != 1 || get_u32(header + 12) != 1) {
    throw std::runtime_error("unsupported field binary version/dtype");
  }
  const int nt = static_cast<int>(get_u32(header + 16));
  const int nx = static_cast<int>(get_u32(header + 20));
  const int players = static_cast<int>(get_u32(header + 24));
  const int state_dim = static_cast<int>(get_u32(header + 28));
  const int comps = static_cast<int>(get_u32(header + 32));
  double T;
  std::memcpy(&T, header + 36, 8);
  SpaceTimeGrid grid(PlayerConfig(players, state_dim), T, nt, nx);
  Field f(grid, comps);
  in.read(reinterpret_cast<char*>(f.data().data()),
          static_cast<std::streamsize>(f.data().size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field binary " + path);
  return f;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace dualflow
