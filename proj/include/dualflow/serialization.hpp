#pragma once

#include <string>

#include "dualflow/field.hpp"

namespace dualflow {

// CSV: header then one row per grid node: t, x_0..x_{m-1}, c0..c{k-1}
void write_field_csv(const Field& f, const std::string& path);

// Flat little-endian binary, 64-byte header:
//   bytes  0..7   magic "DFLOWBIN"
//   bytes  8..11  u32 version (1)
//   bytes 12..15  u32 dtype (1 = f64)
//   bytes 16..19  u32 nt
//   bytes 20..23  u32 nx
//   bytes 24..27  u32 players
//   bytes 28..31  u32 state_dim
//   bytes 32..35  u32 components per node
//   bytes 36..43  f64 horizon T
//   bytes 44..63  zero padding
// followed by nt * nx^m * components doubles, [t][node][component] order.
void write_field_binary(const Field& f, const std::string& path);
Field read_field_binary(const std::string& path);

// FNV-1a 64 of a file's bytes, hex string; used in run manifests
std::string file_checksum(const std::string& path);

}  // namespace dualflow
