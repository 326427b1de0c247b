#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dualflow {

inline constexpr const char* kVersion = "dualflow 1.0.0";

// Reproducibility record written next to every CLI output: the command, the
// fully resolved configuration, the PRNG seed, and checksums of every file
// produced. Re-running with the same manifest reproduces the outputs
// bit-exactly.
struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<std::pair<std::string, std::string>> outputs;  // path, fnv1a-64

  void add_output(const std::string& path);
  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

}  // namespace dualflow
