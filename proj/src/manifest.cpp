#include "dualflow/manifest.hpp"

#include <fstream>
#include <stdexcept>

#include "dualflow/serialization.hpp"

namespace dualflow {

void RunManifest::add_output(const std::string& path) {
  outputs.emplace_back(path, file_checksum(path));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config;
  j["seed"] = seed;
  j["version"] = version;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [path, checksum] : outputs) {
    outs.push_back({{"path", path}, {"checksum", checksum}});
  }
  j["outputs"] = outs;
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_json().dump(2) << "\n";
}

}  // namespace dualflow
