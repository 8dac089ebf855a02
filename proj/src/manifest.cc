#include "sar/manifest.h"

#include "json.hpp"

#include "sar/checkpoint.h"
#include "sar/checksum.h"
#include "sar/error.h"

#ifndef SAR_CODE_VERSION
#define SAR_CODE_VERSION "unknown"
#endif

namespace sar {

const char* code_version() { return SAR_CODE_VERSION; }

RunManifest make_manifest(std::string config_text, std::uint64_t seed, const std::vector<std::string>& map_paths) {
  RunManifest m;
  m.config_text = std::move(config_text);
  m.seed = seed;
  m.code_version = code_version();
  for (const std::string& p : map_paths) m.map_checksums.emplace_back(p, sha256_hex(read_file(p)));
  return m;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["config"] = m.config_text;
  j["seed"] = m.seed;
  j["code_version"] = m.code_version;
  j["maps"] = nlohmann::ordered_json::array();
  for (const auto& [path, sum] : m.map_checksums) j["maps"].push_back({{"path", path}, {"sha256", sum}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& [role, path] : m.outputs) j["outputs"].push_back({{"role", role}, {"path", path}});
  return j.dump(2);
}

RunManifest parse_manifest(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.config_text = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.code_version = j.at("code_version").get<std::string>();
    for (const auto& e : j.at("maps")) m.map_checksums.emplace_back(e.at("path"), e.at("sha256"));
    for (const auto& e : j.at("outputs")) m.outputs.emplace_back(e.at("role"), e.at("path"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kCorruptCheckpoint, std::string("manifest: ") + e.what());
  }
}

std::vector<std::string> stale_maps(const RunManifest& m) {
  std::vector<std::string> out;
  for (const auto& [path, sum] : m.map_checksums) {
    std::string now;
    try {
      now = sha256_hex(read_file(path));
    } catch (const Error&) {
      now.clear();
    }
    if (now != sum) out.push_back(path);
  }
  return out;
}

}  // namespace sar
