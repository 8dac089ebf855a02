#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sar {

const char* code_version();

// Provenance record embedded in every checkpoint and summary.
struct RunManifest {
  std::string config_text;  // canonical resolved configuration
  std::uint64_t seed = 0;
  std::string code_version;
  std::vector<std::pair<std::string, std::string>> map_checksums;  // path -> SHA-256 hex
  std::vector<std::pair<std::string, std::string>> outputs;        // role -> path

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

// Hashes each map file as it is on disk.
RunManifest make_manifest(std::string config_text, std::uint64_t seed, const std::vector<std::string>& map_paths);

std::string manifest_json(const RunManifest& m);
RunManifest parse_manifest(std::string_view json);

// Paths whose current on-disk checksum differs from the recorded one.
std::vector<std::string> stale_maps(const RunManifest& m);

}  // namespace sar
