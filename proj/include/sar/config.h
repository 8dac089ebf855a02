#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sar/trainer.h"

namespace sar {

using ConfigValue = std::variant<std::int64_t, std::uint64_t, double, bool, std::string>;

struct ConfigWarning {
  int line = 0;
  std::string message;
};

// Flat "section.key = value" document. Every documented key is present with
// its default unless overridden.
struct ConfigDocument {
  std::map<std::string, ConfigValue> values;
  std::vector<ConfigWarning> warnings;

  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;

  // Applies one override with the same validation as a file line.
  void set(const std::string& key, std::string_view value);

  friend bool operator==(const ConfigDocument& a, const ConfigDocument& b) { return a.values == b.values; }
};

ConfigDocument default_config();
ConfigDocument parse_config(std::string_view text);
std::string serialize_config(const ConfigDocument& doc);

struct KeyInfo {
  std::string key;
  std::string type;   // int, uint, real, bool, string or a|b|c choice list
  std::string value;  // default in canonical form
};
std::vector<KeyInfo> documented_keys();

// Builds the trainer configuration; the map is loaded separately.
RunConfig run_config_from(const ConfigDocument& doc, GridMap map);
EnvConfig env_config_from(const ConfigDocument& doc);
RewardStructure structure_from(const ConfigDocument& doc);
std::vector<std::string> eval_map_paths(const ConfigDocument& doc);

}  // namespace sar
