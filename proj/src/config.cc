#include "sar/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sar/error.h"

namespace sar {

namespace {

enum class Kind { kInt, kUInt, kReal, kBool, kString, kChoice };

struct Schema {
  const char* key;
  Kind kind;
  const char* def;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  const char* choices = "";  // '|' separated for kChoice
};

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<Schema>& schema() {
  static const std::vector<Schema> s = {
      {"eval.cap", Kind::kInt, "18000", 1, 1e9},
      {"eval.case", Kind::kChoice, "I", 0, 0, false, "I|II|III|IV"},
      {"eval.greedy", Kind::kBool, "true"},
      {"eval.instantiations", Kind::kInt, "12", 1, 1e6},
      {"eval.seed", Kind::kUInt, "1"},
      {"rewards.K", Kind::kReal, "1", 0, 1, true},
      {"rewards.beta0", Kind::kReal, "0.10000000000000001", 0, kInf},
      {"rewards.complete", Kind::kReal, "10"},
      {"rewards.fail", Kind::kReal, "-10"},
      {"rewards.gamma", Kind::kReal, "0.98999999999999999", 0, 1},
      {"rewards.k", Kind::kReal, "0", 0, kInf},
      {"rewards.locate", Kind::kReal, "10"},
      {"rewards.switch_frac", Kind::kReal, "0.40000000000000002", 0, 1},
      {"rewards.t_max", Kind::kInt, "500", 1, 1e9},
      {"rewards.time_bonus_adv", Kind::kReal, "0.10000000000000001"},
      {"rewards.time_penalty_coop", Kind::kReal, "-0.10000000000000001"},
      {"rewards.v_thresh", Kind::kInt, "1", 0, 1e9},
      {"run.adv_agents", Kind::kInt, "0", 0, 64},
      {"run.agent_slots", Kind::kInt, "0", 0, 64},
      {"run.coop_agents", Kind::kInt, "2", 1, 64},
      {"run.eval_maps", Kind::kString, "maps/eval10_a.txt,maps/eval10_b.txt"},
      {"run.log_interval", Kind::kInt, "1000", 0, 1e15},
      {"run.map", Kind::kString, "maps/train10.txt"},
      {"run.parallel_envs", Kind::kInt, "12", 1, 4096},
      {"run.randomize_targets", Kind::kBool, "false"},
      {"run.replay_capacity", Kind::kInt, "100000", 1, 1e9},
      {"run.seed", Kind::kUInt, "0"},
      {"run.structure", Kind::kChoice, "modified", 0, 0, false, "baseline|modified"},
      {"run.target_slots", Kind::kInt, "2", 0, 64},
      {"run.total_timesteps", Kind::kInt, "200000", 0, 1e15},
      {"sac.batch_size", Kind::kInt, "256", 1, 1e7},
      {"sac.entropy", Kind::kReal, "0.01", 0, kInf},
      {"sac.grad_clip", Kind::kReal, "10", 0, kInf},
      {"sac.hidden", Kind::kInt, "64", 1, 4096},
      {"sac.iter_adv", Kind::kInt, "4", 0, 1e6},
      {"sac.iter_coop", Kind::kInt, "4", 0, 1e6},
      {"sac.lr_actor", Kind::kReal, "0.00029999999999999997", 0, kInf, true},
      {"sac.lr_critic", Kind::kReal, "0.00029999999999999997", 0, kInf, true},
      {"sac.steps_per_update", Kind::kInt, "100", 1, 1e9},
      {"sac.tau", Kind::kReal, "0.0050000000000000001", 0, 1},
      {"selector.lr", Kind::kReal, "0.050000000000000003", 0, kInf},
      {"selector.temperature", Kind::kReal, "1", 0, kInf, true},
  };
  return s;
}

const Schema* find_key(std::string_view key) {
  for (const Schema& s : schema()) {
    if (key == s.key) return &s;
  }
  return nullptr;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string where(int line) { return line > 0 ? "line " + std::to_string(line) + ": " : ""; }

std::string kind_name(const Schema& s) {
  switch (s.kind) {
    case Kind::kInt: return "int";
    case Kind::kUInt: return "uint";
    case Kind::kReal: return "real";
    case Kind::kBool: return "bool";
    case Kind::kString: return "string";
    case Kind::kChoice: return s.choices;
  }
  return "?";
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  if (text.empty()) return false;
  const char* b = text.data();
  const char* e = b + text.size();
  if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (*b == '-' || *b == '+') return false;
  }
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

void check_range(const Schema& s, double v, int line) {
  const bool low_ok = s.lo_open ? v > s.lo : v >= s.lo;
  if (!std::isfinite(v) || !low_ok || v > s.hi) {
    std::ostringstream msg;
    msg << where(line) << s.key << " = " << v << " is outside " << (s.lo_open ? "(" : "[") << s.lo << ", " << s.hi
        << "]";
    throw Error(Errc::kOutOfRange, msg.str());
  }
}

ConfigValue parse_value(const Schema& s, const std::string& raw, int line) {
  auto mismatch = [&] {
    return Error(Errc::kTypeMismatch,
                 where(line) + s.key + " expects " + kind_name(s) + ", got '" + raw + "'");
  };
  switch (s.kind) {
    case Kind::kInt: {
      std::int64_t v = 0;
      if (!parse_number(raw, v)) throw mismatch();
      check_range(s, static_cast<double>(v), line);
      return v;
    }
    case Kind::kUInt: {
      std::uint64_t v = 0;
      if (!parse_number(raw, v)) throw mismatch();
      return v;
    }
    case Kind::kReal: {
      double v = 0;
      if (!parse_number(raw, v)) throw mismatch();
      check_range(s, v, line);
      return v;
    }
    case Kind::kBool:
      if (raw == "true") return true;
      if (raw == "false") return false;
      throw mismatch();
    case Kind::kString:
      return raw;
    case Kind::kChoice: {
      std::string_view choices = s.choices;
      while (!choices.empty()) {
        const auto bar = choices.find('|');
        if (choices.substr(0, bar) == raw) return raw;
        if (bar == std::string_view::npos) break;
        choices.remove_prefix(bar + 1);
      }
      throw mismatch();
    }
  }
  throw mismatch();
}

std::string canonical(const ConfigValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[40];
          std::snprintf(buf, sizeof buf, "%.17g", x);
          return buf;
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else {
          return std::to_string(x);
        }
      },
      v);
}

template <typename T>
const T& get(const ConfigDocument& doc, const std::string& key) {
  const auto it = doc.values.find(key);
  if (it == doc.values.end()) throw Error(Errc::kUnknownKey, key);
  const T* p = std::get_if<T>(&it->second);
  if (!p) throw Error(Errc::kTypeMismatch, key + " has a different type");
  return *p;
}

void assign(ConfigDocument& doc, const std::string& key, std::string_view value, int line) {
  const Schema* s = find_key(key);
  if (!s) throw Error(Errc::kUnknownKey, where(line) + "unknown key '" + key + "'");
  doc.values[key] = parse_value(*s, trim(value), line);
}

}  // namespace

std::int64_t ConfigDocument::integer(const std::string& key) const { return get<std::int64_t>(*this, key); }
std::uint64_t ConfigDocument::unsigned_integer(const std::string& key) const { return get<std::uint64_t>(*this, key); }
double ConfigDocument::real(const std::string& key) const { return get<double>(*this, key); }
bool ConfigDocument::boolean(const std::string& key) const { return get<bool>(*this, key); }
const std::string& ConfigDocument::text(const std::string& key) const { return get<std::string>(*this, key); }

void ConfigDocument::set(const std::string& key, std::string_view value) { assign(*this, key, value, 0); }

ConfigDocument default_config() {
  ConfigDocument doc;
  for (const Schema& s : schema()) doc.values[s.key] = parse_value(s, s.def, 0);
  return doc;
}

ConfigDocument parse_config(std::string_view text) {
  ConfigDocument doc = default_config();
  std::map<std::string, int> seen;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::kTypeMismatch, where(line) + "expected 'key = value', got '" + body + "'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    assign(doc, key, std::string_view(body).substr(eq + 1), line);
    if (const auto it = seen.find(key); it != seen.end()) {
      doc.warnings.push_back({line, "duplicate key '" + key + "' (first on line " + std::to_string(it->second) +
                                        "); the last value wins"});
    }
    seen[key] = line;
  }
  return doc;
}

std::string serialize_config(const ConfigDocument& doc) {
  std::string out;
  for (const auto& [key, value] : doc.values) out += key + " = " + canonical(value) + "\n";
  return out;
}

std::vector<KeyInfo> documented_keys() {
  std::vector<KeyInfo> out;
  for (const Schema& s : schema()) out.push_back({s.key, kind_name(s), canonical(parse_value(s, s.def, 0))});
  return out;
}

RewardStructure structure_from(const ConfigDocument& doc) {
  return doc.text("run.structure") == "baseline" ? RewardStructure::kBaseline : RewardStructure::kModified;
}

EnvConfig env_config_from(const ConfigDocument& doc) {
  EnvConfig e;
  e.t_max = static_cast<int>(doc.integer("rewards.t_max"));
  e.agent_slots = static_cast<int>(doc.integer("run.agent_slots"));
  e.target_slots = static_cast<int>(doc.integer("run.target_slots"));
  return e;
}

RunConfig run_config_from(const ConfigDocument& doc, GridMap map) {
  RunConfig rc;
  rc.map = std::move(map);
  rc.n_coop = static_cast<int>(doc.integer("run.coop_agents"));
  rc.n_adv = static_cast<int>(doc.integer("run.adv_agents"));
  rc.env = env_config_from(doc);
  rc.total_timesteps = doc.integer("run.total_timesteps");
  rc.parallel_envs = static_cast<int>(doc.integer("run.parallel_envs"));
  rc.seed = doc.unsigned_integer("run.seed");
  rc.randomize_targets = doc.boolean("run.randomize_targets");
  rc.replay_capacity = static_cast<std::size_t>(doc.integer("run.replay_capacity"));
  rc.log_interval = doc.integer("run.log_interval");

  RewardConfig& r = rc.rewards;
  r.K = doc.real("rewards.K");
  r.v_thresh = static_cast<int>(doc.integer("rewards.v_thresh"));
  r.beta0 = doc.real("rewards.beta0");
  r.switch_frac = doc.real("rewards.switch_frac");
  r.k = doc.real("rewards.k");
  r.gamma = doc.real("rewards.gamma");
  r.t_max = static_cast<int>(doc.integer("rewards.t_max"));
  r.structure = structure_from(doc);
  r.table.time_penalty_coop = doc.real("rewards.time_penalty_coop");
  r.table.time_bonus_adv = doc.real("rewards.time_bonus_adv");
  r.table.locate = doc.real("rewards.locate");
  r.table.complete = doc.real("rewards.complete");
  r.table.fail = doc.real("rewards.fail");

  SacConfig& s = rc.sac;
  s.entropy = doc.real("sac.entropy");
  s.gamma = r.gamma;
  s.tau = doc.real("sac.tau");
  s.lr_actor = doc.real("sac.lr_actor");
  s.lr_critic = doc.real("sac.lr_critic");
  s.batch_size = static_cast<int>(doc.integer("sac.batch_size"));
  s.steps_per_update = static_cast<int>(doc.integer("sac.steps_per_update"));
  s.iter_coop = static_cast<int>(doc.integer("sac.iter_coop"));
  s.iter_adv = static_cast<int>(doc.integer("sac.iter_adv"));
  s.hidden = static_cast<int>(doc.integer("sac.hidden"));
  s.grad_clip = doc.real("sac.grad_clip");

  rc.selector.learning_rate = doc.real("selector.lr");
  rc.selector.temperature = doc.real("selector.temperature");
  rc.config_text = serialize_config(doc);
  return rc;
}

std::vector<std::string> eval_map_paths(const ConfigDocument& doc) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : doc.text("run.eval_maps") + ",") {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  return out;
}

}  // namespace sar
