#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sar/grid.h"
#include "sar/rng.h"

namespace sar {

enum class Team : std::uint8_t { kCooperative, kAdversarial };

struct AgentSpec {
  int id = 0;
  Team team = Team::kCooperative;
};

// Cooperative agents take ids 0..n_coop-1, adversaries follow.
std::vector<AgentSpec> make_roster(int n_coop, int n_adv);

enum class Action : std::uint8_t { kLeft, kRight, kUp, kDown };
inline constexpr int kNumActions = 4;

Cell displace(Cell c, Action a);
const char* action_name(Action a);
Action action_from_name(std::string_view name);

struct EnvConfig {
  int t_max = 500;
  int window_radius = 3;
  int proximity_radius = 3;
  // Encoding capacity. 0 means "size of the roster" / "number of map targets".
  // Larger values pad the encodings so one network can serve several rosters.
  int agent_slots = 0;
  int target_slots = 0;
};

struct WorldState {
  int t = 0;
  std::vector<Cell> positions;
  std::vector<std::uint8_t> found;
  std::vector<std::uint8_t> spoofed;
  std::vector<Cell> decoys;             // meaningful only where spoofed
  std::vector<std::vector<int>> visits; // [agent][cell index]
  std::vector<int> team_visits;         // summed over cooperative agents
  Rng decoy_rng;

  int found_count() const;
  bool all_found() const;
};

struct Discovery {
  int agent = 0;
  int target = 0;
};

struct StepOutcome {
  WorldState next;
  std::vector<Discovery> events;  // cooperative discoveries
  std::vector<Discovery> spoofs;  // adversarial contacts that spoofed a target
  bool done = false;
  bool truncated = false;
};

struct TargetSignal {
  bool flag = false;
  Cell reported;
};

struct Observation {
  Cell self_pos;
  std::vector<std::uint8_t> window_blocked;  // obstacle or out of bounds
  std::vector<std::uint8_t> window_agents;   // another agent occupies the cell
  std::vector<std::uint8_t> proximity;       // per other agent, id order without self
  std::vector<TargetSignal> targets;
  int found_count = 0;
};

// Deterministic grid-world Dec-POMDP. The environment object is immutable;
// all episode state lives in WorldState values.
class Environment {
 public:
  Environment(GridMap map, std::vector<AgentSpec> roster, EnvConfig config);

  WorldState reset(std::uint64_t seed) const;
  StepOutcome step(const WorldState& state, std::span<const Action> joint) const;
  Observation observe(const WorldState& state, int agent) const;

  std::vector<double> encode(const Observation& obs) const;
  std::vector<double> encode_observation(const WorldState& state, int agent) const {
    return encode(observe(state, agent));
  }
  int observation_size() const;

  // Compact byte encoding of the state for determinism and replay checks.
  std::string state_bytes(const WorldState& state) const;

  const GridMap& map() const { return map_; }
  const std::vector<AgentSpec>& roster() const { return roster_; }
  const EnvConfig& config() const { return config_; }
  int num_agents() const { return static_cast<int>(roster_.size()); }
  int num_coop() const { return static_cast<int>(coop_ids_.size()); }
  int num_adv() const { return static_cast<int>(adv_ids_.size()); }
  int num_targets() const { return static_cast<int>(map_.targets.size()); }
  const std::vector<int>& coop_ids() const { return coop_ids_; }
  const std::vector<int>& adv_ids() const { return adv_ids_; }
  bool is_coop(int agent) const { return roster_[agent].team == Team::kCooperative; }
  int agent_slots() const { return agent_slots_; }
  int target_slots() const { return target_slots_; }

 private:
  Cell draw_decoy(Cell target, Rng& rng) const;

  GridMap map_;
  std::vector<AgentSpec> roster_;
  EnvConfig config_;
  std::vector<int> coop_ids_;
  std::vector<int> adv_ids_;
  int agent_slots_ = 0;
  int target_slots_ = 0;
};

}  // namespace sar
