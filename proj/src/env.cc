#include "sar/env.h"

#include <algorithm>

#include "sar/error.h"
#include "sar/serialize.h"

namespace sar {

std::vector<AgentSpec> make_roster(int n_coop, int n_adv) {
  std::vector<AgentSpec> roster;
  for (int i = 0; i < n_coop; ++i) roster.push_back({i, Team::kCooperative});
  for (int i = 0; i < n_adv; ++i) roster.push_back({n_coop + i, Team::kAdversarial});
  return roster;
}

Cell displace(Cell c, Action a) {
  switch (a) {
    case Action::kLeft: return {c.x - 1, c.y};
    case Action::kRight: return {c.x + 1, c.y};
    case Action::kUp: return {c.x, c.y - 1};
    case Action::kDown: return {c.x, c.y + 1};
  }
  return c;
}

const char* action_name(Action a) {
  switch (a) {
    case Action::kLeft: return "left";
    case Action::kRight: return "right";
    case Action::kUp: return "up";
    case Action::kDown: return "down";
  }
  return "?";
}

Action action_from_name(std::string_view name) {
  for (int k = 0; k < kNumActions; ++k) {
    if (name == action_name(static_cast<Action>(k))) return static_cast<Action>(k);
  }
  throw Error(Errc::kTypeMismatch, "unknown action '" + std::string(name) + "'");
}

int WorldState::found_count() const {
  return static_cast<int>(std::count(found.begin(), found.end(), std::uint8_t{1}));
}

bool WorldState::all_found() const {
  return !found.empty() && found_count() == static_cast<int>(found.size());
}

Environment::Environment(GridMap map, std::vector<AgentSpec> roster, EnvConfig config)
    : map_(std::move(map)), roster_(std::move(roster)), config_(config) {
  validate(map_);
  if (roster_.empty()) throw Error(Errc::kInvalidAgent, "empty roster");
  for (std::size_t i = 0; i < roster_.size(); ++i) {
    if (roster_[i].id != static_cast<int>(i)) throw Error(Errc::kInvalidAgent, "agent ids must be dense 0..N-1");
    (roster_[i].team == Team::kCooperative ? coop_ids_ : adv_ids_).push_back(static_cast<int>(i));
  }
  if (config_.t_max <= 0) throw Error(Errc::kOutOfRange, "t_max must be positive");
  agent_slots_ = config_.agent_slots > 0 ? config_.agent_slots : num_agents();
  target_slots_ = config_.target_slots > 0 ? config_.target_slots : num_targets();
  if (agent_slots_ < num_agents()) throw Error(Errc::kEncodingMismatch, "roster exceeds agent slots");
  if (target_slots_ < num_targets()) throw Error(Errc::kEncodingMismatch, "map targets exceed target slots");
}

WorldState Environment::reset(std::uint64_t seed) const {
  if (static_cast<int>(map_.coop_spawns.size()) < num_coop()) {
    throw Error(Errc::kInsufficientSpawns, std::to_string(num_coop()) + " cooperative agents, " +
                                               std::to_string(map_.coop_spawns.size()) + " spawns");
  }
  if (static_cast<int>(map_.adv_spawns.size()) < num_adv()) {
    throw Error(Errc::kInsufficientSpawns, std::to_string(num_adv()) + " adversarial agents, " +
                                               std::to_string(map_.adv_spawns.size()) + " spawns");
  }
  Rng rng = child_stream(seed, {tag(Stream::kReset)});
  auto pick = [&](std::vector<Cell> spawns, int k) {
    if (static_cast<int>(spawns.size()) > k) std::shuffle(spawns.begin(), spawns.end(), rng);
    spawns.resize(k);
    return spawns;
  };
  std::vector<Cell> coop = pick(map_.coop_spawns, num_coop());
  std::vector<Cell> adv = pick(map_.adv_spawns, num_adv());

  WorldState s;
  s.positions.resize(num_agents());
  for (int k = 0; k < num_coop(); ++k) s.positions[coop_ids_[k]] = coop[k];
  for (int k = 0; k < num_adv(); ++k) s.positions[adv_ids_[k]] = adv[k];
  s.found.assign(num_targets(), 0);
  s.spoofed.assign(num_targets(), 0);
  s.decoys.assign(num_targets(), Cell{});
  s.visits.assign(num_agents(), std::vector<int>(map_.cell_count(), 0));
  s.team_visits.assign(map_.cell_count(), 0);
  for (int i = 0; i < num_agents(); ++i) {
    int idx = map_.index(s.positions[i]);
    s.visits[i][idx] = 1;
    if (is_coop(i)) s.team_visits[idx] += 1;
  }
  s.decoy_rng = child_stream(seed, {tag(Stream::kDecoy)});
  return s;
}

Cell Environment::draw_decoy(Cell target, Rng& rng) const {
  std::vector<Cell> far;
  int best = -1;
  std::vector<Cell> farthest;
  for (int i = 0; i < map_.cell_count(); ++i) {
    Cell c = map_.cell_at(i);
    if (!map_.is_free(c)) continue;
    int d = manhattan(c, target);
    if (2 * d >= map_.width) far.push_back(c);
    if (d > best) {
      best = d;
      farthest.clear();
    }
    if (d == best) farthest.push_back(c);
  }
  // Maps too small for the distance rule fall back to the farthest free cells.
  const std::vector<Cell>& pool = far.empty() ? farthest : far;
  return pool[uniform_index(rng, static_cast<int>(pool.size()))];
}

StepOutcome Environment::step(const WorldState& state, std::span<const Action> joint) const {
  if (static_cast<int>(joint.size()) != num_agents()) {
    throw Error(Errc::kJointActionLength, "got " + std::to_string(joint.size()) + " actions for " +
                                              std::to_string(num_agents()) + " agents");
  }
  if (state.t >= config_.t_max || state.all_found()) {
    throw Error(Errc::kTerminalState, "step called on a finished episode");
  }
  StepOutcome out;
  out.next = state;
  WorldState& s = out.next;
  for (int i = 0; i < num_agents(); ++i) {
    Cell moved = displace(s.positions[i], joint[i]);
    if (map_.is_free(moved)) s.positions[i] = moved;
    int idx = map_.index(s.positions[i]);
    s.visits[i][idx] += 1;
    if (is_coop(i)) s.team_visits[idx] += 1;
  }
  for (int m = 0; m < num_targets(); ++m) {
    if (s.found[m]) continue;
    for (int i : coop_ids_) {
      if (s.positions[i] == map_.targets[m]) {
        s.found[m] = 1;
        out.events.push_back({i, m});
        break;
      }
    }
  }
  for (int m = 0; m < num_targets(); ++m) {
    if (s.found[m] || s.spoofed[m]) continue;
    for (int i : adv_ids_) {
      if (s.positions[i] == map_.targets[m]) {
        s.spoofed[m] = 1;
        s.decoys[m] = draw_decoy(map_.targets[m], s.decoy_rng);
        out.spoofs.push_back({i, m});
        break;
      }
    }
  }
  s.t += 1;
  bool complete = s.all_found();
  out.done = complete || s.t >= config_.t_max;
  out.truncated = !complete && s.t >= config_.t_max;
  return out;
}

Observation Environment::observe(const WorldState& state, int agent) const {
  if (agent < 0 || agent >= num_agents()) throw Error(Errc::kInvalidAgent, "agent " + std::to_string(agent));
  Observation o;
  const Cell self = state.positions[agent];
  o.self_pos = self;
  const int r = config_.window_radius;
  const int side = 2 * r + 1;
  o.window_blocked.assign(side * side, 0);
  o.window_agents.assign(side * side, 0);
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      Cell c{self.x + dx, self.y + dy};
      int k = (dy + r) * side + (dx + r);
      o.window_blocked[k] = map_.is_free(c) ? 0 : 1;
      for (int j = 0; j < num_agents(); ++j) {
        if (j != agent && state.positions[j] == c) o.window_agents[k] = 1;
      }
    }
  }
  for (int j = 0; j < num_agents(); ++j) {
    if (j == agent) continue;
    o.proximity.push_back(chebyshev(self, state.positions[j]) <= config_.proximity_radius ? 1 : 0);
  }
  const bool coop = is_coop(agent);
  for (int m = 0; m < num_targets(); ++m) {
    TargetSignal sig;
    const Cell truth = map_.targets[m];
    if (state.found[m]) {
      sig = {true, truth};
    } else if (!coop) {
      sig = {true, truth};  // adversaries know every missing asset
    } else if (state.spoofed[m]) {
      sig = {true, state.decoys[m]};
    } else if (chebyshev(self, truth) <= r) {
      sig = {true, truth};
    }
    o.targets.push_back(sig);
  }
  o.found_count = state.found_count();
  return o;
}

int Environment::observation_size() const {
  const int side = 2 * config_.window_radius + 1;
  return 2 + 2 * side * side + (agent_slots_ - 1) + 3 * target_slots_ + 1;
}

std::vector<double> Environment::encode(const Observation& o) const {
  auto norm = [](int v, int extent) { return extent > 1 ? static_cast<double>(v) / (extent - 1) : 0.0; };
  std::vector<double> v;
  v.reserve(observation_size());
  v.push_back(norm(o.self_pos.x, map_.width));
  v.push_back(norm(o.self_pos.y, map_.height));
  for (auto b : o.window_blocked) v.push_back(b);
  for (auto b : o.window_agents) v.push_back(b);
  for (int j = 0; j < agent_slots_ - 1; ++j) {
    v.push_back(j < static_cast<int>(o.proximity.size()) ? o.proximity[j] : 0.0);
  }
  for (int m = 0; m < target_slots_; ++m) {
    if (m < static_cast<int>(o.targets.size()) && o.targets[m].flag) {
      v.push_back(1.0);
      v.push_back(norm(o.targets[m].reported.x, map_.width));
      v.push_back(norm(o.targets[m].reported.y, map_.height));
    } else {
      v.insert(v.end(), {0.0, 0.0, 0.0});
    }
  }
  v.push_back(num_targets() > 0 ? static_cast<double>(o.found_count) / num_targets() : 0.0);
  return v;
}

std::string Environment::state_bytes(const WorldState& s) const {
  ByteWriter w;
  w.i64(s.t);
  for (Cell c : s.positions) {
    w.i64(c.x);
    w.i64(c.y);
  }
  for (int m = 0; m < num_targets(); ++m) {
    w.u8(s.found[m]);
    w.u8(s.spoofed[m]);
    w.i64(s.decoys[m].x);
    w.i64(s.decoys[m].y);
  }
  for (const auto& per_agent : s.visits) {
    for (int v : per_agent) w.u32(static_cast<std::uint32_t>(v));
  }
  for (int v : s.team_visits) w.u32(static_cast<std::uint32_t>(v));
  return w.take();
}

}  // namespace sar
