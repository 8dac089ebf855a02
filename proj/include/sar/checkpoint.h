#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sar/marl.h"

namespace sar {

struct TeamModel {
  std::vector<ActorNet> actors;  // one per team member, in roster order
  CentralCritic critic;
};

// SHA-256 over every parameter and optimizer moment of the team.
std::string team_checksum(const TeamModel& team);

// Everything a training run produces, with the resolved run configuration
// and manifest embedded for provenance.
struct Checkpoint {
  std::string config_text;
  std::string manifest_json;
  int n_coop = 0;
  int n_adv = 0;
  int obs_size = 0;
  int state_size = 0;
  std::optional<TeamModel> coop;
  std::optional<TeamModel> adv;
  MetaSelector selector;
};

std::string save_checkpoint(const Checkpoint& ckpt);
Checkpoint load_checkpoint(std::string_view bytes);

void write_file(const std::string& path, std::string_view bytes);
std::string read_file(const std::string& path);

}  // namespace sar
