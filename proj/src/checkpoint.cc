#include "sar/checkpoint.h"

#include <fstream>
#include <sstream>

#include "sar/checksum.h"
#include "sar/error.h"
#include "sar/serialize.h"

namespace sar {

namespace {

constexpr std::string_view kCheckpointMagic = "SARCKPT1";

void write_team(ByteWriter& w, const TeamModel& team) {
  w.u64(team.actors.size());
  for (const ActorNet& a : team.actors) {
    write_mlp(w, a.net);
    a.optimizer.write(w);
  }
  w.i64(team.critic.state_size);
  w.i64(team.critic.agent_slots);
  w.i64(team.critic.num_heads);
  write_mlp(w, team.critic.online);
  write_mlp(w, team.critic.target);
  team.critic.optimizer.write(w);
}

TeamModel read_team(ByteReader& r) {
  TeamModel team;
  const std::uint64_t n = r.u64();
  if (n > 1024) throw Error(Errc::kCorruptCheckpoint, "implausible actor count");
  for (std::uint64_t k = 0; k < n; ++k) {
    ActorNet a;
    a.net = read_mlp(r);
    a.optimizer = Optimizer::read(r);
    team.actors.push_back(std::move(a));
  }
  team.critic.state_size = static_cast<int>(r.i64());
  team.critic.agent_slots = static_cast<int>(r.i64());
  team.critic.num_heads = static_cast<int>(r.i64());
  team.critic.online = read_mlp(r);
  team.critic.target = read_mlp(r);
  team.critic.optimizer = Optimizer::read(r);
  if (team.critic.online.input_size() != team.critic.input_size() ||
      !team.critic.online.same_architecture(team.critic.target)) {
    throw Error(Errc::kCorruptCheckpoint, "critic shape");
  }
  return team;
}

}  // namespace

std::string team_checksum(const TeamModel& team) {
  ByteWriter w;
  write_team(w, team);
  return sha256_hex(w.bytes());
}

std::string save_checkpoint(const Checkpoint& ckpt) {
  ByteWriter w;
  w.u32(1);  // container version
  w.str(ckpt.config_text);
  w.str(ckpt.manifest_json);
  w.i64(ckpt.n_coop);
  w.i64(ckpt.n_adv);
  w.i64(ckpt.obs_size);
  w.i64(ckpt.state_size);
  w.u8(ckpt.coop ? 1 : 0);
  if (ckpt.coop) write_team(w, *ckpt.coop);
  w.u8(ckpt.adv ? 1 : 0);
  if (ckpt.adv) write_team(w, *ckpt.adv);
  ckpt.selector.write(w);
  return seal(kCheckpointMagic, w.bytes());
}

Checkpoint load_checkpoint(std::string_view bytes) {
  ByteReader r(unseal(kCheckpointMagic, bytes));
  if (r.u32() != 1) throw Error(Errc::kCorruptCheckpoint, "unsupported container version");
  Checkpoint c;
  c.config_text = r.str();
  c.manifest_json = r.str();
  c.n_coop = static_cast<int>(r.i64());
  c.n_adv = static_cast<int>(r.i64());
  c.obs_size = static_cast<int>(r.i64());
  c.state_size = static_cast<int>(r.i64());
  if (r.u8()) c.coop = read_team(r);
  if (r.u8()) c.adv = read_team(r);
  c.selector = MetaSelector::read(r);
  if (!r.done()) throw Error(Errc::kCorruptCheckpoint, "trailing bytes");
  return c;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, "write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sar
