#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sar/checkpoint.h"
#include "sar/env.h"
#include "sar/replay.h"
#include "sar/rewards.h"

namespace sar {

// Optional replacement for the configured reward structure (test harnesses).
struct TeamRewards {
  double coop = 0.0;  // cooperative reward before the intrinsic term
  double adv = 0.0;
};
using RewardHook = std::function<TeamRewards(const Environment&, const WorldState& before, const StepOutcome&)>;

struct RunConfig {
  GridMap map;
  int n_coop = 2;
  int n_adv = 0;
  EnvConfig env;  // t_max is overridden by rewards.t_max
  SacConfig sac;
  RewardConfig rewards;
  SelectorConfig selector;
  long total_timesteps = 100000;  // transitions summed over parallel envs
  int parallel_envs = 12;
  std::uint64_t seed = 0;
  bool randomize_targets = false;
  std::size_t replay_capacity = 100000;
  long log_interval = 1000;

  std::string config_text;    // embedded in the checkpoint
  std::string manifest_json;  // embedded in the checkpoint

  RewardHook reward_hook;
  std::optional<Checkpoint> warm_start;  // teams present here replace fresh init
  bool record_episodes = false;
};

struct EpisodeRecord {
  int env = 0;
  long episode = 0;
  int head = 0;
  std::vector<double> rewards;  // per-step cooperative reward fed to R
  double discounted_return = 0.0;
  double adv_return = 0.0;
};

struct CollectStats {
  int transitions = 0;
  int episodes_completed = 0;
};

struct UpdateStats {
  bool skipped = false;
  std::string warning;
  int coop_critic_steps = 0;
  int coop_policy_steps = 0;
  int adv_critic_steps = 0;
  int adv_policy_steps = 0;
  double loss_critic_coop = 0.0;
  double loss_policy_coop = 0.0;
  double loss_critic_adv = 0.0;
  double loss_policy_adv = 0.0;
};

enum class Phase { kCooperative, kAdversarial };
// Called with begin=true before and begin=false after each update phase.
using PhaseHook = std::function<void(Phase phase, bool begin)>;

// Resamples the target cells uniformly without replacement over free cells
// that are not spawns; the target count is preserved.
GridMap randomize_targets(const GridMap& map, Rng& rng);

// Adversarial training loop: parallel collection into twin replay buffers,
// per-episode head sampling, and alternating team updates.
class Trainer {
 public:
  explicit Trainer(RunConfig config);

  CollectStats collect_step();
  UpdateStats alternate_updates();
  // Runs to total_timesteps, appending CSV rows to the log.
  void run();

  Checkpoint checkpoint() const;
  const std::string& log_csv() const { return log_; }

  const ReplayBuffer& coop_buffer() const { return d1_; }
  const ReplayBuffer& adv_buffer() const { return d2_; }
  const TeamModel& coop_team() const { return *coop_; }
  const std::optional<TeamModel>& adv_team() const { return adv_; }
  const MetaSelector& selector() const { return selector_; }
  const std::vector<EpisodeRecord>& episodes() const { return episodes_; }
  const std::vector<UpdateStats>& update_history() const { return updates_; }
  long steps() const { return steps_; }
  const Environment& environment(int e) const { return slots_[e].env; }
  const WorldState& env_state(int e) const { return slots_[e].state; }
  int env_head(int e) const { return slots_[e].head; }
  int obs_size() const { return obs_size_; }
  int state_size() const { return state_size_; }

  void set_phase_hook(PhaseHook hook) { phase_hook_ = std::move(hook); }

 private:
  struct EnvSlot {
    Environment env;
    WorldState state;
    int head = 0;
    int t_ep = 0;
    double discounted = 0.0;
    double adv_return = 0.0;
    long episode = 0;
    std::vector<double> rewards;
    Rng action_rng;
    Rng head_rng;
    Rng target_rng;
  };

  GridMap training_map() const;
  void start_episode(int e);
  void step_env(int e, CollectStats& stats);
  TeamBatch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx, bool coop) const;
  void append_log_row();

  RunConfig config_;
  std::vector<EnvSlot> slots_;
  std::optional<TeamModel> coop_;
  std::optional<TeamModel> adv_;
  MetaSelector selector_;
  ReplayBuffer d1_;
  ReplayBuffer d2_;
  Rng replay_rng_;
  int obs_size_ = 0;
  int state_size_ = 0;
  long steps_ = 0;
  long t_update_ = 0;
  long episodes_completed_ = 0;
  long next_log_ = 0;
  std::vector<EpisodeRecord> episodes_;
  std::vector<EpisodeRecord> window_;  // episodes since the last log row
  std::vector<UpdateStats> updates_;
  UpdateStats last_update_;
  double last_mean_coop_ = 0.0;
  double last_mean_adv_ = 0.0;
  std::string log_;
  PhaseHook phase_hook_;
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::string log_csv;
};

TrainingResult run_training(const RunConfig& config);

inline constexpr const char* kTrainingLogHeader =
    "step,episodes,head,Pi_min,Pi_cov,Pi_bur,loss_critic_coop,loss_policy_coop,loss_critic_adv,loss_policy_adv,"
    "mean_return_coop,mean_return_adv,coverage_frac";

}  // namespace sar
