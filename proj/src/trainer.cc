#include "sar/trainer.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "sar/error.h"

namespace sar {

namespace {

std::vector<float> to_float(const std::vector<double>& v) { return {v.begin(), v.end()}; }

OptimizerConfig optimizer_for(double lr, const SacConfig& sac) {
  OptimizerConfig o;
  o.learning_rate = lr;
  o.clip_norm = sac.grad_clip;
  return o;
}

TeamModel make_team(int members, int obs_size, int state_size, int agent_slots, int num_heads, const SacConfig& sac,
                    Rng& rng) {
  TeamModel team;
  for (int k = 0; k < members; ++k) {
    team.actors.emplace_back(obs_size, num_heads, sac.hidden, optimizer_for(sac.lr_actor, sac), rng);
  }
  team.critic = CentralCritic(state_size, agent_slots, num_heads, sac.hidden, optimizer_for(sac.lr_critic, sac), rng);
  return team;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double coverage_fraction(const Environment& env, const WorldState& s) {
  int covered = 0;
  for (int v : s.team_visits) covered += v > 0 ? 1 : 0;
  return static_cast<double>(covered) / env.map().cell_count();
}

}  // namespace

GridMap randomize_targets(const GridMap& map, Rng& rng) {
  std::vector<Cell> eligible;
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const Cell c{x, y};
      if (!map.is_free(c)) continue;
      bool spawn = false;
      for (const Cell& s : map.coop_spawns) spawn = spawn || s == c;
      for (const Cell& s : map.adv_spawns) spawn = spawn || s == c;
      if (!spawn) eligible.push_back(c);
    }
  }
  const std::size_t m = map.targets.size();
  if (eligible.size() < m) {
    throw Error(Errc::kInsufficientEligibleCells, std::to_string(eligible.size()) + " eligible cells for " +
                                                      std::to_string(m) + " targets");
  }
  // Partial Fisher-Yates: the first m slots become the new targets.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + uniform_index(rng, eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  GridMap out = map;
  out.targets.assign(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(m));
  return out;
}

Trainer::Trainer(RunConfig config)
    : config_(std::move(config)),
      selector_(kNumHeads, config_.selector),
      d1_(config_.replay_capacity),
      d2_(config_.replay_capacity),
      replay_rng_(child_stream(config_.seed, {tag(Stream::kReplay)})) {
  if (config_.n_coop < 1) throw Error(Errc::kOutOfRange, "at least one cooperative agent is required");
  if (config_.n_adv < 0) throw Error(Errc::kOutOfRange, "negative adversary count");
  if (config_.parallel_envs < 1) throw Error(Errc::kOutOfRange, "parallel env count must be at least 1");
  if (config_.total_timesteps < 0) throw Error(Errc::kOutOfRange, "negative total timesteps");
  if (config_.sac.steps_per_update < 1) throw Error(Errc::kOutOfRange, "steps_per_update must be positive");
  if (config_.sac.batch_size < 1) throw Error(Errc::kOutOfRange, "batch size must be positive");
  config_.env.t_max = config_.rewards.t_max;

  const GridMap map = training_map();
  const auto roster = make_roster(config_.n_coop, config_.n_adv);
  for (int e = 0; e < config_.parallel_envs; ++e) {
    const auto ue = static_cast<std::uint64_t>(e);
    slots_.push_back(EnvSlot{Environment(map, roster, config_.env), WorldState{}, 0, 0, 0.0, 0.0, 0, {},
                             child_stream(config_.seed, {tag(Stream::kAction), ue}),
                             child_stream(config_.seed, {tag(Stream::kHead), ue}),
                             child_stream(config_.seed, {tag(Stream::kTargets), ue})});
  }
  const Environment& env0 = slots_.front().env;
  obs_size_ = env0.observation_size();
  state_size_ = global_state_size(env0);

  Rng init = child_stream(config_.seed, {tag(Stream::kInit)});
  coop_ = make_team(config_.n_coop, obs_size_, state_size_, env0.agent_slots(), kNumHeads, config_.sac, init);
  if (config_.n_adv > 0) {
    adv_ = make_team(config_.n_adv, obs_size_, state_size_, env0.agent_slots(), 1, config_.sac, init);
  }
  if (config_.warm_start) {
    const Checkpoint& w = *config_.warm_start;
    if (w.obs_size != obs_size_ || w.state_size != state_size_) {
      throw Error(Errc::kArchitectureMismatch, "warm-start checkpoint encodings differ from this run");
    }
    if (w.coop) {
      if (static_cast<int>(w.coop->actors.size()) < config_.n_coop) {
        throw Error(Errc::kArchitectureMismatch, "warm-start checkpoint has too few cooperative actors");
      }
      coop_->critic = w.coop->critic;
      for (int k = 0; k < config_.n_coop; ++k) coop_->actors[k] = w.coop->actors[k];
      selector_ = w.selector;
    }
    if (w.adv && adv_) {
      if (w.adv->actors.size() < adv_->actors.size()) {
        throw Error(Errc::kArchitectureMismatch, "warm-start checkpoint has too few adversarial actors");
      }
      adv_->critic = w.adv->critic;
      for (std::size_t k = 0; k < adv_->actors.size(); ++k) adv_->actors[k] = w.adv->actors[k];
    }
  }

  for (int e = 0; e < config_.parallel_envs; ++e) start_episode(e);
  log_ = std::string(kTrainingLogHeader) + "\n";
  next_log_ = config_.log_interval;
}

GridMap Trainer::training_map() const {
  GridMap map = config_.map;
  // Coverage-driven training does not depend on target locations.
  if (config_.rewards.structure == RewardStructure::kModified) map.targets.clear();
  return map;
}

void Trainer::start_episode(int e) {
  EnvSlot& slot = slots_[e];
  if (config_.randomize_targets && config_.rewards.structure == RewardStructure::kBaseline) {
    slot.env = Environment(randomize_targets(training_map(), slot.target_rng), slot.env.roster(), config_.env);
  }
  const std::uint64_t seed =
      derive_seed(config_.seed, {tag(Stream::kEpisode), static_cast<std::uint64_t>(e),
                                 static_cast<std::uint64_t>(slot.episode)});
  slot.state = slot.env.reset(seed);
  slot.head = selector_.sample(slot.head_rng);
  slot.t_ep = 0;
  slot.discounted = 0.0;
  slot.adv_return = 0.0;
  slot.rewards.clear();
}

void Trainer::step_env(int e, CollectStats& stats) {
  EnvSlot& slot = slots_[e];
  const Environment& env = slot.env;
  const int n = env.num_agents();

  auto tr = std::make_shared<Transition>();
  tr->state = to_float(global_state_features(env, slot.state));
  tr->obs.resize(n);
  tr->actions.resize(n);
  std::vector<Action> joint(n);
  std::vector<std::vector<double>> obs(n);
  for (int i = 0; i < n; ++i) obs[i] = env.encode_observation(slot.state, i);
  for (int k = 0; k < env.num_coop(); ++k) {
    const int i = env.coop_ids()[k];
    joint[i] = select_action(coop_->actors[k], obs[i], slot.head, slot.action_rng).action;
  }
  for (int k = 0; k < env.num_adv(); ++k) {
    const int i = env.adv_ids()[k];
    joint[i] = select_action(adv_->actors[k], obs[i], 0, slot.action_rng).action;
  }
  for (int i = 0; i < n; ++i) {
    tr->obs[i] = to_float(obs[i]);
    tr->actions[i] = static_cast<int>(joint[i]);
  }

  StepOutcome out = env.step(slot.state, joint);
  RewardBreakdown rb = evaluate_step(env, slot.state, out, config_.rewards);
  double base_coop = rb.base_coop;
  double r_adv = rb.adv;
  if (config_.reward_hook) {
    const TeamRewards hooked = config_.reward_hook(env, slot.state, out);
    base_coop = hooked.coop;
    r_adv = hooked.adv;
  }

  tr->next_state = to_float(global_state_features(env, out.next));
  tr->next_obs.resize(n);
  for (int i = 0; i < n; ++i) tr->next_obs[i] = to_float(env.encode_observation(out.next, i));
  tr->done = out.done && !out.truncated;
  tr->head = slot.head;
  tr->intr = rb.intr;
  tr->beta = rb.beta;

  const double r_coop = base_coop + rb.beta * rb.intrinsic_sum(slot.head);
  d1_.push(tr, r_coop);
  d2_.push(std::move(tr), r_adv);
  ++stats.transitions;

  slot.discounted += std::pow(config_.rewards.gamma, slot.t_ep) * r_coop;
  slot.adv_return += r_adv;
  slot.rewards.push_back(r_coop);
  ++slot.t_ep;
  slot.state = std::move(out.next);

  if (out.done) {
    selector_.update(slot.discounted, slot.head);
    EpisodeRecord rec{e, slot.episode, slot.head, {}, slot.discounted, slot.adv_return};
    rec.rewards = std::move(slot.rewards);
    window_.push_back(rec);
    if (config_.record_episodes) episodes_.push_back(std::move(rec));
    ++slot.episode;
    ++episodes_completed_;
    ++stats.episodes_completed;
    start_episode(e);
  }
}

CollectStats Trainer::collect_step() {
  CollectStats stats;
  const long remaining = config_.total_timesteps > 0 ? config_.total_timesteps - steps_ : config_.parallel_envs;
  const int active = static_cast<int>(std::min<long>(config_.parallel_envs, std::max<long>(remaining, 0)));
  for (int e = 0; e < active; ++e) step_env(e, stats);
  steps_ += stats.transitions;
  return stats;
}

TeamBatch Trainer::make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx, bool coop) const {
  const Environment& env = slots_.front().env;
  const std::vector<int>& ids = coop ? env.coop_ids() : env.adv_ids();
  const int B = static_cast<int>(idx.size());
  const int K = static_cast<int>(ids.size());
  const int H = coop ? kNumHeads : 1;

  TeamBatch b;
  b.states.resize(state_size_, B);
  b.next_states.resize(state_size_, B);
  b.obs.assign(K, Eigen::MatrixXd(obs_size_, B));
  b.next_obs.assign(K, Eigen::MatrixXd(obs_size_, B));
  b.actions.assign(K, std::vector<int>(B));
  b.slots = ids;
  b.rewards.resize(H, B);
  b.done.resize(B);
  for (int c = 0; c < B; ++c) {
    const ReplayBuffer::Entry& entry = buffer.at(idx[c]);
    const Transition& t = *entry.transition;
    for (int j = 0; j < state_size_; ++j) {
      b.states(j, c) = t.state[j];
      b.next_states(j, c) = t.next_state[j];
    }
    for (int k = 0; k < K; ++k) {
      const int i = ids[k];
      for (int j = 0; j < obs_size_; ++j) {
        b.obs[k](j, c) = t.obs[i][j];
        b.next_obs[k](j, c) = t.next_obs[i][j];
      }
      b.actions[k][c] = t.actions[i];
    }
    if (coop) {
      // Relabel the stored reward with each head's frozen intrinsic term.
      const double own = t.intrinsic_sum(t.head);
      for (int h = 0; h < H; ++h) b.rewards(h, c) = entry.reward + t.beta * (t.intrinsic_sum(h) - own);
    } else {
      b.rewards(0, c) = entry.reward;
    }
    b.done(c) = t.done ? 1.0 : 0.0;
  }
  return b;
}

UpdateStats Trainer::alternate_updates() {
  UpdateStats st;
  t_update_ = 0;
  const auto batch = static_cast<std::size_t>(config_.sac.batch_size);
  if (d1_.size() < batch || d2_.size() < batch) {
    st.skipped = true;
    st.warning = "replay buffers hold " + std::to_string(d1_.size()) + " transitions, fewer than batch size " +
                 std::to_string(batch) + "; update skipped";
    updates_.push_back(st);
    return st;
  }

  const std::vector<int> coop_heads{0, 1, 2};
  const std::vector<int> adv_heads{0};
  auto check = [&](double loss, const char* what) {
    if (!std::isfinite(loss)) {
      throw Error(Errc::kNonFiniteLoss, std::string(what) + " loss is not finite at step " + std::to_string(steps_));
    }
  };

  if (phase_hook_) phase_hook_(Phase::kCooperative, true);
  for (int j = 0; j < config_.sac.iter_coop; ++j) {
    const TeamBatch b = make_batch(d1_, d1_.sample_indices(batch, replay_rng_), true);
    st.loss_critic_coop = critic_update(coop_->critic, b, coop_->actors, coop_heads, config_.sac);
    check(st.loss_critic_coop, "cooperative critic");
    ++st.coop_critic_steps;
    st.loss_policy_coop = policy_update(coop_->actors, coop_->critic, b, coop_heads, config_.sac);
    check(st.loss_policy_coop, "cooperative policy");
    ++st.coop_policy_steps;
    polyak(coop_->critic.target, coop_->critic.online, config_.sac.tau);
  }
  if (phase_hook_) phase_hook_(Phase::kCooperative, false);

  if (adv_) {
    if (phase_hook_) phase_hook_(Phase::kAdversarial, true);
    for (int j = 0; j < config_.sac.iter_adv; ++j) {
      const TeamBatch b = make_batch(d2_, d2_.sample_indices(batch, replay_rng_), false);
      st.loss_critic_adv = critic_update(adv_->critic, b, adv_->actors, adv_heads, config_.sac);
      check(st.loss_critic_adv, "adversarial critic");
      ++st.adv_critic_steps;
      st.loss_policy_adv = policy_update(adv_->actors, adv_->critic, b, adv_heads, config_.sac);
      check(st.loss_policy_adv, "adversarial policy");
      ++st.adv_policy_steps;
      polyak(adv_->critic.target, adv_->critic.online, config_.sac.tau);
    }
    if (phase_hook_) phase_hook_(Phase::kAdversarial, false);
  }
  last_update_ = st;
  updates_.push_back(st);
  return st;
}

void Trainer::append_log_row() {
  if (!window_.empty()) {
    double c = 0.0, a = 0.0;
    for (const EpisodeRecord& r : window_) {
      c += std::accumulate(r.rewards.begin(), r.rewards.end(), 0.0);
      a += r.adv_return;
    }
    last_mean_coop_ = c / static_cast<double>(window_.size());
    last_mean_adv_ = a / static_cast<double>(window_.size());
    window_.clear();
  }
  double cov = 0.0;
  for (const EnvSlot& s : slots_) cov += coverage_fraction(s.env, s.state);
  cov /= static_cast<double>(slots_.size());
  const auto pi = selector_.probabilities();
  log_ += std::to_string(steps_) + "," + std::to_string(episodes_completed_) + "," +
          strategy_name(static_cast<Strategy>(slots_.front().head)) + "," + fmt(pi[0]) + "," + fmt(pi[1]) + "," +
          fmt(pi[2]) + "," + fmt(last_update_.loss_critic_coop) + "," + fmt(last_update_.loss_policy_coop) + "," +
          fmt(last_update_.loss_critic_adv) + "," + fmt(last_update_.loss_policy_adv) + "," + fmt(last_mean_coop_) +
          "," + fmt(last_mean_adv_) + "," + fmt(cov) + "\n";
}

void Trainer::run() {
  while (steps_ < config_.total_timesteps) {
    const CollectStats c = collect_step();
    t_update_ += c.transitions;
    if (t_update_ >= config_.sac.steps_per_update) alternate_updates();
    if (config_.log_interval > 0 && steps_ >= next_log_) {
      append_log_row();
      while (next_log_ <= steps_) next_log_ += config_.log_interval;
    }
  }
  append_log_row();
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  c.config_text = config_.config_text;
  c.manifest_json = config_.manifest_json;
  c.n_coop = config_.n_coop;
  c.n_adv = config_.n_adv;
  c.obs_size = obs_size_;
  c.state_size = state_size_;
  c.coop = coop_;
  c.adv = adv_;
  c.selector = selector_;
  return c;
}

TrainingResult run_training(const RunConfig& config) {
  Trainer trainer(config);
  trainer.run();
  return TrainingResult{trainer.checkpoint(), trainer.log_csv()};
}

}  // namespace sar
