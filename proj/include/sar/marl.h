#pragma once

#include <array>
#include <span>
#include <vector>

#include "sar/env.h"
#include "sar/nn.h"
#include "sar/rewards.h"
#include "sar/rng.h"

namespace sar {

// One policy head per intrinsic strategy.
using PolicyHead = Strategy;
inline constexpr int kNumHeads = kNumStrategies;

struct SacConfig {
  double entropy = 0.01;  // alpha_ent, fixed
  double gamma = 0.99;
  double tau = 0.005;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  int batch_size = 256;
  int steps_per_update = 100;
  int iter_coop = 4;
  int iter_adv = 4;
  int hidden = 64;
  double grad_clip = 10.0;
};

// Per-agent policy: a shared ReLU trunk whose output layer holds one block of
// kNumActions logits per head.
class ActorNet {
 public:
  ActorNet() = default;
  ActorNet(int obs_size, int num_heads, int hidden, const OptimizerConfig& opt, Rng& rng);

  int num_heads() const { return net.output_size() / kNumActions; }
  int obs_size() const { return net.input_size(); }

  // (kNumActions * num_heads) x batch.
  Eigen::MatrixXd logits(const Eigen::MatrixXd& obs, Mlp::Trace* trace = nullptr) const;
  std::array<double, kNumActions> probabilities(std::span<const double> obs, int head) const;

  Mlp net;
  Optimizer optimizer;
};

struct ActionChoice {
  Action action = Action::kLeft;
  double log_prob = 0.0;
};

ActionChoice select_action(const ActorNet& actor, std::span<const double> obs, int head, Rng& rng);
ActionChoice greedy_action(const ActorNet& actor, std::span<const double> obs, int head);

std::array<double, kNumActions> log_softmax(std::span<const double> logits);

// Team critic shared by all members: (global state, agent one-hot, head
// one-hot) -> one value per action. Online and target copies.
class CentralCritic {
 public:
  CentralCritic() = default;
  CentralCritic(int state_size, int agent_slots, int num_heads, int hidden, const OptimizerConfig& opt, Rng& rng);

  int input_size() const { return state_size + agent_slots + num_heads; }
  Eigen::MatrixXd inputs(const Eigen::MatrixXd& states, int agent_slot, int head) const;

  int state_size = 0;
  int agent_slots = 0;
  int num_heads = 0;
  Mlp online;
  Mlp target;
  Optimizer optimizer;
};

// Column-major minibatch for one team. Member k is the k-th agent of the team.
struct TeamBatch {
  Eigen::MatrixXd states;       // state_size x B
  Eigen::MatrixXd next_states;  // state_size x B
  std::vector<Eigen::MatrixXd> obs;       // per member: obs_size x B
  std::vector<Eigen::MatrixXd> next_obs;  // per member
  std::vector<std::vector<int>> actions;  // per member: B action indices
  std::vector<int> slots;                 // agent slot per member
  Eigen::MatrixXd rewards;  // num_heads x B
  Eigen::VectorXd done;     // 1 where the transition is terminal

  int size() const { return static_cast<int>(states.cols()); }
  int members() const { return static_cast<int>(obs.size()); }
};

struct LossAndGrad {
  double loss = 0.0;
  GradientSet grad;
};

// Mean squared soft-Bellman error over members x heads x batch. The target
// uses the target network and the members' current policies.
LossAndGrad critic_loss(const CentralCritic& critic, const TeamBatch& batch, std::span<const ActorNet> actors,
                        std::span<const int> heads, const SacConfig& cfg);
// One optimizer step on critic_loss; returns the pre-step loss.
double critic_update(CentralCritic& critic, const TeamBatch& batch, std::span<const ActorNet> actors,
                     std::span<const int> heads, const SacConfig& cfg);

// Per-member loss E_o[sum_a pi(a|o) (alpha log pi(a|o) - Q(s,a))] averaged over heads.
std::vector<LossAndGrad> policy_loss(std::span<const ActorNet> actors, const CentralCritic& critic,
                                     const TeamBatch& batch, std::span<const int> heads, const SacConfig& cfg);
// One optimizer step per member actor; returns the mean pre-step loss.
double policy_update(std::span<ActorNet> actors, const CentralCritic& critic, const TeamBatch& batch,
                     std::span<const int> heads, const SacConfig& cfg);

struct SelectorConfig {
  double learning_rate = 0.05;
  double temperature = 1.0;
  friend bool operator==(const SelectorConfig&, const SelectorConfig&) = default;
};

// Softmax preference bandit over policy heads with a running-mean baseline.
class MetaSelector {
 public:
  MetaSelector() : MetaSelector(kNumHeads, SelectorConfig{}) {}
  MetaSelector(int num_heads, SelectorConfig config);

  std::vector<double> probabilities() const;
  int sample(Rng& rng) const;
  int argmax() const;
  // theta_h += lr (R - baseline) (1 - Pi(h)), then R joins the baseline.
  void update(double episode_return, int head);

  int num_heads() const { return static_cast<int>(theta_.size()); }
  const std::vector<double>& preferences() const { return theta_; }
  double baseline() const { return return_count_ > 0 ? return_sum_ / return_count_ : 0.0; }
  double head_mean_return(int head) const;
  long head_count(int head) const { return head_count_[head]; }
  const SelectorConfig& config() const { return config_; }

  void write(ByteWriter& w) const;
  static MetaSelector read(ByteReader& r);
  friend bool operator==(const MetaSelector&, const MetaSelector&) = default;

 private:
  SelectorConfig config_;
  std::vector<double> theta_;
  double return_sum_ = 0.0;
  long return_count_ = 0;
  std::vector<double> head_sum_;
  std::vector<long> head_count_;
};

// Global state s: per agent slot normalized (x, y); per target slot (found,
// spoofed, x, y); t / t_max; cooperative coverage fraction over L * W.
std::vector<double> global_state_features(const Environment& env, const WorldState& state);
int global_state_size(const Environment& env);

}  // namespace sar
