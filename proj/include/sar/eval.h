#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sar/checkpoint.h"
#include "sar/env.h"
#include "sar/rewards.h"

namespace sar {

// Decentralized policy: maps an agent's own observation to an action.
using AgentPolicy = std::function<Action(const Observation& obs, std::span<const double> encoded, Rng& rng)>;

// Greedy argmax on the given head, or a sample from it when greedy is false.
// The actor must outlive the returned policy.
AgentPolicy actor_policy(const ActorNet& actor, int head, bool greedy = true);
AgentPolicy random_policy();

struct TrajectoryRow {
  int step = 0;  // 1-based step index at which the action was taken
  int agent = 0;
  Cell pos;      // position after the step
  Action action = Action::kLeft;
  std::string event;  // "found:m", "spoof:m", joined by '|'; empty otherwise
  double reward_coop = 0.0;
  double reward_adv = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

struct EpisodeResult {
  int flow_time = 0;  // step of the final discovery, or the cap when censored
  bool censored = false;
  int targets_found = 0;
  int total_targets = 0;
  std::vector<TrajectoryRow> trajectory;
  // observations[t][i]: encoding agent i acted on at step t + 1 (optional).
  std::vector<std::vector<std::vector<double>>> observations;

  friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

struct EpisodeOptions {
  int cap = 18000;
  bool record_trajectory = true;
  bool record_observations = false;
  RewardConfig rewards;  // used only for the logged reward columns
};

// Runs one decentralized episode to completion or the cap. Agent i draws any
// randomness from its own stream derived from the seed.
EpisodeResult run_episode(const Environment& env, std::span<const AgentPolicy> policies, std::uint64_t seed,
                          const EpisodeOptions& options);

std::string trajectory_csv(const EpisodeResult& result);
std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text);

// Recomputes every logged action from the observation the agent saw, in
// decentralized order, and returns the first step whose action differs.
std::optional<int> first_divergent_step(const Environment& env, std::span<const AgentPolicy> policies,
                                        std::uint64_t seed, std::span<const TrajectoryRow> rows);

struct MapSummary {
  std::string name;
  int cap = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<EpisodeResult> results;  // in seed order

  int censored() const;
  std::optional<double> mean_uncensored() const;
  std::string mean_display() const;  // ">cap" when every run is censored
  std::vector<int> flow_times() const;
};

struct EvalSummary {
  std::string label;
  std::vector<MapSummary> maps;
};

// Roster binding of evaluation agents to trained actors.
struct CaseSpec {
  std::string label;
  int train_coop = 2;
  int train_adv = 0;
  int eval_coop = 2;
  int eval_adv = 0;
  RewardStructure structure = RewardStructure::kModified;
  // Swap rule: cooperative slots beyond eval_coop are replaced by actors of
  // the adversarial checkpoint.
  bool swap = false;
  bool greedy = true;  // argmax actions; false samples from the policy head
};

CaseSpec case_preset(std::string_view label);

struct NamedMap {
  std::string name;
  GridMap map;
};

std::vector<std::uint64_t> eval_seeds(std::uint64_t master, int instantiations);

// Binds evaluation agents (cooperative first, then adversarial) to actors.
// The returned policies point into `checkpoints`, which must outlive them.
std::vector<AgentPolicy> case_policies(const CaseSpec& spec, std::span<const Checkpoint> checkpoints);

// checkpoints[0] supplies the cooperative actors and head; adversarial actors
// come from checkpoints[1] when present, else from checkpoints[0].
EvalSummary run_case(const CaseSpec& spec, std::span<const Checkpoint> checkpoints, std::span<const NamedMap> maps,
                     int instantiations, std::uint64_t eval_seed, int cap, const EnvConfig& env_config,
                     bool record_trajectories = false);

// Uniform-random actions for every cooperative agent (adversaries, if any, too).
EvalSummary random_walk_baseline(std::span<const NamedMap> maps, int n_coop, int n_adv, int instantiations,
                                 std::uint64_t eval_seed, int cap, const EnvConfig& env_config);

struct MapComparison {
  std::string name;
  std::vector<double> differences;  // b - a per seed, censored runs counted as cap + 1
  int a_wins = 0;                   // seeds where a is strictly faster
  int b_wins = 0;
  int ties = 0;
  double p_value = 1.0;  // exact two-sided sign test over non-tied pairs
  std::string verdict;   // "a faster", "b faster" or "indistinguishable"
};

struct ComparisonReport {
  std::vector<MapComparison> maps;
};

ComparisonReport compare(const EvalSummary& a, const EvalSummary& b);

// Exact two-sided binomial(n, 1/2) tail probability for k successes.
double sign_test_p(int k, int n);

std::string summary_json(const EvalSummary& summary, const ComparisonReport* comparison = nullptr,
                         std::string_view manifest_json = {});

}  // namespace sar
