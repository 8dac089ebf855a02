#pragma once

#include <array>
#include <span>
#include <vector>

#include "sar/env.h"

namespace sar {

// Team-coordination strategies; one intrinsic reward and one policy head each.
enum class Strategy : int { kMinimum = 0, kCovering = 1, kBurrowing = 2 };
inline constexpr int kNumStrategies = 3;
const char* strategy_name(Strategy s);

enum class RewardStructure { kBaseline, kModified };
const char* structure_name(RewardStructure s);

struct ExtrinsicTable {
  double time_penalty_coop = -0.1;
  double time_bonus_adv = 0.1;
  double locate = 10.0;
  double complete = 10.0;
  double fail = -10.0;
};

struct RewardConfig {
  double K = 1.0;             // adversarial distance scale, 0 < K <= 1
  int v_thresh = 1;           // visits beyond which a cell is redundant
  double beta0 = 0.1;
  double switch_frac = 0.4;   // beta decays after switch_frac * t_max
  double k = 0.0;             // decay rate; 0 selects ln(100) / ((1 - switch_frac) t_max)
  double gamma = 0.99;
  ExtrinsicTable table;
  int t_max = 500;
  RewardStructure structure = RewardStructure::kModified;

  double decay_rate() const;
};

// Per-agent visit counts n_i(cell) of one team.
class NoveltyTable {
 public:
  NoveltyTable(int num_agents, int num_cells);
  // Rows of state.visits for the listed agents, in the given order.
  static NoveltyTable from_state(const WorldState& state, std::span<const int> agents);

  int num_agents() const { return static_cast<int>(counts_.size()); }
  int count(int agent, int cell) const { return counts_[agent][cell]; }
  void increment(int agent, int cell) { ++counts_[agent][cell]; }

 private:
  std::vector<std::vector<int>> counts_;
};

// f_i(cell) = 1 / (1 + n_i(cell)).
double novelty(const NoveltyTable& table, int agent, int cell);

// g_i for the chosen strategy, evaluated at `cell` over all agents of the table.
double intrinsic(Strategy strategy, const NoveltyTable& table, int agent, int cell);

// Eq. (4): alpha * sum_i sum_m |x_i - x_m| + |y_i - y_m| over cooperative
// agents and unfound targets, alpha = K / (N_c (L + W)).
double adversarial_alpha(const RewardConfig& config, int n_coop, int width, int height);
double adversarial_reward(const Environment& env, const WorldState& state, const RewardConfig& config);

struct SecondaryRewards {
  int coop = 0;
  int adv = 0;
};
// Counts cooperative agents whose cell has team visit count exactly 1 (novel)
// or above v_thresh (redundant); team_visits must already include this step.
SecondaryRewards coverage_secondary(const Environment& env, const WorldState& after, int v_thresh);

struct ExtrinsicRewards {
  double coop = 0.0;
  double adv = 0.0;
};
ExtrinsicRewards baseline_extrinsic(int new_discoveries, bool complete, bool truncated, double adversarial_term,
                                    const RewardConfig& config);

double beta(int t, const RewardConfig& config);
double composite(double r_sec, double r_intr, int t, const RewardConfig& config);

struct RewardBreakdown {
  ExtrinsicRewards ext;
  double adversarial_term = 0.0;  // Eq. (4) value
  SecondaryRewards sec;
  // intr[strategy][k] for the k-th cooperative agent.
  std::array<std::vector<double>, kNumStrategies> intr;
  double beta = 0.0;
  double base_coop = 0.0;  // cooperative reward before the intrinsic term
  double adv = 0.0;        // adversarial team reward

  double intrinsic_sum(int head) const;
  double coop(int head) const { return base_coop + beta * intrinsic_sum(head); }
};

// Rewards for the transition before -> outcome.next under config.structure.
// Intrinsic values use the pre-step visit counts at the post-step cells.
RewardBreakdown evaluate_step(const Environment& env, const WorldState& before, const StepOutcome& outcome,
                              const RewardConfig& config);

}  // namespace sar
