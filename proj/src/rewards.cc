#include "sar/rewards.h"

#include <algorithm>
#include <cmath>

#include "sar/error.h"

namespace sar {

namespace {

// f_i and mu are ratios of small integers; exact ties (e.g. f = 1/3 against
// mean(1/3, 1/2, 1/6)) must not be decided by rounding noise.
constexpr double kTieTolerance = 1e-12;

}  // namespace

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kMinimum: return "minimum";
    case Strategy::kCovering: return "covering";
    case Strategy::kBurrowing: return "burrowing";
  }
  return "?";
}

const char* structure_name(RewardStructure s) {
  return s == RewardStructure::kBaseline ? "baseline" : "modified";
}

double RewardConfig::decay_rate() const {
  if (k > 0.0) return k;
  return std::log(100.0) / ((1.0 - switch_frac) * t_max);
}

NoveltyTable::NoveltyTable(int num_agents, int num_cells)
    : counts_(num_agents, std::vector<int>(num_cells, 0)) {}

NoveltyTable NoveltyTable::from_state(const WorldState& state, std::span<const int> agents) {
  NoveltyTable t(0, 0);
  for (int a : agents) t.counts_.push_back(state.visits[a]);
  return t;
}

double novelty(const NoveltyTable& table, int agent, int cell) {
  return 1.0 / (1.0 + table.count(agent, cell));
}

double intrinsic(Strategy strategy, const NoveltyTable& table, int agent, int cell) {
  const int n = table.num_agents();
  if (strategy == Strategy::kMinimum) {
    double lo = novelty(table, 0, cell);
    for (int j = 1; j < n; ++j) lo = std::min(lo, novelty(table, j, cell));
    return lo;
  }
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += novelty(table, j, cell);
  const double mu = sum / n;
  const double fi = novelty(table, agent, cell);
  const double gap = fi - mu;
  if (std::abs(gap) <= kTieTolerance * mu) return 0.0;
  if (strategy == Strategy::kCovering) return gap > 0 ? fi : 0.0;
  return gap < 0 ? fi : 0.0;
}

double adversarial_alpha(const RewardConfig& config, int n_coop, int width, int height) {
  return config.K / (static_cast<double>(n_coop) * (width + height));
}

double adversarial_reward(const Environment& env, const WorldState& state, const RewardConfig& config) {
  if (env.num_coop() == 0) return 0.0;
  long total = 0;
  for (int m = 0; m < env.num_targets(); ++m) {
    if (state.found[m]) continue;
    for (int i : env.coop_ids()) total += manhattan(state.positions[i], env.map().targets[m]);
  }
  return adversarial_alpha(config, env.num_coop(), env.map().width, env.map().height) * total;
}

SecondaryRewards coverage_secondary(const Environment& env, const WorldState& after, int v_thresh) {
  SecondaryRewards r;
  for (int i : env.coop_ids()) {
    int v = after.team_visits[env.map().index(after.positions[i])];
    if (v == 1) ++r.coop;
    if (v > v_thresh) ++r.adv;
  }
  return r;
}

ExtrinsicRewards baseline_extrinsic(int new_discoveries, bool complete, bool truncated, double adversarial_term,
                                    const RewardConfig& config) {
  const ExtrinsicTable& t = config.table;
  ExtrinsicRewards r;
  r.coop = t.time_penalty_coop + t.locate * new_discoveries;
  if (complete) r.coop += t.complete;
  if (truncated && !complete) r.coop += t.fail;
  r.adv = t.time_bonus_adv + adversarial_term;
  return r;
}

double beta(int t, const RewardConfig& config) {
  const double switch_t = config.switch_frac * config.t_max;
  if (t <= switch_t) return config.beta0;
  return config.beta0 * std::exp(-config.decay_rate() * (t - switch_t));
}

double composite(double r_sec, double r_intr, int t, const RewardConfig& config) {
  return r_sec + beta(t, config) * r_intr;
}

double RewardBreakdown::intrinsic_sum(int head) const {
  double s = 0.0;
  for (double v : intr[head]) s += v;
  return s;
}

RewardBreakdown evaluate_step(const Environment& env, const WorldState& before, const StepOutcome& outcome,
                              const RewardConfig& config) {
  const WorldState& after = outcome.next;
  RewardBreakdown b;
  b.adversarial_term = adversarial_reward(env, after, config);
  b.ext = baseline_extrinsic(static_cast<int>(outcome.events.size()), after.all_found(), outcome.truncated,
                             b.adversarial_term, config);
  b.sec = coverage_secondary(env, after, config.v_thresh);

  NoveltyTable table = NoveltyTable::from_state(before, env.coop_ids());
  for (int s = 0; s < kNumStrategies; ++s) {
    b.intr[s].resize(env.num_coop());
    for (int k = 0; k < env.num_coop(); ++k) {
      int cell = env.map().index(after.positions[env.coop_ids()[k]]);
      b.intr[s][k] = intrinsic(static_cast<Strategy>(s), table, k, cell);
    }
  }
  b.beta = beta(before.t, config);
  if (config.structure == RewardStructure::kBaseline) {
    b.base_coop = b.ext.coop;
    b.adv = b.ext.adv;
  } else {
    b.base_coop = b.sec.coop;
    b.adv = b.sec.adv;
  }
  return b;
}

}  // namespace sar
