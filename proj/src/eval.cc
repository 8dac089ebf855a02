#include "sar/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "sar/error.h"

namespace sar {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Rng agent_stream(std::uint64_t seed, int agent) {
  return child_stream(seed, {tag(Stream::kEvalAgent), static_cast<std::uint64_t>(agent)});
}

void check_policies(const Environment& env, std::span<const AgentPolicy> policies) {
  if (static_cast<int>(policies.size()) != env.num_agents()) {
    throw Error(Errc::kJointActionLength, "expected " + std::to_string(env.num_agents()) + " policies, got " +
                                              std::to_string(policies.size()));
  }
}

// Ordering key with censored runs counted as worse than any uncensored one.
long order_key(const EpisodeResult& r, int cap) { return r.censored ? static_cast<long>(cap) + 1 : r.flow_time; }

}  // namespace

AgentPolicy actor_policy(const ActorNet& actor, int head, bool greedy) {
  const ActorNet* a = &actor;
  if (greedy) {
    return [a, head](const Observation&, std::span<const double> enc, Rng&) {
      return greedy_action(*a, enc, head).action;
    };
  }
  return [a, head](const Observation&, std::span<const double> enc, Rng& rng) {
    return select_action(*a, enc, head, rng).action;
  };
}

AgentPolicy random_policy() {
  return [](const Observation&, std::span<const double>, Rng& rng) {
    return static_cast<Action>(uniform_index(rng, kNumActions));
  };
}

EpisodeResult run_episode(const Environment& base, std::span<const AgentPolicy> policies, std::uint64_t seed,
                          const EpisodeOptions& options) {
  if (options.cap < 1) throw Error(Errc::kOutOfRange, "episode cap must be positive");
  check_policies(base, policies);
  EnvConfig cfg = base.config();
  cfg.t_max = options.cap;
  const Environment env(base.map(), base.roster(), cfg);
  const int n = env.num_agents();

  std::vector<Rng> rngs;
  for (int i = 0; i < n; ++i) rngs.push_back(agent_stream(seed, i));

  EpisodeResult res;
  res.total_targets = env.num_targets();
  WorldState state = env.reset(seed);
  std::vector<Action> joint(n);
  while (true) {
    std::vector<std::vector<double>> enc(n);
    for (int i = 0; i < n; ++i) {
      const Observation o = env.observe(state, i);
      enc[i] = env.encode(o);
      joint[i] = policies[i](o, enc[i], rngs[i]);
    }
    StepOutcome out = env.step(state, joint);
    if (options.record_trajectory) {
      RewardConfig rc = options.rewards;
      const RewardBreakdown rb = evaluate_step(env, state, out, rc);
      std::vector<std::string> events(n);
      for (const Discovery& d : out.events) {
        events[d.agent] += (events[d.agent].empty() ? "" : "|") + std::string("found:") + std::to_string(d.target);
      }
      for (const Discovery& d : out.spoofs) {
        events[d.agent] += (events[d.agent].empty() ? "" : "|") + std::string("spoof:") + std::to_string(d.target);
      }
      for (int i = 0; i < n; ++i) {
        res.trajectory.push_back(TrajectoryRow{out.next.t, i, out.next.positions[i], joint[i], events[i],
                                               rb.coop(0), rb.adv});
      }
    }
    if (options.record_observations) res.observations.push_back(std::move(enc));
    state = std::move(out.next);
    if (out.done) break;
  }
  res.targets_found = state.found_count();
  res.censored = !state.all_found();
  res.flow_time = res.censored ? options.cap : state.t;
  return res;
}

std::string trajectory_csv(const EpisodeResult& result) {
  std::string out = "step,agent_id,x,y,action,event,reward_coop,reward_adv\n";
  for (const TrajectoryRow& r : result.trajectory) {
    out += std::to_string(r.step) + "," + std::to_string(r.agent) + "," + std::to_string(r.pos.x) + "," +
           std::to_string(r.pos.y) + "," + action_name(r.action) + "," + r.event + "," + fmt(r.reward_coop) + "," +
           fmt(r.reward_adv) + "\n";
  }
  return out;
}

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text) {
  std::vector<TrajectoryRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 || line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw Error(Errc::kReplayDivergence, "trajectory line " + std::to_string(lineno) + ": bad field count");
    try {
      TrajectoryRow r;
      r.step = std::stoi(f[0]);
      r.agent = std::stoi(f[1]);
      r.pos = Cell{std::stoi(f[2]), std::stoi(f[3])};
      r.action = action_from_name(f[4]);
      r.event = f[5];
      r.reward_coop = std::stod(f[6]);
      r.reward_adv = std::stod(f[7]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error(Errc::kReplayDivergence, "trajectory line " + std::to_string(lineno) + ": unparsable field");
    }
  }
  return rows;
}

std::optional<int> first_divergent_step(const Environment& env, std::span<const AgentPolicy> policies,
                                        std::uint64_t seed, std::span<const TrajectoryRow> rows) {
  check_policies(env, policies);
  const int n = env.num_agents();
  if (rows.size() % static_cast<std::size_t>(n) != 0) return static_cast<int>(rows.size() / n) + 1;
  EnvConfig cfg = env.config();
  cfg.t_max = std::max<int>(1, static_cast<int>(rows.size() / n));
  const Environment replay_env(env.map(), env.roster(), cfg);
  std::vector<Rng> rngs;
  for (int i = 0; i < n; ++i) rngs.push_back(agent_stream(seed, i));

  WorldState state = replay_env.reset(seed);
  std::vector<Action> logged(n);
  for (std::size_t base = 0; base < rows.size(); base += n) {
    const int step = state.t + 1;
    for (int i = 0; i < n; ++i) {
      const TrajectoryRow& r = rows[base + i];
      if (r.step != step || r.agent != i) return step;
      const Observation o = replay_env.observe(state, i);
      const std::vector<double> enc = replay_env.encode(o);
      if (policies[i](o, enc, rngs[i]) != r.action) return step;
      logged[i] = r.action;
    }
    if (state.all_found()) return step;
    StepOutcome out = replay_env.step(state, logged);
    for (int i = 0; i < n; ++i) {
      if (out.next.positions[i] != rows[base + i].pos) return step;
    }
    state = std::move(out.next);
  }
  return std::nullopt;
}

int MapSummary::censored() const {
  return static_cast<int>(std::count_if(results.begin(), results.end(), [](const EpisodeResult& r) { return r.censored; }));
}

std::optional<double> MapSummary::mean_uncensored() const {
  double sum = 0.0;
  int n = 0;
  for (const EpisodeResult& r : results) {
    if (r.censored) continue;
    sum += r.flow_time;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::string MapSummary::mean_display() const {
  const auto m = mean_uncensored();
  if (!m) return ">" + std::to_string(cap);
  return fmt(*m);
}

std::vector<int> MapSummary::flow_times() const {
  std::vector<int> out;
  for (const EpisodeResult& r : results) out.push_back(r.flow_time);
  return out;
}

CaseSpec case_preset(std::string_view label) {
  CaseSpec c;
  c.label = std::string(label);
  if (label == "I") {
    c.train_coop = 2, c.train_adv = 0, c.eval_coop = 2, c.eval_adv = 0;
    c.structure = RewardStructure::kModified;
  } else if (label == "II") {
    c.train_coop = 3, c.train_adv = 0, c.eval_coop = 2, c.eval_adv = 1;
    c.structure = RewardStructure::kModified;
    c.swap = true;
  } else if (label == "III") {
    c.train_coop = 2, c.train_adv = 1, c.eval_coop = 2, c.eval_adv = 1;
    c.structure = RewardStructure::kBaseline;
  } else if (label == "IV") {
    c.train_coop = 2, c.train_adv = 1, c.eval_coop = 2, c.eval_adv = 1;
    c.structure = RewardStructure::kModified;
  } else {
    throw Error(Errc::kOutOfRange, "unknown case '" + std::string(label) + "' (expected I, II, III or IV)");
  }
  return c;
}

std::vector<std::uint64_t> eval_seeds(std::uint64_t master, int instantiations) {
  if (instantiations < 1) throw Error(Errc::kOutOfRange, "at least one instantiation is required");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < instantiations; ++i) {
    seeds.push_back(derive_seed(master, {tag(Stream::kEvalSeed), static_cast<std::uint64_t>(i)}));
  }
  return seeds;
}

std::vector<AgentPolicy> case_policies(const CaseSpec& spec, std::span<const Checkpoint> checkpoints) {
  if (spec.eval_coop < 1) throw Error(Errc::kOutOfRange, "evaluation needs at least one cooperative agent");
  if (checkpoints.empty() || !checkpoints[0].coop) {
    throw Error(Errc::kArchitectureMismatch, "no cooperative team in the checkpoint");
  }
  const Checkpoint& coop_ckpt = checkpoints[0];
  const Checkpoint& adv_ckpt = checkpoints.size() > 1 ? checkpoints[1] : checkpoints[0];
  if (static_cast<int>(coop_ckpt.coop->actors.size()) < spec.eval_coop) {
    throw Error(Errc::kArchitectureMismatch, "checkpoint has fewer cooperative actors than the evaluation roster");
  }
  if (spec.eval_adv > 0 && (!adv_ckpt.adv || static_cast<int>(adv_ckpt.adv->actors.size()) < spec.eval_adv)) {
    throw Error(Errc::kArchitectureMismatch, "no adversarial actors available for the evaluation roster");
  }
  const int head = coop_ckpt.selector.argmax();
  std::vector<AgentPolicy> policies;
  for (int k = 0; k < spec.eval_coop; ++k) {
    policies.push_back(actor_policy(coop_ckpt.coop->actors[k], head, spec.greedy));
  }
  for (int j = 0; j < spec.eval_adv; ++j) policies.push_back(actor_policy(adv_ckpt.adv->actors[j], 0, spec.greedy));
  return policies;
}

EvalSummary run_case(const CaseSpec& spec, std::span<const Checkpoint> checkpoints, std::span<const NamedMap> maps,
                     int instantiations, std::uint64_t eval_seed, int cap, const EnvConfig& env_config,
                     bool record_trajectories) {
  const std::vector<AgentPolicy> policies = case_policies(spec, checkpoints);
  const Checkpoint& coop_ckpt = checkpoints[0];
  const Checkpoint& adv_ckpt = checkpoints.size() > 1 ? checkpoints[1] : checkpoints[0];

  EvalSummary summary;
  summary.label = spec.label;
  const auto seeds = eval_seeds(eval_seed, instantiations);
  const auto roster = make_roster(spec.eval_coop, spec.eval_adv);
  for (const NamedMap& nm : maps) {
    const Environment env(nm.map, roster, env_config);
    if (env.observation_size() != coop_ckpt.obs_size ||
        (spec.eval_adv > 0 && env.observation_size() != adv_ckpt.obs_size)) {
      throw Error(Errc::kEncodingMismatch, "map '" + nm.name + "' encodes observations of size " +
                                               std::to_string(env.observation_size()) + ", checkpoint expects " +
                                               std::to_string(coop_ckpt.obs_size));
    }
    MapSummary ms;
    ms.name = nm.name;
    ms.cap = cap;
    ms.seeds = seeds;
    EpisodeOptions opt;
    opt.cap = cap;
    opt.record_trajectory = record_trajectories;
    opt.rewards.structure = spec.structure;
    for (std::uint64_t s : seeds) ms.results.push_back(run_episode(env, policies, s, opt));
    summary.maps.push_back(std::move(ms));
  }
  return summary;
}

EvalSummary random_walk_baseline(std::span<const NamedMap> maps, int n_coop, int n_adv, int instantiations,
                                 std::uint64_t eval_seed, int cap, const EnvConfig& env_config) {
  EvalSummary summary;
  summary.label = "random";
  const auto seeds = eval_seeds(eval_seed, instantiations);
  const auto roster = make_roster(n_coop, n_adv);
  const std::vector<AgentPolicy> policies(n_coop + n_adv, random_policy());
  for (const NamedMap& nm : maps) {
    const Environment env(nm.map, roster, env_config);
    MapSummary ms;
    ms.name = nm.name;
    ms.cap = cap;
    ms.seeds = seeds;
    EpisodeOptions opt;
    opt.cap = cap;
    opt.record_trajectory = false;
    for (std::uint64_t s : seeds) ms.results.push_back(run_episode(env, policies, s, opt));
    summary.maps.push_back(std::move(ms));
  }
  return summary;
}

double sign_test_p(int k, int n) {
  if (n <= 0) return 1.0;
  const int extreme = std::min(k, n - k);
  // P(X <= extreme) for X ~ Binomial(n, 1/2), summed in log space.
  double tail = 0.0;
  for (int i = 0; i <= extreme; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0);
    tail += std::exp(log_term);
  }
  return std::min(1.0, 2.0 * tail);
}

ComparisonReport compare(const EvalSummary& a, const EvalSummary& b) {
  if (a.maps.size() != b.maps.size()) throw Error(Errc::kMismatchedPairing, "summaries cover different maps");
  ComparisonReport report;
  for (std::size_t m = 0; m < a.maps.size(); ++m) {
    const MapSummary& ma = a.maps[m];
    const MapSummary& mb = b.maps[m];
    if (ma.seeds != mb.seeds || ma.results.size() != mb.results.size() || ma.cap != mb.cap) {
      throw Error(Errc::kMismatchedPairing, "map '" + ma.name + "' is not paired by seed");
    }
    MapComparison c;
    c.name = ma.name;
    for (std::size_t i = 0; i < ma.results.size(); ++i) {
      const long ka = order_key(ma.results[i], ma.cap);
      const long kb = order_key(mb.results[i], mb.cap);
      c.differences.push_back(static_cast<double>(kb - ka));
      if (ka < kb) {
        ++c.a_wins;
      } else if (kb < ka) {
        ++c.b_wins;
      } else {
        ++c.ties;
      }
    }
    c.p_value = sign_test_p(c.a_wins, c.a_wins + c.b_wins);
    const int ca = ma.censored(), cb = mb.censored();
    const auto mean_a = ma.mean_uncensored(), mean_b = mb.mean_uncensored();
    if (ca != cb) {
      c.verdict = ca < cb ? "a faster" : "b faster";
    } else if (mean_a && mean_b && *mean_a != *mean_b) {
      c.verdict = *mean_a < *mean_b ? "a faster" : "b faster";
    } else {
      c.verdict = "indistinguishable";
    }
    report.maps.push_back(std::move(c));
  }
  return report;
}

std::string summary_json(const EvalSummary& summary, const ComparisonReport* comparison,
                         std::string_view manifest_json) {
  nlohmann::ordered_json doc;
  doc["case"] = summary.label;
  doc["maps"] = nlohmann::ordered_json::array();
  for (const MapSummary& ms : summary.maps) {
    nlohmann::ordered_json m;
    m["name"] = ms.name;
    m["cap"] = ms.cap;
    m["instantiations"] = ms.results.size();
    m["censored"] = ms.censored();
    m["mean_flow_time"] = ms.mean_display();
    m["runs"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ms.results.size(); ++i) {
      const EpisodeResult& r = ms.results[i];
      m["runs"].push_back({{"seed", ms.seeds[i]},
                           {"flow_time", r.flow_time},
                           {"censored", r.censored},
                           {"targets_found", r.targets_found},
                           {"total_targets", r.total_targets}});
    }
    doc["maps"].push_back(std::move(m));
  }
  if (comparison) {
    auto& arr = doc["comparison"] = nlohmann::ordered_json::array();
    for (const MapComparison& c : comparison->maps) {
      arr.push_back({{"name", c.name},
                     {"differences", c.differences},
                     {"a_wins", c.a_wins},
                     {"b_wins", c.b_wins},
                     {"ties", c.ties},
                     {"p_value", c.p_value},
                     {"verdict", c.verdict}});
    }
  }
  if (!manifest_json.empty()) doc["manifest"] = nlohmann::ordered_json::parse(manifest_json);
  return doc.dump(2) + "\n";
}

}  // namespace sar
