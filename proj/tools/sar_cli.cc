// Command-line front end: train, eval, replay, check and case.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.h"
#include "sar/checkpoint.h"
#include "sar/checksum.h"
#include "sar/config.h"
#include "sar/error.h"
#include "sar/eval.h"
#include "sar/manifest.h"
#include "sar/trainer.h"

namespace fs = std::filesystem;
using namespace sar;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string map;
  std::string case_label;
  std::optional<long> steps;
  std::optional<int> instantiations;
  std::optional<int> cap;
  std::string checkpoint;
  std::string adv_checkpoint;
  std::string log;
  std::string meta;
  bool trajectories = false;
};

// Resolved configuration: file, then command-line overrides.
ConfigDocument resolve(const Options& o) {
  ConfigDocument doc = o.config.empty() ? default_config() : parse_config(read_file(o.config));
  for (const ConfigWarning& w : doc.warnings) std::cerr << "warning: line " << w.line << ": " << w.message << "\n";
  if (o.seed) doc.set("run.seed", std::to_string(*o.seed));
  if (!o.map.empty()) doc.set("run.map", o.map);
  if (!o.case_label.empty()) doc.set("eval.case", o.case_label);
  if (o.steps) doc.set("run.total_timesteps", std::to_string(*o.steps));
  if (o.instantiations) doc.set("eval.instantiations", std::to_string(*o.instantiations));
  if (o.cap) doc.set("eval.cap", std::to_string(*o.cap));
  return doc;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(Errc::kIo, "cannot create directory " + p.string() + ": " + ec.message());
}

struct TrainOutputs {
  Checkpoint checkpoint;
  std::string checkpoint_path;
};

TrainOutputs train_into(ConfigDocument doc, const fs::path& out, const std::string& prefix,
                        const std::optional<Checkpoint>& warm_start = std::nullopt) {
  ensure_dir(out);
  const std::string map_path = doc.text("run.map");
  const std::string text = serialize_config(doc);
  const std::uint64_t seed = doc.unsigned_integer("run.seed");
  RunManifest manifest = make_manifest(text, seed, {map_path});
  const std::string ckpt_path = (out / (prefix + "checkpoint.sar")).string();
  const std::string log_path = (out / (prefix + "train_log.csv")).string();
  // Output paths are relative to the output directory so identical runs in
  // different directories produce identical artifacts.
  manifest.outputs = {{"checkpoint", prefix + "checkpoint.sar"}, {"training_log", prefix + "train_log.csv"}};

  RunConfig rc = run_config_from(doc, load_map_file(map_path));
  rc.manifest_json = manifest_json(manifest);
  rc.warm_start = warm_start;
  const TrainingResult r = run_training(rc);
  write_file(ckpt_path, save_checkpoint(r.checkpoint));
  write_file(log_path, r.log_csv);
  write_file((out / (prefix + "manifest.json")).string(), rc.manifest_json + "\n");
  std::cout << "trained " << doc.integer("run.total_timesteps") << " steps -> " << ckpt_path << "\n";
  return {r.checkpoint, ckpt_path};
}

std::string map_name(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<NamedMap> load_eval_maps(const ConfigDocument& doc) {
  std::vector<NamedMap> maps;
  for (const std::string& p : eval_map_paths(doc)) maps.push_back({map_name(p), load_map_file(p)});
  if (maps.empty()) throw Error(Errc::kOutOfRange, "run.eval_maps lists no maps");
  return maps;
}

CaseSpec spec_from(const ConfigDocument& doc) {
  CaseSpec spec = case_preset(doc.text("eval.case"));
  spec.greedy = doc.boolean("eval.greedy");
  return spec;
}

// Runs the evaluation and writes summary.json (and trajectories on request).
EvalSummary evaluate_into(const ConfigDocument& doc, std::span<const Checkpoint> ckpts, const fs::path& out,
                          bool trajectories) {
  ensure_dir(out);
  const CaseSpec spec = spec_from(doc);
  const std::vector<NamedMap> maps = load_eval_maps(doc);
  const int n = static_cast<int>(doc.integer("eval.instantiations"));
  const int cap = static_cast<int>(doc.integer("eval.cap"));
  const std::uint64_t eval_seed = doc.unsigned_integer("eval.seed");
  const EnvConfig ec = env_config_from(doc);

  const EvalSummary summary = run_case(spec, ckpts, maps, n, eval_seed, cap, ec, trajectories);
  const EvalSummary baseline = random_walk_baseline(maps, spec.eval_coop, 0, n, eval_seed, cap, ec);
  const ComparisonReport cmp = compare(summary, baseline);

  const std::vector<std::string> paths = eval_map_paths(doc);
  RunManifest manifest = make_manifest(serialize_config(doc), eval_seed, paths);
  manifest.outputs.push_back({"summary", "summary.json"});
  if (trajectories) manifest.outputs.push_back({"trajectories", "trajectories"});

  if (trajectories) {
    const fs::path tdir = out / "trajectories";
    ensure_dir(tdir);
    for (std::size_t m = 0; m < summary.maps.size(); ++m) {
      const MapSummary& ms = summary.maps[m];
      for (std::size_t i = 0; i < ms.results.size(); ++i) {
        char idx[16];
        std::snprintf(idx, sizeof idx, "%02zu", i);
        const fs::path log = tdir / (ms.name + "_" + idx + ".csv");
        write_file(log.string(), trajectory_csv(ms.results[i]));
        nlohmann::ordered_json meta;
        meta["case"] = spec.label;
        meta["map"] = paths[m];
        meta["map_sha256"] = sha256_hex(read_file(paths[m]));
        meta["seed"] = ms.seeds[i];
        meta["cap"] = cap;
        meta["eval_coop"] = spec.eval_coop;
        meta["eval_adv"] = spec.eval_adv;
        meta["greedy"] = spec.greedy;
        meta["config"] = serialize_config(doc);
        write_file(log.string() + ".meta.json", meta.dump(2) + "\n");
      }
    }
  }
  write_file((out / "summary.json").string(), summary_json(summary, &cmp, manifest_json(manifest)));
  for (std::size_t m = 0; m < summary.maps.size(); ++m) {
    const MapSummary& ms = summary.maps[m];
    std::cout << "case " << summary.label << " " << ms.name << ": mean flow-time " << ms.mean_display() << " ("
              << ms.censored() << "/" << ms.results.size() << " censored); random walk "
              << baseline.maps[m].mean_display() << "; verdict vs random: " << cmp.maps[m].verdict << "\n";
  }
  return summary;
}

std::vector<Checkpoint> load_checkpoints(const Options& o) {
  if (o.checkpoint.empty()) throw Error(Errc::kIo, "--checkpoint is required");
  std::vector<Checkpoint> ckpts{load_checkpoint(read_file(o.checkpoint))};
  if (!o.adv_checkpoint.empty()) ckpts.push_back(load_checkpoint(read_file(o.adv_checkpoint)));
  return ckpts;
}

int cmd_train(const Options& o) {
  train_into(resolve(o), o.out, "");
  return 0;
}

int cmd_eval(const Options& o) {
  const std::vector<Checkpoint> ckpts = load_checkpoints(o);
  evaluate_into(resolve(o), ckpts, o.out, o.trajectories);
  return 0;
}

int cmd_replay(const Options& o) {
  if (o.log.empty()) throw Error(Errc::kIo, "--log is required");
  const std::vector<Checkpoint> ckpts = load_checkpoints(o);
  const std::string meta_path = o.meta.empty() ? o.log + ".meta.json" : o.meta;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(read_file(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kReplayDivergence, meta_path + ": " + e.what());
  }
  const ConfigDocument doc = parse_config(meta.at("config").get<std::string>());
  const std::string map_path = meta.at("map").get<std::string>();
  const std::string map_text = read_file(map_path);
  if (sha256_hex(map_text) != meta.at("map_sha256").get<std::string>()) {
    throw Error(Errc::kReplayDivergence, "map " + map_path + " changed since the log was written");
  }
  CaseSpec spec = case_preset(meta.at("case").get<std::string>());
  spec.eval_coop = meta.at("eval_coop").get<int>();
  spec.eval_adv = meta.at("eval_adv").get<int>();
  spec.greedy = meta.at("greedy").get<bool>();
  const std::vector<AgentPolicy> policies = case_policies(spec, ckpts);
  const Environment env(load_map(map_text), make_roster(spec.eval_coop, spec.eval_adv), env_config_from(doc));
  const std::vector<TrajectoryRow> rows = parse_trajectory_csv(read_file(o.log));
  const auto bad = first_divergent_step(env, policies, meta.at("seed").get<std::uint64_t>(), rows);
  if (bad) {
    throw Error(Errc::kReplayDivergence, o.log + ": first divergent step " + std::to_string(*bad));
  }
  std::cout << "replay ok: " << rows.size() / env.num_agents() << " steps of " << env.num_agents()
            << " agents reproduced from their own observations\n";
  return 0;
}

int cmd_check(const Options&) {
  bool all = true;
  auto report = [&](const char* name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
    all = all && pass;
  };
  {
    Rng rng(314);
    double worst = 0.0;
    long steps = 0;
    for (int trial = 0; steps < 1000; ++trial) {
      const int nc = 1 + uniform_index(rng, 3);
      const GridMap m = oracle::random_map(rng, 10, nc, uniform_index(rng, 2), uniform_index(rng, 3));
      RewardConfig cfg;
      cfg.t_max = 40;
      cfg.structure = trial % 2 ? RewardStructure::kBaseline : RewardStructure::kModified;
      EnvConfig ec;
      ec.t_max = cfg.t_max;
      const Environment env(m, make_roster(nc, static_cast<int>(m.adv_spawns.size())), ec);
      WorldState s = env.reset(static_cast<std::uint64_t>(trial));
      while (true) {
        std::vector<Action> joint(env.num_agents());
        for (auto& a : joint) a = static_cast<Action>(uniform_index(rng, kNumActions));
        const StepOutcome out = env.step(s, joint);
        worst = std::max(worst, oracle::max_reward_discrepancy(evaluate_step(env, s, out, cfg),
                                                               oracle::recount(env, s, out, cfg), env, s, out.next));
        ++steps;
        s = out.next;
        if (out.done) break;
      }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%ld steps, max discrepancy %.3g (tolerance 1e-9)", steps, worst);
    report("reward brute-force", worst <= 1e-9, buf);
  }
  {
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const oracle::GradientCheck g = oracle::check_sac_gradients(s);
      worst = std::max({worst, g.critic_rel_error, g.actor_rel_error});
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "20 instances, max relative error %.3g (tolerance 1e-4)", worst);
    report("gradient finite-difference", worst <= 1e-4, buf);
  }
  {
    const GridMap m = load_map("C......T\n");
    const double exact = oracle::exact_hitting_time(m);
    const std::vector<NamedMap> maps{{"corridor8", m}};
    const EvalSummary s = random_walk_baseline(maps, 1, 0, 10000, 1, 1000000, EnvConfig{});
    const double mc = s.maps[0].mean_uncensored().value_or(0.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, "exact %.3f, Monte-Carlo %.3f over 10000 episodes (tolerance 5%%)", exact, mc);
    report("hitting-time", std::abs(mc - exact) <= 0.05 * exact, buf);
  }
  return all ? 0 : 1;
}

// Trains the case's roster and structure, then evaluates it.
int cmd_case(const Options& o) {
  ConfigDocument doc = resolve(o);
  const CaseSpec spec = spec_from(doc);
  const fs::path out = o.out;
  const int slots = std::max(spec.train_coop + spec.train_adv, spec.eval_coop + spec.eval_adv);
  doc.set("run.agent_slots", std::to_string(slots));
  doc.set("run.structure", spec.structure == RewardStructure::kBaseline ? "baseline" : "modified");
  doc.set("run.coop_agents", std::to_string(spec.train_coop));
  doc.set("run.adv_agents", std::to_string(spec.train_adv));

  std::vector<Checkpoint> ckpts;
  TrainOutputs coop = train_into(doc, out, "");
  ckpts.push_back(coop.checkpoint);
  if (spec.swap) {
    // The swapped-in adversary trains against the frozen cooperative team.
    ConfigDocument adv = doc;
    adv.set("run.coop_agents", std::to_string(spec.eval_coop));
    adv.set("run.adv_agents", std::to_string(spec.eval_adv));
    adv.set("run.structure", "baseline");
    adv.set("run.randomize_targets", "true");
    adv.set("sac.iter_coop", "0");
    TrainOutputs a = train_into(adv, out, "adversary_", coop.checkpoint);
    ckpts.push_back(a.checkpoint);
  }
  evaluate_into(doc, ckpts, out / "eval", o.trajectories);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial multi-agent search-and-rescue: training, evaluation and verification"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* c) {
    c->add_option("--config", o.config, "Configuration file (key = value)");
    c->add_option("--seed", o.seed, "Master seed (overrides run.seed)");
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--map", o.map, "Training map (overrides run.map)");
    c->add_option("--case", o.case_label, "Case study I, II, III or IV (overrides eval.case)");
    c->add_option("--steps", o.steps, "Training timesteps (overrides run.total_timesteps)");
    c->add_option("--instantiations", o.instantiations, "Evaluation instantiations (overrides eval.instantiations)");
    c->add_option("--cap", o.cap, "Evaluation step cap (overrides eval.cap)");
  };
  CLI::App* train = app.add_subcommand("train", "Train a checkpoint");
  common(train);
  CLI::App* eval = app.add_subcommand("eval", "Evaluate checkpoints on the configured eval maps");
  common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "Cooperative checkpoint")->required();
  eval->add_option("--adv-checkpoint", o.adv_checkpoint, "Checkpoint supplying adversarial actors");
  eval->add_flag("--trajectories", o.trajectories, "Write per-episode trajectory logs");
  CLI::App* replay = app.add_subcommand("replay", "Verify a trajectory log against its checkpoint");
  replay->add_option("--checkpoint", o.checkpoint, "Cooperative checkpoint")->required();
  replay->add_option("--adv-checkpoint", o.adv_checkpoint, "Checkpoint supplying adversarial actors");
  replay->add_option("--log", o.log, "Trajectory CSV")->required();
  replay->add_option("--meta", o.meta, "Metadata sidecar (default: <log>.meta.json)");
  CLI::App* check = app.add_subcommand("check", "Run the oracle self-checks");
  CLI::App* case_cmd = app.add_subcommand("case", "Train and evaluate one case study end to end");
  common(case_cmd);
  case_cmd->add_flag("--trajectories", o.trajectories, "Write per-episode trajectory logs");

  CLI11_PARSE(app, argc, argv);
  try {
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (replay->parsed()) return cmd_replay(o);
    if (check->parsed()) return cmd_check(o);
    if (case_cmd->parsed()) return cmd_case(o);
  } catch (const Error& e) {
    nlohmann::ordered_json err{{"error", errc_name(e.code())}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::ordered_json err{{"error", "Internal"}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 2;
}
