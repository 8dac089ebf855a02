#include "sar/marl.h"

#include <algorithm>
#include <cmath>

#include "sar/error.h"
#include "sar/serialize.h"

namespace sar {

namespace {

void check_batch(const TeamBatch& batch, std::span<const int> heads) {
  if (batch.size() == 0 || batch.members() == 0) throw Error(Errc::kEmptyBatch, "no samples");
  if (heads.empty()) throw Error(Errc::kEmptyBatch, "no heads to train");
}

}  // namespace

std::array<double, kNumActions> log_softmax(std::span<const double> logits) {
  double hi = logits[0];
  for (int a = 1; a < kNumActions; ++a) hi = std::max(hi, logits[a]);
  double sum = 0.0;
  for (int a = 0; a < kNumActions; ++a) sum += std::exp(logits[a] - hi);
  const double log_z = hi + std::log(sum);
  std::array<double, kNumActions> out;
  for (int a = 0; a < kNumActions; ++a) out[a] = logits[a] - log_z;
  return out;
}

ActorNet::ActorNet(int obs_size, int num_heads, int hidden, const OptimizerConfig& opt, Rng& rng)
    : net(Mlp::uniform_init({obs_size, hidden, hidden, kNumActions * num_heads}, rng)), optimizer(opt, net) {}

Eigen::MatrixXd ActorNet::logits(const Eigen::MatrixXd& obs, Mlp::Trace* trace) const {
  return net.forward(obs, trace);
}

std::array<double, kNumActions> ActorNet::probabilities(std::span<const double> obs, int head) const {
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  Eigen::MatrixXd z = net.forward(x);
  auto lp = log_softmax(std::span<const double>(z.data() + head * kNumActions, kNumActions));
  std::array<double, kNumActions> p;
  for (int a = 0; a < kNumActions; ++a) p[a] = std::exp(lp[a]);
  return p;
}

namespace {

std::array<double, kNumActions> head_log_probs(const ActorNet& actor, std::span<const double> obs, int head) {
  if (static_cast<int>(obs.size()) != actor.obs_size()) {
    throw Error(Errc::kEncodingMismatch, "observation length " + std::to_string(obs.size()) + " vs actor input " +
                                             std::to_string(actor.obs_size()));
  }
  if (head < 0 || head >= actor.num_heads()) throw Error(Errc::kOutOfRange, "policy head");
  Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  Eigen::MatrixXd z = actor.net.forward(x);
  return log_softmax(std::span<const double>(z.data() + head * kNumActions, kNumActions));
}

}  // namespace

ActionChoice select_action(const ActorNet& actor, std::span<const double> obs, int head, Rng& rng) {
  auto lp = head_log_probs(actor, obs, head);
  const double u = uniform01(rng);
  double acc = 0.0;
  int pick = kNumActions - 1;
  for (int a = 0; a < kNumActions; ++a) {
    acc += std::exp(lp[a]);
    if (u < acc) {
      pick = a;
      break;
    }
  }
  return {static_cast<Action>(pick), lp[pick]};
}

ActionChoice greedy_action(const ActorNet& actor, std::span<const double> obs, int head) {
  auto lp = head_log_probs(actor, obs, head);
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (lp[a] > lp[best]) best = a;
  }
  return {static_cast<Action>(best), lp[best]};
}

CentralCritic::CentralCritic(int state_size_, int agent_slots_, int num_heads_, int hidden,
                             const OptimizerConfig& opt, Rng& rng)
    : state_size(state_size_), agent_slots(agent_slots_), num_heads(num_heads_) {
  online = Mlp::uniform_init({input_size(), hidden, hidden, kNumActions}, rng);
  target = online;
  optimizer = Optimizer(opt, online);
}

Eigen::MatrixXd CentralCritic::inputs(const Eigen::MatrixXd& states, int agent_slot, int head) const {
  if (states.rows() != state_size) throw Error(Errc::kEncodingMismatch, "global state size");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(input_size(), states.cols());
  x.topRows(state_size) = states;
  x.row(state_size + agent_slot).setOnes();
  x.row(state_size + agent_slots + head).setOnes();
  return x;
}

LossAndGrad critic_loss(const CentralCritic& critic, const TeamBatch& batch, std::span<const ActorNet> actors,
                        std::span<const int> heads, const SacConfig& cfg) {
  check_batch(batch, heads);
  if (static_cast<int>(actors.size()) != batch.members()) {
    throw Error(Errc::kDimensionMismatch, "one actor per team member required");
  }
  const int B = batch.size();
  const int K = batch.members();
  const int H = static_cast<int>(heads.size());
  const int cols = B * K * H;
  Eigen::MatrixXd x(critic.input_size(), cols);
  Eigen::MatrixXd x_next(critic.input_size(), cols);
  for (int hi = 0; hi < H; ++hi) {
    for (int k = 0; k < K; ++k) {
      const int c0 = (hi * K + k) * B;
      x.middleCols(c0, B) = critic.inputs(batch.states, batch.slots[k], heads[hi]);
      x_next.middleCols(c0, B) = critic.inputs(batch.next_states, batch.slots[k], heads[hi]);
    }
  }
  Mlp::Trace trace;
  Eigen::MatrixXd q = critic.online.forward(x, &trace);
  Eigen::MatrixXd q_next = critic.target.forward(x_next);

  std::vector<Eigen::MatrixXd> next_logits(K);
  for (int k = 0; k < K; ++k) next_logits[k] = actors[k].logits(batch.next_obs[k]);

  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(kNumActions, cols);
  double loss = 0.0;
  for (int hi = 0; hi < H; ++hi) {
    const int h = heads[hi];
    for (int k = 0; k < K; ++k) {
      for (int b = 0; b < B; ++b) {
        const int c = (hi * K + k) * B + b;
        auto lp = log_softmax(std::span<const double>(&next_logits[k](h * kNumActions, b), kNumActions));
        double v_next = 0.0;
        for (int a = 0; a < kNumActions; ++a) {
          v_next += std::exp(lp[a]) * (q_next(a, c) - cfg.entropy * lp[a]);
        }
        const double y = batch.rewards(h, b) + cfg.gamma * (1.0 - batch.done(b)) * v_next;
        const int act = batch.actions[k][b];
        const double diff = q(act, c) - y;
        loss += diff * diff;
        upstream(act, c) = 2.0 * diff / cols;
      }
    }
  }
  LossAndGrad out;
  out.loss = loss / cols;
  out.grad = critic.online.backward(trace, upstream);
  return out;
}

double critic_update(CentralCritic& critic, const TeamBatch& batch, std::span<const ActorNet> actors,
                     std::span<const int> heads, const SacConfig& cfg) {
  LossAndGrad lg = critic_loss(critic, batch, actors, heads, cfg);
  if (!std::isfinite(lg.loss)) throw Error(Errc::kNonFiniteLoss, "critic loss");
  critic.optimizer.apply(critic.online, std::move(lg.grad));
  return lg.loss;
}

std::vector<LossAndGrad> policy_loss(std::span<const ActorNet> actors, const CentralCritic& critic,
                                     const TeamBatch& batch, std::span<const int> heads, const SacConfig& cfg) {
  check_batch(batch, heads);
  if (static_cast<int>(actors.size()) != batch.members()) {
    throw Error(Errc::kDimensionMismatch, "one actor per team member required");
  }
  const int B = batch.size();
  const int H = static_cast<int>(heads.size());
  const double scale = 1.0 / (static_cast<double>(B) * H);
  std::vector<LossAndGrad> out(actors.size());
  for (int k = 0; k < batch.members(); ++k) {
    Mlp::Trace trace;
    Eigen::MatrixXd z = actors[k].logits(batch.obs[k], &trace);
    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    double loss = 0.0;
    for (int hi = 0; hi < H; ++hi) {
      const int h = heads[hi];
      Eigen::MatrixXd q = critic.online.forward(critic.inputs(batch.states, batch.slots[k], h));
      for (int b = 0; b < B; ++b) {
        auto lp = log_softmax(std::span<const double>(&z(h * kNumActions, b), kNumActions));
        std::array<double, kNumActions> p, c;
        double expected = 0.0;
        for (int a = 0; a < kNumActions; ++a) {
          p[a] = std::exp(lp[a]);
          c[a] = cfg.entropy * lp[a] - q(a, b);
          expected += p[a] * c[a];
        }
        loss += expected;
        // d/dz_a sum_a' p_a' c_a' = p_a (c_a - expected); the entropy terms cancel.
        for (int a = 0; a < kNumActions; ++a) upstream(h * kNumActions + a, b) = scale * p[a] * (c[a] - expected);
      }
    }
    out[k].loss = loss * scale;
    out[k].grad = actors[k].net.backward(trace, upstream);
  }
  return out;
}

double policy_update(std::span<ActorNet> actors, const CentralCritic& critic, const TeamBatch& batch,
                     std::span<const int> heads, const SacConfig& cfg) {
  std::vector<LossAndGrad> lg =
      policy_loss(std::span<const ActorNet>(actors.data(), actors.size()), critic, batch, heads, cfg);
  double mean = 0.0;
  for (const auto& l : lg) {
    if (!std::isfinite(l.loss)) throw Error(Errc::kNonFiniteLoss, "policy loss");
    mean += l.loss;
  }
  for (std::size_t k = 0; k < actors.size(); ++k) actors[k].optimizer.apply(actors[k].net, std::move(lg[k].grad));
  return mean / static_cast<double>(lg.size());
}

MetaSelector::MetaSelector(int num_heads, SelectorConfig config)
    : config_(config), theta_(num_heads, 0.0), head_sum_(num_heads, 0.0), head_count_(num_heads, 0) {
  if (num_heads <= 0) throw Error(Errc::kOutOfRange, "selector needs at least one head");
  if (!(config_.temperature > 0.0)) throw Error(Errc::kOutOfRange, "selector temperature must be positive");
}

std::vector<double> MetaSelector::probabilities() const {
  double hi = *std::max_element(theta_.begin(), theta_.end());
  std::vector<double> p(theta_.size());
  double sum = 0.0;
  for (std::size_t h = 0; h < theta_.size(); ++h) {
    p[h] = std::exp((theta_[h] - hi) / config_.temperature);
    sum += p[h];
  }
  for (double& v : p) v /= sum;
  return p;
}

int MetaSelector::sample(Rng& rng) const {
  std::vector<double> p = probabilities();
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t h = 0; h < p.size(); ++h) {
    acc += p[h];
    if (u < acc) return static_cast<int>(h);
  }
  return static_cast<int>(p.size()) - 1;
}

int MetaSelector::argmax() const {
  return static_cast<int>(std::max_element(theta_.begin(), theta_.end()) - theta_.begin());
}

void MetaSelector::update(double episode_return, int head) {
  if (!std::isfinite(episode_return)) throw Error(Errc::kNonFiniteLoss, "episode return");
  if (head < 0 || head >= num_heads()) throw Error(Errc::kOutOfRange, "policy head");
  const double advantage = episode_return - baseline();
  const double p = probabilities()[head];
  theta_[head] += config_.learning_rate * advantage * (1.0 - p);
  return_sum_ += episode_return;
  ++return_count_;
  head_sum_[head] += episode_return;
  ++head_count_[head];
}

double MetaSelector::head_mean_return(int head) const {
  return head_count_[head] > 0 ? head_sum_[head] / head_count_[head] : 0.0;
}

void MetaSelector::write(ByteWriter& w) const {
  w.f64(config_.learning_rate);
  w.f64(config_.temperature);
  w.u64(theta_.size());
  for (std::size_t h = 0; h < theta_.size(); ++h) {
    w.f64(theta_[h]);
    w.f64(head_sum_[h]);
    w.i64(head_count_[h]);
  }
  w.f64(return_sum_);
  w.i64(return_count_);
}

MetaSelector MetaSelector::read(ByteReader& r) {
  SelectorConfig cfg;
  cfg.learning_rate = r.f64();
  cfg.temperature = r.f64();
  const std::uint64_t n = r.u64();
  if (n == 0 || n > 64) throw Error(Errc::kCorruptCheckpoint, "selector head count");
  MetaSelector s(static_cast<int>(n), cfg);
  for (std::uint64_t h = 0; h < n; ++h) {
    s.theta_[h] = r.f64();
    s.head_sum_[h] = r.f64();
    s.head_count_[h] = r.i64();
  }
  s.return_sum_ = r.f64();
  s.return_count_ = r.i64();
  return s;
}

int global_state_size(const Environment& env) { return 2 * env.agent_slots() + 4 * env.target_slots() + 2; }

std::vector<double> global_state_features(const Environment& env, const WorldState& state) {
  const GridMap& map = env.map();
  auto nx = [&](int x) { return map.width > 1 ? static_cast<double>(x) / (map.width - 1) : 0.0; };
  auto ny = [&](int y) { return map.height > 1 ? static_cast<double>(y) / (map.height - 1) : 0.0; };
  std::vector<double> s;
  s.reserve(global_state_size(env));
  for (int i = 0; i < env.agent_slots(); ++i) {
    if (i < env.num_agents()) {
      s.push_back(nx(state.positions[i].x));
      s.push_back(ny(state.positions[i].y));
    } else {
      s.insert(s.end(), {0.0, 0.0});
    }
  }
  for (int m = 0; m < env.target_slots(); ++m) {
    if (m < env.num_targets()) {
      s.push_back(state.found[m]);
      s.push_back(state.spoofed[m]);
      s.push_back(nx(map.targets[m].x));
      s.push_back(ny(map.targets[m].y));
    } else {
      s.insert(s.end(), {0.0, 0.0, 0.0, 0.0});
    }
  }
  s.push_back(static_cast<double>(state.t) / env.config().t_max);
  const auto covered = std::count_if(state.team_visits.begin(), state.team_visits.end(), [](int v) { return v > 0; });
  s.push_back(static_cast<double>(covered) / map.cell_count());
  return s;
}

}  // namespace sar
