#include "sar/nn.h"

#include <cmath>

#include "sar/error.h"
#include "sar/serialize.h"

namespace sar {

namespace {

constexpr std::string_view kMlpMagic = "SARMLP01";

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(Errc::kNonFiniteGradient, what);
}

}  // namespace

double GradientSet::squared_norm() const {
  double s = 0.0;
  for (const auto& w : weights) s += w.squaredNorm();
  for (const auto& b : biases) s += b.squaredNorm();
  return s;
}

void GradientSet::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

bool GradientSet::all_finite() const {
  for (const auto& w : weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw Error(Errc::kDimensionMismatch, "an Mlp needs at least two layer sizes");
  for (int s : sizes_) {
    if (s <= 0) throw Error(Errc::kDimensionMismatch, "layer widths must be positive");
  }
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(sizes_[l], sizes_[l - 1]));
    biases_.push_back(Eigen::VectorXd::Zero(sizes_[l]));
  }
}

Mlp Mlp::uniform_init(std::vector<int> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  for (int l = 0; l < net.num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.weights_[l].cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index c = 0; c < net.weights_[l].cols(); ++c) {
      for (Eigen::Index r = 0; r < net.weights_[l].rows(); ++r) net.weights_[l](r, c) = dist(rng);
    }
    for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) net.biases_[l](r) = dist(rng);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Trace* trace) const {
  if (input.rows() != input_size()) {
    throw Error(Errc::kDimensionMismatch, "input has " + std::to_string(input.rows()) + " rows, expected " +
                                              std::to_string(input_size()));
  }
  if (trace) {
    trace->activations.clear();
    trace->activations.push_back(input);
  }
  Eigen::MatrixXd a = input;
  for (int l = 0; l < num_layers(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < num_layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (trace) trace->activations.push_back(a);
  }
  return a;
}

GradientSet Mlp::backward(const Trace& trace, const Eigen::MatrixXd& upstream) const {
  if (static_cast<int>(trace.activations.size()) != num_layers() + 1) {
    throw Error(Errc::kDimensionMismatch, "trace does not belong to this network");
  }
  const Eigen::MatrixXd& out = trace.activations.back();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols()) {
    throw Error(Errc::kDimensionMismatch, "upstream gradient shape differs from output");
  }
  GradientSet g;
  g.weights.resize(num_layers());
  g.biases.resize(num_layers());
  Eigen::MatrixXd delta = upstream;
  for (int l = num_layers() - 1; l >= 0; --l) {
    const Eigen::MatrixXd& prev = trace.activations[l];
    g.weights[l] = delta * prev.transpose();
    g.biases[l] = delta.rowwise().sum();
    Eigen::MatrixXd back = weights_[l].transpose() * delta;
    if (l > 0) back = back.cwiseProduct((prev.array() > 0.0).cast<double>().matrix());
    delta = std::move(back);
  }
  g.input = std::move(delta);
  return g;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (int l = 0; l < num_layers(); ++l) {
    flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
    flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  return flat;
}

void Mlp::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error(Errc::kDimensionMismatch, "flat parameter count");
  std::size_t k = 0;
  for (int l = 0; l < num_layers(); ++l) {
    std::copy_n(flat.data() + k, weights_[l].size(), weights_[l].data());
    k += weights_[l].size();
    std::copy_n(flat.data() + k, biases_[l].size(), biases_[l].data());
    k += biases_[l].size();
  }
}

bool operator==(const Mlp& a, const Mlp& b) {
  return a.sizes_ == b.sizes_ && a.weights_ == b.weights_ && a.biases_ == b.biases_;
}

Optimizer::Optimizer(OptimizerConfig config, const Mlp& net) : config_(config) {
  if (!(config_.learning_rate > 0.0)) throw Error(Errc::kOutOfRange, "learning rate must be positive");
  if (config_.kind == OptimizerKind::kAdam) {
    for (int l = 0; l < net.num_layers(); ++l) {
      m_w_.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
      v_w_.push_back(m_w_.back());
      m_b_.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
      v_b_.push_back(m_b_.back());
    }
  }
}

void Optimizer::apply(Mlp& net, GradientSet grads) {
  if (static_cast<int>(grads.weights.size()) != net.num_layers() ||
      static_cast<int>(grads.biases.size()) != net.num_layers()) {
    throw Error(Errc::kDimensionMismatch, "gradient set does not match network");
  }
  for (int l = 0; l < net.num_layers(); ++l) {
    if (grads.weights[l].rows() != net.weight(l).rows() || grads.weights[l].cols() != net.weight(l).cols() ||
        grads.biases[l].size() != net.bias(l).size()) {
      throw Error(Errc::kDimensionMismatch, "gradient shape differs from parameter shape");
    }
    require_finite(grads.weights[l], "weight gradient");
    require_finite(grads.biases[l], "bias gradient");
  }
  if (config_.clip_norm > 0.0) {
    const double norm = std::sqrt(grads.squared_norm());
    if (norm > config_.clip_norm) grads.scale(config_.clip_norm / norm);
  }
  ++steps_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (int l = 0; l < net.num_layers(); ++l) {
      net.weight(l) -= lr * grads.weights[l];
      net.bias(l) -= lr * grads.biases[l];
    }
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (int l = 0; l < net.num_layers(); ++l) {
    m_w_[l] = b1 * m_w_[l] + (1.0 - b1) * grads.weights[l];
    v_w_[l] = b2 * v_w_[l] + (1.0 - b2) * grads.weights[l].cwiseAbs2();
    m_b_[l] = b1 * m_b_[l] + (1.0 - b1) * grads.biases[l];
    v_b_[l] = b2 * v_b_[l] + (1.0 - b2) * grads.biases[l].cwiseAbs2();
    net.weight(l).array() -= lr * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps);
    net.bias(l).array() -= lr * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps);
  }
}

void Optimizer::write(ByteWriter& w) const {
  w.u8(config_.kind == OptimizerKind::kAdam ? 1 : 0);
  w.f64(config_.learning_rate);
  w.f64(config_.beta1);
  w.f64(config_.beta2);
  w.f64(config_.epsilon);
  w.f64(config_.clip_norm);
  w.i64(steps_);
  w.u64(m_w_.size());
  for (std::size_t l = 0; l < m_w_.size(); ++l) {
    w.u64(m_w_[l].rows());
    w.u64(m_w_[l].cols());
    w.f64s(m_w_[l].data(), m_w_[l].size());
    w.f64s(v_w_[l].data(), v_w_[l].size());
    w.u64(m_b_[l].size());
    w.f64s(m_b_[l].data(), m_b_[l].size());
    w.f64s(v_b_[l].data(), v_b_[l].size());
  }
}

Optimizer Optimizer::read(ByteReader& r) {
  Optimizer o;
  o.config_.kind = r.u8() ? OptimizerKind::kAdam : OptimizerKind::kSgd;
  o.config_.learning_rate = r.f64();
  o.config_.beta1 = r.f64();
  o.config_.beta2 = r.f64();
  o.config_.epsilon = r.f64();
  o.config_.clip_norm = r.f64();
  o.steps_ = r.i64();
  const std::uint64_t layers = r.u64();
  if (layers > 64) throw Error(Errc::kCorruptCheckpoint, "implausible optimizer layer count");
  for (std::uint64_t l = 0; l < layers; ++l) {
    const auto rows = static_cast<Eigen::Index>(r.u64());
    const auto cols = static_cast<Eigen::Index>(r.u64());
    if (static_cast<std::size_t>(rows * cols) * 16 > r.remaining()) throw Error(Errc::kCorruptCheckpoint, "moments");
    o.m_w_.emplace_back(rows, cols);
    o.v_w_.emplace_back(rows, cols);
    r.f64s(o.m_w_.back().data(), o.m_w_.back().size());
    r.f64s(o.v_w_.back().data(), o.v_w_.back().size());
    const auto n = static_cast<Eigen::Index>(r.u64());
    if (static_cast<std::size_t>(n) * 16 > r.remaining()) throw Error(Errc::kCorruptCheckpoint, "moments");
    o.m_b_.emplace_back(n);
    o.v_b_.emplace_back(n);
    r.f64s(o.m_b_.back().data(), n);
    r.f64s(o.v_b_.back().data(), n);
  }
  return o;
}

bool operator==(const Optimizer& a, const Optimizer& b) {
  return a.config_.kind == b.config_.kind && a.config_.learning_rate == b.config_.learning_rate &&
         a.config_.beta1 == b.config_.beta1 && a.config_.beta2 == b.config_.beta2 &&
         a.config_.epsilon == b.config_.epsilon && a.config_.clip_norm == b.config_.clip_norm &&
         a.steps_ == b.steps_ && a.m_w_ == b.m_w_ && a.v_w_ == b.v_w_ && a.m_b_ == b.m_b_ && a.v_b_ == b.v_b_;
}

void polyak(Mlp& target, const Mlp& online, double tau) {
  if (!target.same_architecture(online)) throw Error(Errc::kArchitectureMismatch, "polyak on different shapes");
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(Errc::kOutOfRange, "tau must lie in (0, 1]");
  for (int l = 0; l < target.num_layers(); ++l) {
    target.weight(l) = (1.0 - tau) * target.weight(l) + tau * online.weight(l);
    target.bias(l) = (1.0 - tau) * target.bias(l) + tau * online.bias(l);
  }
}

void write_mlp(ByteWriter& w, const Mlp& net) {
  w.u64(net.layer_sizes().size());
  for (int s : net.layer_sizes()) w.u64(static_cast<std::uint64_t>(s));
  std::vector<double> flat = net.flatten();
  w.f64s(flat.data(), flat.size());
}

Mlp read_mlp(ByteReader& r) {
  const std::uint64_t n = r.u64();
  if (n < 2 || n > 64) throw Error(Errc::kCorruptCheckpoint, "implausible layer count");
  std::vector<int> sizes;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t s = r.u64();
    if (s == 0 || s > (1u << 20)) throw Error(Errc::kCorruptCheckpoint, "implausible layer width");
    sizes.push_back(static_cast<int>(s));
  }
  Mlp net(sizes);
  if (net.parameter_count() * 8 > r.remaining()) throw Error(Errc::kCorruptCheckpoint, "parameters truncated");
  std::vector<double> flat(net.parameter_count());
  r.f64s(flat.data(), flat.size());
  net.assign(flat);
  return net;
}

std::string save_mlp(const Mlp& net) {
  ByteWriter w;
  write_mlp(w, net);
  return seal(kMlpMagic, w.bytes());
}

Mlp load_mlp(std::string_view bytes) {
  ByteReader r(unseal(kMlpMagic, bytes));
  Mlp net = read_mlp(r);
  if (!r.done()) throw Error(Errc::kCorruptCheckpoint, "trailing bytes");
  return net;
}

}  // namespace sar
