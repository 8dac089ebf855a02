#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sar/rng.h"

namespace sar {

class ByteWriter;
class ByteReader;

// Gradients shaped like an Mlp, plus the gradient with respect to the input.
struct GradientSet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd input;

  double squared_norm() const;  // parameters only
  void scale(double factor);
  bool all_finite() const;
};

// Dense network: ReLU on hidden layers, identity output. Samples are columns.
class Mlp {
 public:
  struct Trace {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden..., output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);  // all parameters zero
  static Mlp uniform_init(std::vector<int> layer_sizes, Rng& rng);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(weights_.size()); }
  std::size_t parameter_count() const;

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Trace* trace = nullptr) const;
  GradientSet backward(const Trace& trace, const Eigen::MatrixXd& upstream) const;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  Eigen::MatrixXd& weight(int layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  Eigen::VectorXd& bias(int layer) { return biases_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }

  bool same_architecture(const Mlp& other) const { return sizes_ == other.sizes_; }
  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // (out x in)
  std::vector<Eigen::VectorXd> biases_;
};

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;  // global L2 clip; 0 disables
};

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimizerConfig config, const Mlp& net);

  // Throws NonFiniteGradient before touching any parameter.
  void apply(Mlp& net, GradientSet grads);

  const OptimizerConfig& config() const { return config_; }
  long steps() const { return steps_; }

  void write(ByteWriter& w) const;
  static Optimizer read(ByteReader& r);
  friend bool operator==(const Optimizer& a, const Optimizer& b);

 private:
  OptimizerConfig config_;
  long steps_ = 0;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
};

// target <- (1 - tau) target + tau online, element-wise.
void polyak(Mlp& target, const Mlp& online, double tau);

void write_mlp(ByteWriter& w, const Mlp& net);
Mlp read_mlp(ByteReader& r);

// Standalone sealed network file: versioned, checksummed, bit-exact.
std::string save_mlp(const Mlp& net);
Mlp load_mlp(std::string_view bytes);

}  // namespace sar
