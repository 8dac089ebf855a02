#pragma once

#include <array>
#include <memory>
#include <vector>

#include "sar/marl.h"
#include "sar/rng.h"

namespace sar {

// One joint step as stored in the replay buffers. The reward scalar is kept
// outside so D1 and D2 can share the same record.
struct Transition {
  std::vector<float> state;
  std::vector<float> next_state;
  std::vector<std::vector<float>> obs;       // per agent
  std::vector<std::vector<float>> next_obs;  // per agent
  std::vector<int> actions;                  // per agent
  bool done = false;                         // terminal (all targets found)
  int head = 0;                              // head that generated the step
  // Frozen intrinsic values intr[head][k] of the k-th cooperative agent.
  std::array<std::vector<double>, kNumHeads> intr;
  double beta = 0.0;

  double intrinsic_sum(int h) const;
};

// Bounded FIFO; index 0 is the oldest entry.
class ReplayBuffer {
 public:
  struct Entry {
    std::shared_ptr<const Transition> transition;
    double reward = 0.0;
  };

  explicit ReplayBuffer(std::size_t capacity);

  void push(std::shared_ptr<const Transition> t, double reward);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return slots_.size(); }
  const Entry& at(std::size_t i) const;
  // n indices drawn uniformly with replacement from [0, size).
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::vector<Entry> slots_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
};

}  // namespace sar
