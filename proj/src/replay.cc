#include "sar/replay.h"

#include "sar/error.h"

namespace sar {

double Transition::intrinsic_sum(int h) const {
  double s = 0.0;
  for (double v : intr[h]) s += v;
  return s;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) {
  if (capacity == 0) throw Error(Errc::kCapacityZero, "replay buffer capacity must be positive");
  slots_.resize(capacity);
}

void ReplayBuffer::push(std::shared_ptr<const Transition> t, double reward) {
  slots_[head_] = Entry{std::move(t), reward};
  head_ = (head_ + 1) % slots_.size();
  if (size_ < slots_.size()) ++size_;
}

const ReplayBuffer::Entry& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw Error(Errc::kOutOfRange, "replay index " + std::to_string(i));
  const std::size_t oldest = size_ < slots_.size() ? 0 : head_;
  return slots_[(oldest + i) % slots_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw Error(Errc::kEmptyBatch, "sampling from an empty buffer");
  std::vector<std::size_t> idx(n);
  std::uniform_int_distribution<std::size_t> dist(0, size_ - 1);
  for (auto& i : idx) i = dist(rng);
  return idx;
}

}  // namespace sar
