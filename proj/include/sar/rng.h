#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sar {

using Rng = std::mt19937_64;

// Tags for child streams split off a master seed. Values are part of the
// reproducibility contract; never renumber.
enum class Stream : std::uint64_t {
  kReset = 1,
  kDecoy = 2,
  kAction = 3,
  kHead = 4,
  kInit = 5,
  kReplay = 6,
  kTargets = 7,
  kEvalSeed = 8,
  kEvalAgent = 9,
  kEpisode = 10,
};

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based derivation: the child seed depends only on (master, path),
// never on how many values other streams have consumed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

Rng child_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

// Uniform integer in [0, n).
int uniform_index(Rng& rng, int n);
double uniform01(Rng& rng);

}  // namespace sar
