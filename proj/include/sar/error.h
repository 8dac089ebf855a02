#pragma once

#include <stdexcept>
#include <string>

namespace sar {

enum class Errc {
  kRaggedRows,
  kUnknownGlyph,
  kSpawnOnObstacle,
  kZeroDimensions,
  kInvalidMap,
  kInsufficientSpawns,
  kJointActionLength,
  kInvalidAgent,
  kDimensionMismatch,
  kArchitectureMismatch,
  kNonFiniteGradient,
  kNonFiniteLoss,
  kEmptyBatch,
  kCapacityZero,
  kInsufficientEligibleCells,
  kUnknownKey,
  kTypeMismatch,
  kOutOfRange,
  kEncodingMismatch,
  kMismatchedPairing,
  kCorruptCheckpoint,
  kIo,
  kReplayDivergence,
  kTerminalState,
};

const char* errc_name(Errc code);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sar
