#include "sar/error.h"

namespace sar {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kRaggedRows: return "RaggedRows";
    case Errc::kUnknownGlyph: return "UnknownGlyph";
    case Errc::kSpawnOnObstacle: return "SpawnOnObstacle";
    case Errc::kZeroDimensions: return "ZeroDimensions";
    case Errc::kInvalidMap: return "InvalidMap";
    case Errc::kInsufficientSpawns: return "InsufficientSpawns";
    case Errc::kJointActionLength: return "JointActionLength";
    case Errc::kInvalidAgent: return "InvalidAgent";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kArchitectureMismatch: return "ArchitectureMismatch";
    case Errc::kNonFiniteGradient: return "NonFiniteGradient";
    case Errc::kNonFiniteLoss: return "NonFiniteLoss";
    case Errc::kEmptyBatch: return "EmptyBatch";
    case Errc::kCapacityZero: return "CapacityZero";
    case Errc::kInsufficientEligibleCells: return "InsufficientEligibleCells";
    case Errc::kUnknownKey: return "UnknownKey";
    case Errc::kTypeMismatch: return "TypeMismatch";
    case Errc::kOutOfRange: return "OutOfRange";
    case Errc::kEncodingMismatch: return "EncodingMismatch";
    case Errc::kMismatchedPairing: return "MismatchedPairing";
    case Errc::kCorruptCheckpoint: return "CorruptCheckpoint";
    case Errc::kIo: return "Io";
    case Errc::kReplayDivergence: return "ReplayDivergence";
    case Errc::kTerminalState: return "TerminalState";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace sar
