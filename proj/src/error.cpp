#include "hbi/error.hpp"

namespace hbi {

const char* error_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::BadFile: return "BadFile";
    case ErrorCode::MissingLevel: return "MissingLevel";
    case ErrorCode::ClusterCountExceedsTokens: return "ClusterCountExceedsTokens";
    case ErrorCode::TooFewTokens: return "TooFewTokens";
    case ErrorCode::UnloadedWeights: return "UnloadedWeights";
    case ErrorCode::ZeroSamples: return "ZeroSamples";
    case ErrorCode::IdenticalPlayers: return "IdenticalPlayers";
    case ErrorCode::PlayerOutOfRange: return "PlayerOutOfRange";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::EmptyModality: return "EmptyModality";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NonPositiveTau: return "NonPositiveTau";
    case ErrorCode::InconsistentAssignment: return "InconsistentAssignment";
    }
    return "UnknownError";
}

int error_exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::BadFile:
    case ErrorCode::MissingLevel:
    case ErrorCode::ClusterCountExceedsTokens:
    case ErrorCode::TooFewTokens:
    case ErrorCode::UnloadedWeights:
    case ErrorCode::ZeroSamples:
        return 2;
    default:
        return 3;
    }
}

} // namespace hbi
