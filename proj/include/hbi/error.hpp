#pragma once

#include <stdexcept>
#include <string>

namespace hbi {

/// Every failure the library reports. Codes split into two classes for the
/// CLI exit-code contract: configuration problems (exit 2) and numeric-domain
/// violations (exit 3).
enum class ErrorCode {
    // configuration class
    ConfigError,
    BadFile,
    MissingLevel,
    ClusterCountExceedsTokens,
    TooFewTokens,
    UnloadedWeights,
    ZeroSamples,
    // numeric-domain class
    IdenticalPlayers,
    PlayerOutOfRange,
    EnumerationTooLarge,
    EmptyModality,
    DimMismatch,
    ShapeMismatch,
    ZeroNormRow,
    NonFiniteInput,
    NonSquare,
    NonPositiveTau,
    InconsistentAssignment,
};

const char* error_name(ErrorCode code);

/// Exit code class for the CLI: 2 for configuration errors, 3 for
/// numeric-domain errors.
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace hbi
