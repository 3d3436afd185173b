#pragma once

#include <stdexcept>
#include <string>

namespace posh {

// Error codes shared with the C API (see pocshield.h).
enum class ErrorCode : int {
    Ok = 0,
    MissingColumn = 1,
    DomainViolation = 2,
    UnparsableValue = 3,
    DegenerateSplit = 4,
    NoBenignSamples = 5,
    UnparsableUrl = 6,
    InvalidUrl = 7,
    EmptyFeatureSet = 8,
    PrevalenceUnreachable = 9,
    RepairBudgetExceeded = 10,
    SchemaMismatch = 11,
    ParseError = 12,
    SingleClassTraining = 13,
    NonFiniteFeature = 14,
    GridExhausted = 15,
    ZeroBaselineMetric = 16,
    EmptyMaliciousSet = 17,
    TooFewPairs = 18,
    ConfigError = 19,
    IoError = 20,
    BadHyperparam = 21,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace posh
