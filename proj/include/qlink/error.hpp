#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qlink {

enum class ErrorCode {
    // ingest
    MalformedHeader,
    UnparseableRow,
    DuplicateDate,
    EmptySeries,
    DegenerateSplit,
    NetworkError,
    HttpStatusError,
    // volatility
    InsufficientData,
    InvalidParams,
    AllZeroReturns,
    OptimizerFailure,
    NonStationaryFit,
    // signgen
    InvalidProbability,
    // forecast
    ZeroRegressor,
    ZeroVolatility,
    MisalignedInputs,
    // metrics
    LengthMismatch,
    DegenerateDenominator,
    // experiment / report
    InvalidConfig,
    EmptyInput,
    EmptyResult,
    IoError,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::UnparseableRow: return "UnparseableRow";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::HttpStatusError: return "HttpStatusError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::AllZeroReturns: return "AllZeroReturns";
    case ErrorCode::OptimizerFailure: return "OptimizerFailure";
    case ErrorCode::NonStationaryFit: return "NonStationaryFit";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::ZeroRegressor: return "ZeroRegressor";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::MisalignedInputs: return "MisalignedInputs";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure in the library surfaces as this exception. The message is
/// prefixed with "<module>: <Code>: " so CLI diagnostics are module-qualified.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string_view module, const std::string& detail)
        : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + detail),
          code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace qlink
