/// @file error.h
/// @brief Error codes and the exception type thrown by the core library

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmc {

enum class ErrorCode {
    kSchemaViolation,
    kEmptyInput,
    kEmptySample,
    kEmptyWindow,
    kZeroExpected,
    kDegenerateLabels,
    kZeroVariance,
    kInvalidRange,
    kEmptyEffectiveSample,
    kInsufficientWindows,
    kNonPositiveScale,
    kCalibrationMismatch,
    kSkippedWindow,
    kDimensionMismatch,
    kNonFinite,
    kEmptyPool,
    kInvalidScenarioDates,
    kInvalidConfig,
    kParse,
    kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mmc
