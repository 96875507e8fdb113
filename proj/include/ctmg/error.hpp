#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctmg {

enum class ErrorCode {
    Syntax,
    Semantic,
    InvalidModel,
    UnknownLocation,
    UnknownAction,
    NotContinuous,
    Cycle,
    DisabledAction,
    GameOnSinglePlayer,
    MultiPlayer,
    NotUniform,
    RateTooLow,
    CapExceeded,
    MalformedArtifact,
    OutOfRange,
    InvalidArgument,
    TimeBoundMismatch,
};

std::string_view errorCodeName(ErrorCode code);

/// Base class of every error raised by the library. Violations found by
/// `validate` are data, not errors; they only become an `Error` when an
/// operation requires a valid model.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::size_t line, std::size_t column, std::string expected);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string expected_;
};

} // namespace ctmg
