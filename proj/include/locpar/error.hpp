#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace locpar {

enum class Errc {
    EmptyWindow,
    SupportViolation,
    DomainViolation,
    InvalidArgument,
    GridTooLong,
    BadRatio,
    IndexOutOfRange,
    LengthMismatch,
    GridTooSmall,
    Infeasible,
    ParseError,
    NonpositivePrice,
    TooShort,
};

[[nodiscard]] const char* to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Calibration could not meet the risk budget at `step` (1-based) even at z_max.
class InfeasibleError : public Error {
public:
    InfeasibleError(std::size_t step, const std::string& what)
        : Error(Errc::Infeasible, what), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Input file could not be parsed; `row` is 1-based, 0 when the file itself is unreadable.
class ParseError : public Error {
public:
    ParseError(std::size_t row, const std::string& what)
        : Error(Errc::ParseError, what), row_(row) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

inline const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptyWindow: return "EmptyWindow";
        case Errc::SupportViolation: return "SupportViolation";
        case Errc::DomainViolation: return "DomainViolation";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::GridTooLong: return "GridTooLong";
        case Errc::BadRatio: return "BadRatio";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::GridTooSmall: return "GridTooSmall";
        case Errc::Infeasible: return "Infeasible";
        case Errc::ParseError: return "ParseError";
        case Errc::NonpositivePrice: return "NonpositivePrice";
        case Errc::TooShort: return "TooShort";
    }
    return "Unknown";
}

}  // namespace locpar
