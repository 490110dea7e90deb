#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rwlt {

enum class ErrorKind {
    NotAProbabilityVector,
    NotMeanZero,
    OutOfRange,
    UnsupportedL,
    ExcursionTooLong,
    PopulationCapExceeded,
    TruncationBudgetExceeded,
    EmptySample,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Thrown when an excursion would need more steps than its budget allows.
class ExcursionTooLong : public Error {
public:
    explicit ExcursionTooLong(std::uint64_t partial_length)
        : Error(ErrorKind::ExcursionTooLong,
                "excursion exceeded step budget after " + std::to_string(partial_length) + " steps"),
          partial_length_(partial_length) {}

    std::uint64_t partial_length() const noexcept { return partial_length_; }

private:
    std::uint64_t partial_length_;
};

}  // namespace rwlt
