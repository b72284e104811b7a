#pragma once

#include <stdexcept>
#include <string>

namespace spacs {

// Base of every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI for structured error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define SPACS_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                         \
    public:                                                             \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

SPACS_DEFINE_ERROR(InvalidArgument);
SPACS_DEFINE_ERROR(IndexOutOfRange);
SPACS_DEFINE_ERROR(MassOutsideGrid);
SPACS_DEFINE_ERROR(InsufficientHeadroom);
SPACS_DEFINE_ERROR(ProbabilityOutOfRange);
SPACS_DEFINE_ERROR(RatioBelowUnity);
SPACS_DEFINE_ERROR(DensityNegativeBeyondTolerance);
SPACS_DEFINE_ERROR(DegenerateFit);
SPACS_DEFINE_ERROR(GridTooCoarse);
SPACS_DEFINE_ERROR(InsufficientPhaseCoverage);
SPACS_DEFINE_ERROR(TheoryNotPSD);
SPACS_DEFINE_ERROR(FormatError);
SPACS_DEFINE_ERROR(MissingInput);
SPACS_DEFINE_ERROR(ConfigError);

#undef SPACS_DEFINE_ERROR

// Raised by state constructors when the basis cannot hold the requested
// state to the policy tolerance. Carries the probability mass that would
// have been dropped.
class TruncationTooSmall : public Error {
public:
    TruncationTooSmall(const std::string& what, double tail_mass)
        : Error("TruncationTooSmall", what), tail_mass_(tail_mass) {}

    double tail_mass() const noexcept { return tail_mass_; }

private:
    double tail_mass_;
};

}  // namespace spacs
