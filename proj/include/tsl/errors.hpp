#pragma once

#include <stdexcept>
#include <string>

namespace tsl {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSelfAdjointError : Error {
    using Error::Error;
};

/// Matrix is neither self-adjoint nor skew-adjoint to tolerance.
struct NotNormalError : Error {
    using Error::Error;
};

struct NoConvergenceError : Error {
    using Error::Error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

/// A computed reduction coefficient failed its adjointness-kind check.
struct AdjointnessViolatedError : Error {
    using Error::Error;
};

/// An eigenvalue sits inside the (1 +- 1e-6) band around the spectral
/// splitting threshold; the caller should perturb mu.
struct DegenerateThresholdError : Error {
    using Error::Error;
};

struct SymbolNotSkewError : Error {
    using Error::Error;
};

/// The well-prepared chain cannot be solved at step j for some mode.
struct ChainUnsolvableError : Error {
    ChainUnsolvableError(int step, std::string mode, const std::string& what)
        : Error(what), step(step), mode(std::move(mode)) {}
    int step;
    std::string mode;
};

struct A0SingularError : Error {
    using Error::Error;
};

struct AmplitudeEscapeError : Error {
    using Error::Error;
};

struct StepCollapseError : Error {
    using Error::Error;
};

struct ConstraintDriftError : Error {
    using Error::Error;
};

struct InsufficientSamplingError : Error {
    using Error::Error;
};

struct UnsupportedSystemError : Error {
    using Error::Error;
};

struct ZeroWavenumberError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace tsl
