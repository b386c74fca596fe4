#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace phaseonium {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Error taxonomy. The CLI maps ConfigError to exit code 2 and every other
// phaseonium::Error to exit code 3.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Argument outside the physical domain of an operation (e.g. population > 1).
struct DomainError : Error {
    using Error::Error;
};

/// Scenario or profile configuration that cannot give accurate results.
struct ConfigError : Error {
    using Error::Error;
};

/// Kernel requested outside the tabulated detuning span.
struct ExtrapolationError : Error {
    using Error::Error;
};

/// Time window clips the pulse.
struct WindowError : Error {
    using Error::Error;
};

/// Closed-form solver called outside its validity domain.
struct WrongSolverError : Error {
    using Error::Error;
};

/// Numerical integration lost stability; message suggests a refinement.
struct ResolutionError : Error {
    using Error::Error;
};

/// A normal-mode decomposition was requested for an incoherent medium.
struct UndefinedModesError : Error {
    using Error::Error;
};

}  // namespace phaseonium
