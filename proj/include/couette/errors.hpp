#pragma once

#include <stdexcept>
#include <string>

namespace couette {

/// Bad input: malformed grids, out-of-range parameters, missing files.
/// The CLI maps this family to exit code 1.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation that was set up correctly but could not be carried out
/// to the requested accuracy. The CLI maps this family to exit code 2.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Some retained mode's sheared frequency left the resolved band.
struct OffGridShift : NumericalError {
    OffGridShift(const std::string& what, int k_index)
        : NumericalError(what), k_index(k_index) {}
    int k_index;
};

/// CFL violation; carries a time step that would have been accepted.
struct StepRejected : NumericalError {
    StepRejected(const std::string& what, double suggested_dt)
        : NumericalError(what), suggested_dt(suggested_dt) {}
    double suggested_dt;
};

/// A per-mode weight exceeded the overflow guard.
struct WeightOverflow : NumericalError {
    WeightOverflow(const std::string& what, int k_index, int xi_index)
        : NumericalError(what), k_index(k_index), xi_index(xi_index) {}
    int k_index;
    int xi_index;
};

struct QuadratureError : NumericalError {
    QuadratureError(const std::string& what, double achieved_tolerance)
        : NumericalError(what), achieved_tolerance(achieved_tolerance) {}
    double achieved_tolerance;
};

/// Both bisection endpoints classify the same way.
struct BracketInvalid : ValidationError {
    using ValidationError::ValidationError;
};

struct InsufficientData : ValidationError {
    using ValidationError::ValidationError;
};

}  // namespace couette
