#pragma once

#include <stdexcept>
#include <string>

namespace metastab {

// Every failure mode gets its own type so callers (and the CLI error
// reporter) can name it without string matching.

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// -- model construction -------------------------------------------------

/// Integral of f*D over [alpha,beta] is not zero within tolerance.
struct BalanceViolation : Error { using Error::Error; };

/// Effective potential dips negative strictly inside (alpha,beta).
struct SignViolation : Error { using Error::Error; };

/// f does not vanish at a declared well, or has the wrong slope sign there.
struct NotBistable : Error { using Error::Error; };

/// Quadrature failed to reach the requested tolerance.
struct QuadratureFailure : Error { using Error::Error; };

/// Operation needs a non-degenerate model (positive slope / diffusivity at wells).
struct DegenerateModel : Error { using Error::Error; };

/// Malformed spec or layer configuration.
struct ConfigViolation : Error { using Error::Error; };

// -- profile construction ------------------------------------------------

/// Profile tabulation lost monotonicity (bad potential data).
struct NonMonotone : Error { using Error::Error; };

// -- solver ----------------------------------------------------------------

/// Field left the admissible interval by more than the safety margin.
struct StabilityViolation : Error { using Error::Error; };

/// Non-finite values appeared during time stepping.
struct BlowUp : Error { using Error::Error; };

// -- analysis ---------------------------------------------------------------

/// Exponent outside the admissible range (0, r*sqrt(2*lambda)).
struct InvalidA : Error { using Error::Error; };

/// Record lacks the series an audit needs.
struct MissingDiagnostics : Error { using Error::Error; };

/// Empty input where at least one element is required.
struct EmptyInput : Error { using Error::Error; };

/// Fewer samples than a fit needs.
struct InsufficientData : Error { using Error::Error; };

// -- harness ----------------------------------------------------------------

struct UnknownPreset : Error { using Error::Error; };

struct IOFailure : Error { using Error::Error; };

} // namespace metastab
