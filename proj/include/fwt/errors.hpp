#pragma once

#include <stdexcept>
#include <string>

namespace fwt {

// Error taxonomy shared across the library. The CLI maps these onto process
// exit codes: parse 2, validity 3, numerical 4, I/O 5.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operands live in different discretization bases, or a dimension does not
// match the basis metadata.
struct InvalidBasis : Error {
    using Error::Error;
};

// The commuting-case transform was requested but the required commutators do
// not vanish within tolerance.
struct NotExactCase : Error {
    using Error::Error;
};

// Principal matrix square root undefined: an eigenvalue lies outside the open
// right half plane (e.g. supercritical potential).
struct SingularSqrt : Error {
    using Error::Error;
};

// The sign function of the Hamiltonian is ill-defined: an eigenvalue sits
// within tolerance of zero, so upper and lower spectra are not separated.
struct GapClosure : Error {
    using Error::Error;
};

// A documented capability boundary (e.g. time-dependent fields, oversized
// evolution basis), not a numerical failure.
struct Unsupported : Error {
    using Error::Error;
};

// Supplied potentials and strengths disagree (E != -grad Phi or H != curl A).
struct FieldConsistencyError : Error {
    using Error::Error;
};

// A field was evaluated outside its table domain.
struct FieldDomainError : Error {
    using Error::Error;
};

// Adaptive step-size underflow.
struct StiffnessError : Error {
    using Error::Error;
};

// Semiclassical validity precondition failed and the caller did not override.
struct ValidityError : Error {
    using Error::Error;
};

// Scenario file malformed: unknown key, wrong type, missing field.
struct ParseError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace fwt
