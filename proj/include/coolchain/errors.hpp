#pragma once

#include <stdexcept>
#include <string>

namespace coolchain {

// Base class for everything thrown by this library, so callers can catch one
// type at the CLI boundary and map it to an exit code.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Precondition violations: bad sizes, negative temperatures, unknown config
// keys, and the like.
class invalid_input : public error {
 public:
  explicit invalid_input(const std::string& what) : error(what) {}
};

// A run configuration that failed to parse or validate.  Distinct from
// invalid_input so the CLI can map it to its own exit code; the message
// carries the offending key path.
class config_error : public error {
 public:
  explicit config_error(const std::string& what) : error(what) {}
};

// An iterative method exhausted its budget without meeting its tolerance.
// Carries the residual reached so callers can report how close it got.
class convergence_failure : public error {
 public:
  convergence_failure(const std::string& what, double residual)
      : error(what), residual(residual) {}
  double residual;
};

// The requested configuration has no stable equilibrium (e.g. a transverse
// confinement too weak to hold the chain linear).
class instability_detected : public error {
 public:
  explicit instability_detected(const std::string& what) : error(what) {}
};

// A non-diagonalisable (or numerically near-defective) drift matrix.  The
// message suggests the standard remedy: perturb one damping rate by ~1e-9.
class degenerate_spectrum : public error {
 public:
  explicit degenerate_spectrum(const std::string& what) : error(what) {}
};

// Asking for a stationary state of a system that has none (some mode is
// undamped or unstable).
class no_steady_state : public error {
 public:
  explicit no_steady_state(const std::string& what) : error(what) {}
};

// An eigenvalue-pair denominator vanished while its driving term did not, so
// the closed-form propagator has a genuinely secular term.
class singular_term : public error {
 public:
  explicit singular_term(const std::string& what) : error(what) {}
};

// A relaxation-time query on a series that never settles to within the
// requested band of its asymptote.
class not_relaxed : public error {
 public:
  not_relaxed(const std::string& what, double discrepancy)
      : error(what), discrepancy(discrepancy) {}
  double discrepancy;
};

// Internal consistency check failed (imaginary residue above tolerance,
// non-finite intermediate, ...).  Indicates a bug or a pathological input.
class numerical_inconsistency : public error {
 public:
  explicit numerical_inconsistency(const std::string& what) : error(what) {}
};

}  // namespace coolchain
