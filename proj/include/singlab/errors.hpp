#pragma once

#include <stdexcept>
#include <string>

namespace singlab {

/// Base class for all singlab errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Coefficient evaluated outside its domain or inside the singular-point guard.
struct EvalDomainError : Error {
    explicit EvalDomainError(const std::string& msg) : Error(msg) {}
};

/// Adaptive quadrature failed to converge (typically a non-integrable singularity).
struct QuadratureError : Error {
    explicit QuadratureError(const std::string& msg) : Error(msg) {}
};

/// Closed-form admissibility predicate and numerical norm disagree.
struct InconsistencyError : Error {
    explicit InconsistencyError(const std::string& msg) : Error(msg) {}
};

/// Regularization-rule denominator vanished; parameters outside theorem scope.
struct DegenerateExponentError : Error {
    explicit DegenerateExponentError(const std::string& msg) : Error(msg) {}
};

/// ODE integrator failure (step underflow near the singular time, non-finite state).
struct SolverError : Error {
    explicit SolverError(const std::string& msg) : Error(msg) {}
};

/// A measured energy trace exceeded its Gronwall bound beyond slack.
struct CertificateViolation : Error {
    double worst_time;
    double worst_ratio;
    CertificateViolation(const std::string& msg, double t, double ratio)
        : Error(msg), worst_time(t), worst_ratio(ratio) {}
};

}  // namespace singlab
