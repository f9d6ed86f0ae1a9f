#pragma once

#include <stdexcept>
#include <string>

namespace spinring {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated an operation contract (dimension mismatch, bad state).
class ContractViolation : public Error {
  public:
    using Error::Error;
};

/// An argument is outside its mathematical domain (odd N, site out of range).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A lookup failed (basis code not present in a sector).
class LookupError : public Error {
  public:
    using Error::Error;
};

/// An iterative solver did not converge within its budget.
class ConvergenceError : public Error {
  public:
    ConvergenceError(const std::string& what, double best_residual)
        : Error(what), best_residual(best_residual) {}
    double best_residual;
};

/// A truncated expansion could not reach the requested accuracy.
class PrecisionError : public Error {
  public:
    PrecisionError(const std::string& what, double achieved_bound)
        : Error(what), achieved_bound(achieved_bound) {}
    double achieved_bound;
};

/// A projective measurement outcome has (numerically) zero probability.
class ImpossibleOutcomeError : public Error {
  public:
    ImpossibleOutcomeError(const std::string& what, double probability)
        : Error(what), probability(probability) {}
    double probability;
};

/// File input/output failure; carries the offending path in the message.
class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace spinring
