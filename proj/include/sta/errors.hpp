#pragma once

#include <stdexcept>
#include <string>

namespace sta {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// An argument lies outside the domain of the operation (t outside [0, tau], b <= 0, ...).
class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// A parameter set violates a type invariant (m > 0, omega > 0, ...).
class InvalidParameter : public Error {
  public:
    explicit InvalidParameter(const std::string& msg) : Error(msg) {}
};

/// omega^2(t) <= 0: the adiabatic eigenbasis is undefined.
class InvertedTrapError : public Error {
  public:
    explicit InvertedTrapError(const std::string& msg) : Error(msg) {}
};

class IntegrationError : public Error {
  public:
    explicit IntegrationError(const std::string& msg) : Error(msg) {}
};

class BracketError : public Error {
  public:
    explicit BracketError(const std::string& msg) : Error(msg) {}
};

/// Symplectic eigenvalue below 1/2: the covariance violates the uncertainty principle.
class UnphysicalStateError : public Error {
  public:
    explicit UnphysicalStateError(const std::string& msg) : Error(msg) {}
};

class NumericalConsistencyError : public Error {
  public:
    explicit NumericalConsistencyError(const std::string& msg) : Error(msg) {}
};

/// Stroke duration shorter than the trap-inversion cut-off time.
class CutoffViolationError : public Error {
  public:
    explicit CutoffViolationError(const std::string& msg) : Error(msg) {}
};

/// Fock-basis truncation too small for the requested accuracy.
class TruncationError : public Error {
  public:
    explicit TruncationError(const std::string& msg) : Error(msg) {}
};

class PropagationError : public Error {
  public:
    explicit PropagationError(const std::string& msg) : Error(msg) {}
};

}  // namespace sta
