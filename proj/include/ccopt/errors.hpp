#pragma once

#include <stdexcept>
#include <string>

namespace ccopt {

// Stable error taxonomy used by the command-line front end:
// every failure surfaces as exactly one of these categories.
enum class ErrorCategory { config, cfl, solver, io };

inline const char* to_string(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::config: return "config";
        case ErrorCategory::cfl: return "cfl";
        case ErrorCategory::solver: return "solver";
        case ErrorCategory::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
        : std::runtime_error(message), category_(category) {}
    ErrorCategory category() const { return category_; }

  private:
    ErrorCategory category_;
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& message) : Error(ErrorCategory::config, message) {}
};

// Raised when a requested time step exceeds the advection stability bound.
// Carries the largest admissible step so callers can adapt.
class CflError : public Error {
  public:
    CflError(const std::string& message, double admissible_dt)
        : Error(ErrorCategory::cfl, message), admissible_dt_(admissible_dt) {}
    double admissible_dt() const { return admissible_dt_; }

  private:
    double admissible_dt_;
};

// Linear solver breakdown; carries the last relative residual.
class SolverError : public Error {
  public:
    SolverError(const std::string& message, double residual = 0.0)
        : Error(ErrorCategory::solver, message), residual_(residual) {}
    double residual() const { return residual_; }

  private:
    double residual_;
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& message) : Error(ErrorCategory::io, message) {}
};

}  // namespace ccopt
