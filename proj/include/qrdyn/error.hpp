#pragma once

#include <stdexcept>
#include <string>

namespace qrdyn {

// Broad failure categories; the C API and the CLI map these onto status and
// exit codes.
enum class ErrorKind {
    Config,      // invalid parameter or document
    Degeneracy,  // gapless mode where a non-degenerate one is required
    Integration, // ODE integration failed
    Contract,    // caller violated a precondition
    Numerical,   // a consistency check on computed values failed
    Domain,      // argument outside the validity domain of a formula
    Io,          // file system failure
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Integration: return "integration";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class DegeneracyError : public Error {
public:
    DegeneracyError(const std::string& what, double k, double h)
        : Error(ErrorKind::Degeneracy, what), k_(k), h_(h) {}

    double k() const noexcept { return k_; }
    double h() const noexcept { return h_; }

private:
    double k_;
    double h_;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double k, double t)
        : Error(ErrorKind::Integration, what), k_(k), t_(t) {}

    double k() const noexcept { return k_; }
    double t() const noexcept { return t_; }

private:
    double k_;
    double t_;
};

class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

} // namespace qrdyn
