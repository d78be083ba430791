#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gllab {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes, so keep the hierarchy flat.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Field shapes disagree with each other or with their grid.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A point or argument lies outside the region where the operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid parameter bundle (NormSpec, PoissonOptions, SolveOptions, ...).
class SpecError : public Error {
public:
    using Error::Error;
};

// Neumann data violating the divergence theorem.
class CompatibilityError : public Error {
public:
    using Error::Error;
};

// Input that makes the requested quantity meaningless (psi == 0, ...).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Boundary chart used outside its injectivity region.
class ChartError : public Error {
public:
    using Error::Error;
};

// Iterative method stopped before reaching its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (final residual " + format(residual) + ")"),
          residual_(residual) {}

    double residual() const { return residual_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }

    double residual_;
};

// A minimisation bracket without an interior minimum.
class BracketError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace gllab
