#pragma once

// Error taxonomy shared by all modules. Everything derives from Error so
// callers can catch one base; the CLI maps subtypes to exit codes.

#include <stdexcept>
#include <string>

namespace ggethermo {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A constructed object failed its defining algebraic invariant
// (hermiticity, trace, positivity, unitarity, occupation bookkeeping, ...).
class InvariantError : public Error {
public:
    using Error::Error;
};

// Operands with incompatible shapes, or dimensions beyond the dense cap.
class DimensionError : public Error {
public:
    using Error::Error;
};

// An iterative solver stopped without meeting its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& msg, double residual, bool out_of_range)
        : Error(msg), residual(residual), out_of_range(out_of_range) {}
    double residual;
    bool out_of_range;  // iterates left the admissible region (divergence)
};

// x/y is rational with combo spacing |y|/v above tolerance: the target sits
// in the measure-zero excluded set and no integer combination can reach it.
class ExcludedRatioError : public Error {
public:
    ExcludedRatioError(const std::string& msg, long long u, long long v, double spacing)
        : Error(msg), u(u), v(v), spacing(spacing) {}
    long long u, v;
    double spacing;
};

// A planner or search hit its resource caps before reaching the target.
class ResourceError : public Error {
public:
    ResourceError(const std::string& msg, double achieved_primary = 0.0,
                  double achieved_cost = 0.0, long long steps = 0)
        : Error(msg), achieved_primary(achieved_primary),
          achieved_cost(achieved_cost), steps(steps) {}
    double achieved_primary;  // e.g. accumulated |dA_b|
    double achieved_cost;     // e.g. accumulated dF_b
    long long steps;
};

// Strict conservation requested for inputs that cannot support it
// (non-commuting charges outside their joint eigenbasis).
class UnsupportedModeError : public Error {
public:
    using Error::Error;
};

// A ladder shift would move amplitude across the guard band.
class GuardBandError : public Error {
public:
    using Error::Error;
};

// A charge gap is not an integer multiple of the ladder spacing.
class CommensurabilityError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Interconversion rate R(rho, sigma) requested for a thermal target state.
class UndefinedRateError : public Error {
public:
    using Error::Error;
};

}  // namespace ggethermo
