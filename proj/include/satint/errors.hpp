#pragma once

#include <stdexcept>
#include <string>

namespace satint {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad call-site input (nonpositive dt, mismatched horizons, empty sample sets, ...).
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// Trajectory left the blow-up guard; carries the escape time estimate.
class DivergedError : public Error {
public:
    DivergedError(const std::string& what, double escape_time)
        : Error(what), escape_time(escape_time) {}
    double escape_time;
};

/// Newton iteration failed to locate an equilibrium.
class EquilibriumNotFound : public Error {
public:
    EquilibriumNotFound(const std::string& what, double u0) : Error(what), u0(u0) {}
    double u0;
};

/// Steady-state map not strictly increasing; carries the offending grid interval.
class MonotonicityViolated : public Error {
public:
    MonotonicityViolated(const std::string& what, double u_lo, double u_hi)
        : Error(what), u_lo(u_lo), u_hi(u_hi) {}
    double u_lo;
    double u_hi;
};

/// A linearization has spectral abscissa >= 0.
class NotExponentiallyStable : public Error {
public:
    NotExponentiallyStable(const std::string& what, double u0, double abscissa)
        : Error(what), u0(u0), abscissa(abscissa) {}
    double u0;
    double abscissa;
};

/// No decay envelope fits the probe set; carries the worst probe.
class CertificationFailed : public Error {
public:
    CertificationFailed(const std::string& what, double worst_u0, double worst_radius)
        : Error(what), worst_u0(worst_u0), worst_radius(worst_radius) {}
    double worst_u0;
    double worst_radius;
};

/// Reference value outside the open interval (y_min, y_max).
class ReferenceOutOfRange : public Error {
public:
    explicit ReferenceOutOfRange(const std::string& what) : Error(what) {}
};

/// Empirical gain bisection exhausted its halvings; carries the failing sample.
class SelectionFailed : public Error {
public:
    SelectionFailed(const std::string& what, double u0) : Error(what), u0(u0) {}
    double u0;
};

}  // namespace satint
