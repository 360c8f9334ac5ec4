#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "satint/errors.hpp"
#include "satint/signal.hpp"

namespace satint {

/// Admissible input range of the plant; also the integrator's state space.
struct SaturatorSpec {
    double u_min;
    double u_max;

    SaturatorSpec(double u_min, double u_max) : u_min(u_min), u_max(u_max) {
        if (!(u_min < u_max)) {
            throw InvalidArgument("SaturatorSpec: u_min must be strictly less than u_max");
        }
    }

    double clamp(double u) const { return std::min(std::max(u, u_min), u_max); }
    double span() const { return u_max - u_min; }
};

/// The integrator's scalar state, confined to [u_min, u_max].
struct SaturatorState {
    double u;

    SaturatorState(double u, const SaturatorSpec& spec) : u(spec.clamp(u)) {}
};

/**
 * Switching drive of the saturating integrator: the positive part of w at the
 * lower boundary, the negative part at the upper boundary, w itself in the
 * interior. Boundary branches apply at exact equality, and also to states
 * outside the box (they can only push back in).
 */
inline double eval_S(const SaturatorSpec& spec, double u, double w) {
    if (u <= spec.u_min) return std::max(w, 0.0);
    if (u >= spec.u_max) return std::min(w, 0.0);
    return w;
}

/// One explicit step of du/dt = S(u, w) with post-step projection onto the box.
inline SaturatorState step(SaturatorState state, const SaturatorSpec& spec, double w, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("saturator step: dt must be positive");
    const double u_next = state.u + dt * eval_S(spec, state.u, w);
    return SaturatorState(u_next, spec);
}

/**
 * Integrate the saturating integrator over [0, horizon] on a fixed grid,
 * sampling w at step-start times. Returns u at t = 0, dt, 2*dt, ...
 */
inline std::vector<double> integrate_saturator(const SaturatorSpec& spec, double u0,
                                               const SampledSignal& w, double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0)) {
        throw InvalidArgument("integrate_saturator: dt and horizon must be positive");
    }
    const int n_steps = static_cast<int>(std::ceil(horizon / dt - 1e-12));
    std::vector<double> path;
    path.reserve(static_cast<std::size_t>(n_steps) + 1);
    SaturatorState state(u0, spec);
    path.push_back(state.u);
    for (int i = 0; i < n_steps; ++i) {
        const double t = dt * i;
        const double h = std::min(dt, horizon - t);
        state = step(state, spec, w.eval(t), h);
        path.push_back(state.u);
    }
    return path;
}

/// Outcome of one L1 contraction check: sup-deviation vs. the L1 distance of the drives.
struct L1DeviationReport {
    double lhs;   ///< sup over the horizon of |u2(t) - u1(t)|
    double rhs;   ///< |u2(0) - u1(0)| + integral of |w2 - w1|
    double tol;   ///< discretization slack granted to the comparison
    bool holds;
};

/**
 * Simulates two saturating integrators and checks
 * sup_t |u2 - u1| <= |u2(0) - u1(0)| + ||w2 - w1||_L1 + tol, with
 * tol = 4 * dt * max|w| covering the explicit-step discretization error.
 */
inline L1DeviationReport l1_deviation_bound_check(const SaturatorSpec& spec, double u1_0, double u2_0,
                                                  const SampledSignal& w1, const SampledSignal& w2,
                                                  double horizon, double dt = 1e-3) {
    if (w1.t_end() < horizon || w2.t_end() < horizon) {
        throw InvalidArgument("l1_deviation_bound_check: signals must be defined on [0, horizon]");
    }
    const std::vector<double> p1 = integrate_saturator(spec, u1_0, w1, horizon, dt);
    const std::vector<double> p2 = integrate_saturator(spec, u2_0, w2, horizon, dt);

    double lhs = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) lhs = std::max(lhs, std::abs(p2[i] - p1[i]));

    // Trapezoid quadrature of |w2 - w1| on the simulation grid.
    double integral = 0.0;
    double w_max = 0.0;
    double prev = std::abs(w2.eval(0.0) - w1.eval(0.0));
    w_max = std::max(std::abs(w1.eval(0.0)), std::abs(w2.eval(0.0)));
    const std::size_t n = p1.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double t = std::min(dt * static_cast<double>(i), horizon);
        const double t_prev = dt * static_cast<double>(i - 1);
        const double cur = std::abs(w2.eval(t) - w1.eval(t));
        integral += 0.5 * (prev + cur) * (t - t_prev);
        prev = cur;
        w_max = std::max({w_max, std::abs(w1.eval(t)), std::abs(w2.eval(t))});
    }

    L1DeviationReport report;
    report.lhs = lhs;
    report.rhs = std::abs(u2_0 - u1_0) + integral;
    report.tol = 4.0 * dt * w_max;
    report.holds = report.lhs <= report.rhs + report.tol;
    return report;
}

}  // namespace satint
