#pragma once

#include <vector>

#include <Eigen/Dense>

#include "satint/plant.hpp"
#include "satint/saturator.hpp"

namespace satint {

struct NewtonOptions {
    double tol = 1e-10;    ///< infinity-norm residual target
    int max_iter = 50;
    int max_damping = 20;  ///< step halvings allowed per iteration
};

/// Damped Newton solve of f(x, u0) = 0 from x_guess.
Eigen::VectorXd solve_equilibrium(const PlantModel& plant, double u0, const Eigen::VectorXd& x_guess,
                                  const NewtonOptions& options = {});

/**
 * Sampled equilibrium curve u -> Xi(u) with the steady-state map G = g(Xi(u)).
 *
 * Built by Newton continuation over a u-grid. alpha is the largest grid-secant
 * slope of Xi (a sampled Lipschitz estimate), mu is half the smallest
 * grid-secant slope of G (a sampled monotonicity margin). Between nodes both
 * Xi and G are read by piecewise-linear interpolation, which preserves the
 * monotonicity of G.
 */
class EquilibriumMap {
public:
    /// Continuation build; throws MonotonicityViolated if G is not strictly increasing.
    static EquilibriumMap build(const PlantModel& plant, const SaturatorSpec& spec,
                                int grid_size = 201, Eigen::VectorXd x_guess = {},
                                const NewtonOptions& options = {});

    const std::vector<double>& u_grid() const { return u_grid_; }
    const std::vector<Eigen::VectorXd>& xi_values() const { return xi_values_; }
    const std::vector<double>& g_values() const { return g_values_; }

    int state_dim() const { return n_; }
    double alpha() const { return alpha_; }
    double mu() const { return mu_; }
    double y_min() const { return g_values_.front(); }
    double y_max() const { return g_values_.back(); }
    double u_min() const { return u_grid_.front(); }
    double u_max() const { return u_grid_.back(); }

    /// True when one continuation step moved far more than its neighbors
    /// (likely a fold / branch jump, where the Lipschitz assumption fails).
    bool branch_jump_suspected() const { return branch_jump_suspected_; }

    /// Interpolated equilibrium state at u (clamped to the grid range).
    Eigen::VectorXd xi(double u) const;

    /// Interpolated steady-state output at u.
    double G(double u) const;

    /// Inverse of G by monotone piecewise-linear inversion; y clamped to [y_min, y_max].
    double G_inverse(double y) const;

    /// u_r = G^{-1}(r); throws ReferenceOutOfRange unless r lies strictly inside (y_min, y_max).
    double invert_reference(double r) const;

private:
    int n_ = 0;
    std::vector<double> u_grid_;
    std::vector<Eigen::VectorXd> xi_values_;
    std::vector<double> g_values_;
    double alpha_ = 0.0;
    double mu_ = 0.0;
    bool branch_jump_suspected_ = false;
};

/**
 * The steady-state map shifted so the reference maps to the origin:
 * eval(v) = G(v + u_r) - r on the domain [u_min - u_r, u_max - u_r].
 */
class ShiftedGain {
public:
    ShiftedGain(const EquilibriumMap& map, double r);

    double u_r() const { return u_r_; }
    double r() const { return r_; }
    double domain_lo() const { return map_.u_min() - u_r_; }
    double domain_hi() const { return map_.u_max() - u_r_; }

    double eval(double v) const { return map_.G(v + u_r_) - r_; }
    double inverse(double w) const { return map_.G_inverse(w + r_) - u_r_; }

private:
    EquilibriumMap map_;  // owned copy; the source map may go out of scope
    double r_;
    double u_r_;
};

}  // namespace satint
