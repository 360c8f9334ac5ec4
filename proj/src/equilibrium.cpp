#include "satint/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "satint/util.hpp"

namespace satint {

Eigen::VectorXd solve_equilibrium(const PlantModel& plant, double u0, const Eigen::VectorXd& x_guess,
                                  const NewtonOptions& options) {
    Eigen::VectorXd x = x_guess.size() == plant.n ? x_guess : Eigen::VectorXd::Zero(plant.n);
    Eigen::VectorXd fx(plant.n), x_trial(plant.n), f_trial(plant.n);
    plant.f(x, u0, fx);
    double res = fx.lpNorm<Eigen::Infinity>();
    for (int iter = 0; iter < options.max_iter; ++iter) {
        if (res < options.tol) return x;
        const Eigen::MatrixXd J = jacobian_x(plant, x, u0);
        const Eigen::VectorXd step = J.fullPivLu().solve(-fx);
        if (!step.allFinite()) break;
        double scale = 1.0;
        bool accepted = false;
        for (int d = 0; d <= options.max_damping; ++d) {
            x_trial = x + scale * step;
            plant.f(x_trial, u0, f_trial);
            const double res_trial = f_trial.lpNorm<Eigen::Infinity>();
            if (std::isfinite(res_trial) && res_trial < res) {
                x = x_trial;
                fx = f_trial;
                res = res_trial;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) break;
    }
    if (res < options.tol) return x;
    throw EquilibriumNotFound("no equilibrium found for '" + plant.name + "' at u0=" + fmt_g12(u0) +
                                  " (residual " + fmt_g12(res) +
                                  "); consider narrowing [u_min, u_max]",
                              u0);
}

EquilibriumMap EquilibriumMap::build(const PlantModel& plant, const SaturatorSpec& spec,
                                     int grid_size, Eigen::VectorXd x_guess,
                                     const NewtonOptions& options) {
    if (grid_size < 2) throw InvalidArgument("EquilibriumMap: grid_size must be at least 2");

    EquilibriumMap map;
    map.n_ = plant.n;
    map.u_grid_ = linspace(spec.u_min, spec.u_max, grid_size);
    map.xi_values_.reserve(map.u_grid_.size());
    map.g_values_.reserve(map.u_grid_.size());

    Eigen::VectorXd guess = x_guess.size() == plant.n ? x_guess : Eigen::VectorXd::Zero(plant.n);
    for (double u : map.u_grid_) {
        guess = solve_equilibrium(plant, u, guess, options);  // continuation: previous node seeds the next
        map.xi_values_.push_back(guess);
        map.g_values_.push_back(plant.g(guess));
    }

    double alpha = 0.0;
    double min_slope = kInfinity;
    double max_step = 0.0;
    std::vector<double> steps;
    steps.reserve(map.u_grid_.size() - 1);
    for (std::size_t i = 1; i < map.u_grid_.size(); ++i) {
        const double du = map.u_grid_[i] - map.u_grid_[i - 1];
        const double dxi = (map.xi_values_[i] - map.xi_values_[i - 1]).norm();
        const double dg = map.g_values_[i] - map.g_values_[i - 1];
        alpha = std::max(alpha, dxi / du);
        steps.push_back(dxi);
        max_step = std::max(max_step, dxi);
        if (dg <= 0.0) {
            throw MonotonicityViolated("steady-state map not strictly increasing on [" +
                                          fmt_g12(map.u_grid_[i - 1]) + ", " + fmt_g12(map.u_grid_[i]) +
                                          "]",
                                      map.u_grid_[i - 1], map.u_grid_[i]);
        }
        min_slope = std::min(min_slope, dg / du);
    }
    map.alpha_ = alpha;
    map.mu_ = 0.5 * min_slope;

    // A single continuation step far larger than the median step suggests the
    // solver jumped to another branch at a fold.
    std::vector<double> sorted = steps;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    map.branch_jump_suspected_ = median > 0.0 && max_step > 1e3 * median;
    return map;
}

namespace {

/// Index i with grid[i] <= u < grid[i+1], clamped to valid segments.
std::size_t segment_index(const std::vector<double>& grid, double u) {
    if (u <= grid.front()) return 0;
    if (u >= grid.back()) return grid.size() - 2;
    const auto it = std::upper_bound(grid.begin(), grid.end(), u);
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

}  // namespace

Eigen::VectorXd EquilibriumMap::xi(double u) const {
    const double uc = std::min(std::max(u, u_grid_.front()), u_grid_.back());
    const std::size_t i = segment_index(u_grid_, uc);
    const double frac = (uc - u_grid_[i]) / (u_grid_[i + 1] - u_grid_[i]);
    return xi_values_[i] + frac * (xi_values_[i + 1] - xi_values_[i]);
}

double EquilibriumMap::G(double u) const {
    const double uc = std::min(std::max(u, u_grid_.front()), u_grid_.back());
    const std::size_t i = segment_index(u_grid_, uc);
    const double frac = (uc - u_grid_[i]) / (u_grid_[i + 1] - u_grid_[i]);
    return g_values_[i] + frac * (g_values_[i + 1] - g_values_[i]);
}

double EquilibriumMap::G_inverse(double y) const {
    const double yc = std::min(std::max(y, g_values_.front()), g_values_.back());
    const std::size_t i = segment_index(g_values_, yc);  // g_values_ strictly increasing
    const double frac = (yc - g_values_[i]) / (g_values_[i + 1] - g_values_[i]);
    return u_grid_[i] + frac * (u_grid_[i + 1] - u_grid_[i]);
}

double EquilibriumMap::invert_reference(double r) const {
    if (!(r > y_min()) || !(r < y_max())) {
        throw ReferenceOutOfRange("reference r=" + fmt_g12(r) + " outside the open interval (" +
                                  fmt_g12(y_min()) + ", " + fmt_g12(y_max()) + ")");
    }
    return G_inverse(r);
}

ShiftedGain::ShiftedGain(const EquilibriumMap& map, double r)
    : map_(map), r_(r), u_r_(map.invert_reference(r)) {}

}  // namespace satint
