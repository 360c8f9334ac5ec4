#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "satint/errors.hpp"
#include "satint/poly.hpp"
#include "satint/saturator.hpp"
#include "satint/signal.hpp"

namespace satint {

/**
 * Single-input single-output plant  dx/dt = f(x, u),  y = g(x).
 *
 * f writes the derivative into an out-parameter so the integrators can run
 * allocation-free. jac_x / jac_u / grad_g are optional analytic derivatives;
 * when absent the jacobian_* helpers fall back to central finite differences.
 */
struct PlantModel {
    std::string name;
    int n = 0;
    std::function<void(const Eigen::VectorXd&, double, Eigen::VectorXd&)> f;
    std::function<double(const Eigen::VectorXd&)> g;
    std::function<void(const Eigen::VectorXd&, double, Eigen::MatrixXd&)> jac_x;  // may be empty
    std::function<void(const Eigen::VectorXd&, double, Eigen::VectorXd&)> jac_u;  // may be empty
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> grad_g;         // may be empty
};

/// Fixed-grid record of one open-loop run.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> inputs;
    std::vector<double> outputs;
};

/// State-norm guard above which a trajectory counts as escaped.
inline constexpr double kBlowUpGuard = 1e9;

/// One classical RK4 step of dx/dt = f(x, u(t)) with u sampled per stage.
void rk4_step(const PlantModel& plant, Eigen::VectorXd& x, double t, double dt,
              const std::function<double(double)>& u_of_t, Eigen::VectorXd& k1,
              Eigen::VectorXd& k2, Eigen::VectorXd& k3, Eigen::VectorXd& k4,
              Eigen::VectorXd& scratch);

/// Fixed-step RK4 run under constant input. Throws DivergedError past the blow-up guard.
Trajectory simulate_constant_input(const PlantModel& plant, const Eigen::VectorXd& x0, double u0,
                                   double horizon, double dt);

/// Fixed-step RK4 run under a time-varying input signal.
Trajectory simulate_varying_input(const PlantModel& plant, const Eigen::VectorXd& x0,
                                  const SampledSignal& u, double horizon, double dt);

/// d f / d x at (x, u): analytic when provided, else central differences.
Eigen::MatrixXd jacobian_x(const PlantModel& plant, const Eigen::VectorXd& x, double u);

/// d f / d u at (x, u).
Eigen::VectorXd jacobian_u(const PlantModel& plant, const Eigen::VectorXd& x, double u);

/// Gradient of the readout g at x.
Eigen::VectorXd gradient_g(const PlantModel& plant, const Eigen::VectorXd& x);

/// A plant together with its admissible input range.
struct PlantSetup {
    PlantModel plant;
    SaturatorSpec range;
};

/// Names accepted by builtin_plant().
std::vector<std::string> builtin_plant_names();

/// "linear1d", "osc_cubic" or "scalar_cubic", each on the range [-1, 1].
PlantSetup builtin_plant(const std::string& name);

/// Builds a polynomial plant. f_polys are in variables (x1..xn, u), g_poly in (x1..xn).
PlantSetup make_polynomial_plant(const std::string& name, int n, double u_min, double u_max,
                                 std::vector<Poly> f_polys, Poly g_poly);

/// Loads a polynomial plant from a JSON config file.
PlantSetup load_plant_config(const std::string& path);

/// Builtin name, else treated as a config file path.
PlantSetup load_plant(const std::string& name_or_path);

}  // namespace satint
