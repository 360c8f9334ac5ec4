#pragma once

#include <vector>

#include <Eigen/Dense>

#include "satint/equilibrium.hpp"
#include "satint/plant.hpp"
#include "satint/saturator.hpp"
#include "satint/util.hpp"

namespace satint {

/**
 * Feedback interconnection  w = k (r - y),  du/dt = S(u, w),  dx/dt = f(x, u).
 *
 * Both subsystems share one fixed step dt: the plant advances by RK4 with u
 * frozen at the step start, then the integrator advances by one projected
 * Euler step with y frozen at the step start. The switching function S is
 * discontinuous in u, so it is kept out of the RK4 stages; the splitting
 * error is O(dt) with a k-sized constant.
 */
struct ClosedLoopConfig {
    ClosedLoopConfig(PlantModel plant, SaturatorSpec spec, double k, double r, Eigen::VectorXd x0,
                     double u0)
        : plant(std::move(plant)), spec(spec), k(k), r(r), x0(std::move(x0)), u0(u0) {}

    PlantModel plant;
    SaturatorSpec spec;
    double k;
    double r;
    Eigen::VectorXd x0;
    double u0;
    double dt = 1e-3;
    double horizon = 100.0;
    int record_stride = 1;  ///< keep every record_stride-th step (first and last always kept)
};

/// One diagnostic sample of the closed-loop state.
struct ClosedLoopRecord {
    double t;
    Eigen::VectorXd x;
    double u;
    double y;
    double eta;      ///< y - G(u)
    double V;        ///< (u - u_r)^2 / 2
    Eigen::VectorXd xi;  ///< x - Xi(u)
    double w_coord;  ///< G(u) - r
};

/// Simulates the interconnection; throws ReferenceOutOfRange / DivergedError.
std::vector<ClosedLoopRecord> simulate_closed_loop(const ClosedLoopConfig& cfg,
                                                   const EquilibriumMap& map);

struct TrackingMetrics {
    double settle_time;  ///< first time after which |y - r| <= tol for good; infinity if never
    double overshoot;    ///< positive output excess past r, relative to the commanded step
    double final_error;
    double u_excursion;  ///< max |u - u_r|
};

TrackingMetrics tracking_metrics(const std::vector<ClosedLoopRecord>& records, double r, double u_r,
                                 double tol);

/// Additive measurement fault: the controller sees y + y_offset for t in [t_on, t_off).
struct FaultWindow {
    double t_on;
    double t_off;
    double y_offset;
};

struct WindupRunMetrics {
    double recovery_time;  ///< time after t_off until |y - r| <= tol for good; infinity if never
    double drive_min;      ///< extremes of the integrator's internal state
    double drive_max;
    double final_error;
};

/**
 * Runs the same fault scenario twice: once with the saturating integrator and
 * once with a plain integrator whose output is clamped (dv/dt = k (r - y),
 * u = sat(v)). The clamped variant's internal state v is free to wind up
 * during the fault; the comparison quantifies the recovery cost.
 */
struct WindupComparison {
    WindupRunMetrics saturating;
    WindupRunMetrics clamped;
    std::vector<ClosedLoopRecord> saturating_records;
    std::vector<ClosedLoopRecord> clamped_records;
};

WindupComparison compare_windup(const ClosedLoopConfig& cfg, const EquilibriumMap& map,
                                const FaultWindow& fault, double tol_recovery);

/**
 * Checks the run against the integrator's Lyapunov inequalities, with
 * eta* taken as the observed sup of |eta| and slack tol = 10 h (1 + k)
 * (h = record spacing):
 *
 *  - wherever |G(u) - r| > 2 eta*:  dV/dt <= -2 mu k V + tol
 *  - on the initial interval where |G(u) - r| > 2 eta* throughout:
 *      |u(t) - u_r| <= e^{-mu k t} |u(0) - u_r| (1 + tol)
 *  - everywhere:
 *      |G(u(t)) - r| <= max{ |G_r(e^{-mu k t} (u(0) - u_r))|, 2 eta* } (1 + tol)
 */
struct LyapunovReport {
    double eta_star;
    double tol;
    int dv_checked = 0;
    int dv_violations = 0;
    double dv_worst_margin = -kInfinity;
    int decay_checked = 0;
    int decay_violations = 0;
    double decay_worst_margin = -kInfinity;
    int env_checked = 0;
    int env_violations = 0;
    double env_worst_margin = -kInfinity;

    int violations() const { return dv_violations + decay_violations + env_violations; }
};

LyapunovReport lyapunov_diagnostics(const std::vector<ClosedLoopRecord>& records,
                                    const EquilibriumMap& map, double r, double mu, double k);

/// Least-squares slope of log ||(xi, w_coord)|| against time; negative means exponential decay.
double log_envelope_slope(const std::vector<ClosedLoopRecord>& records);

}  // namespace satint
