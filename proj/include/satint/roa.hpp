#pragma once

#include <vector>

#include "satint/closed_loop.hpp"
#include "satint/stability.hpp"

namespace satint {

/// One grid node of the region-of-attraction sweep.
struct XtSample {
    Eigen::VectorXd x0;
    double u0 = 0.0;
    bool in_XT = false;
    bool tested = false;     ///< closed-loop convergence was evaluated
    bool converged = false;
    double settle_time = kInfinity;
};

/**
 * Membership in X_T: the constant-input trajectory from x0 must end within
 * eps0 / 2 of Xi(u0) at time T_roa. Blow-up means non-membership.
 */
bool membership_XT(const PlantModel& plant, const EquilibriumMap& map,
                   const StabilityCertificate& cert, const Eigen::VectorXd& x0, double u0,
                   double T_roa, double dt = 1e-2);

struct GridAxis {
    double lo;
    double hi;
    int count;
};

/// Box grid over the closed-loop state space: one axis per state coordinate
/// plus the u axis (last). Nodes are enumerated with u varying fastest.
struct RoaGrid {
    std::vector<GridAxis> x_axes;
    GridAxis u_axis;
};

struct XtSampleOptions {
    double dt = 1e-2;
    int threads = 1;
    bool check_nesting = true;  ///< also test membership at 2 T_roa
};

struct XtSampleResult {
    std::vector<XtSample> samples;
    int members = 0;             ///< nodes in X_T
    int members_2T = 0;          ///< nodes in X_{2T} (when nesting checked)
    int nesting_violations = 0;  ///< members at T that are not members at 2T
};

XtSampleResult sample_XT(const PlantModel& plant, const EquilibriumMap& map,
                         const StabilityCertificate& cert, double T_roa, const RoaGrid& grid,
                         const XtSampleOptions& options = {});

struct GainSelectionOptions {
    int max_halvings = 20;
    double dt = 1e-2;
    double T_roa = 1.0;            ///< enters the convergence-test horizon
    double tol_settle_frac = 1e-3; ///< settle tolerance as a fraction of the output span
    int threads = 1;
};

struct GainSelection {
    double k_emp = 0.0;   ///< largest gain under which every member converged
    double k_cert = 0.0;  ///< certified bound, reported side by side for contrast
    int halvings = 0;
    int members_tested = 0;
};

/**
 * Halve k from k_start until every member sample's closed-loop run converges
 * (output settles to within the tolerance and the log-envelope slope is
 * negative). Updates the members' converged / settle_time fields for the
 * accepted gain. Throws InvalidArgument on an empty member set and
 * SelectionFailed when the halvings are exhausted.
 */
GainSelection select_gain_empirical(const PlantModel& plant, const EquilibriumMap& map,
                                    const StabilityCertificate& cert,
                                    std::vector<XtSample>& samples, double r, double k_start,
                                    double k_cert = 0.0, const GainSelectionOptions& options = {});

}  // namespace satint
