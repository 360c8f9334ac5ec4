#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satint/closed_loop.hpp"
#include "satint/gain.hpp"
#include "satint/rng.hpp"

namespace satint {

/// One sampled instance of a lemma check. margin <= 0 means the checked
/// inequality held; margins inside the slack band count as marginal, beyond
/// it as violations.
struct InstanceDetail {
    double epsilon = 0.0;
    double u_start = 0.0;
    double rho = 0.0;      ///< initial distance to the equilibrium curve
    double margin = 0.0;   ///< normalized worst excess over the bound
    double tau_emp = 0.0;  ///< gain lemma: earliest time the contracted bounds hold for good
    bool violated = false;
    bool marginal = false;
};

/// Aggregated falsification run. A zero-violation run is consistency
/// evidence for the checked implication, never a proof; the disclaimer
/// field says so and is carried into every exported report.
struct LemmaReport {
    std::string lemma_id;
    int instances = 0;
    int violations = 0;
    int marginal = 0;
    double worst_margin = -kInfinity;
    double k_used = 0.0;            ///< gain lemma only
    bool contraction_checked = true; ///< gain lemma: whether the output-gap contraction fit the horizon
    double horizon_used = 0.0;
    std::vector<InstanceDetail> details;
    std::string disclaimer;
};

struct HarnessOptions {
    int n_instances = 100;
    std::uint64_t seed = 1;
    double dt = 1e-3;
    double horizon_factor = 3.0;     ///< slow-input/tube horizon = factor * T
    double k = -1.0;                 ///< gain lemma gain; <= 0 selects k_max / 2
    double kappa_scale = 1.0;        ///< hypothesis scaling, for deliberate breakage
    int n_intervals = 4;             ///< sample-hold: number of T-length intervals
    double gain_horizon_cap = 4e4;   ///< longest simulated window for the gain lemma
    int threads = 1;
};

/**
 * Random box-valued Lipschitz input: a chain of ramps with slopes drawn
 * uniformly from [-slope_bound, slope_bound], resampled every
 * resample_period and clipped to [u_min, u_max]. The result is piecewise
 * linear with |slope| <= slope_bound everywhere.
 */
SampledSignal random_lipschitz_input(const SaturatorSpec& spec, double slope_bound,
                                     double resample_period, double horizon, double u_start,
                                     Rng& rng);

/// Sup of ||x(t) - Xi(u(t))|| along an open-loop run, over all t and over t >= T.
struct OpenLoopDeviation {
    double sup_all;
    double sup_after_T;
};

OpenLoopDeviation open_loop_tube_deviation(const PlantModel& plant, const EquilibriumMap& map,
                                           const Eigen::VectorXd& x0, const SampledSignal& u,
                                           double T, double horizon, double dt);

/// Slowly driven trajectories contract into the (2/3) eps tube after time T.
LemmaReport check_slow_input_lemma(const PlantModel& plant, const EquilibriumMap& map,
                                   const StabilityCertificate& cert, const GainCertificate& gain,
                                   const HarnessOptions& options = {});

/// Slowly driven trajectories never leave the (m + 1/6) eps tube.
LemmaReport check_tube_lemma(const PlantModel& plant, const EquilibriumMap& map,
                             const StabilityCertificate& cert, const GainCertificate& gain,
                             const HarnessOptions& options = {});

/// One sample-hold comparison: x driven by u, per-interval frozen-input
/// trajectories driven by the T-periodic sample-hold of u.
struct SampleHoldInstance {
    SampledSignal u;
    double delta;  ///< Lipschitz bound of u
    Eigen::VectorXd x0;
    int n_intervals = 4;
};

struct SampleHoldResult {
    double sup_dev;    ///< max deviation ||z_k(t) - x(t)|| over all intervals
    double sup_bound;  ///< max of the deviation bound over all intervals
    double margin;     ///< worst (dev - bound) / interval bound scale
    bool holds;
    std::vector<double> interval_sup_dev;
    std::vector<double> interval_bound;
};

SampleHoldResult check_sample_hold_instance(const PlantModel& plant, const EquilibriumMap& map,
                                            const GainCertificate& gain,
                                            const SampleHoldInstance& instance, double dt = 1e-3);

/// Randomized sample-hold comparisons merged into one report.
LemmaReport check_sample_hold_lemma(const PlantModel& plant, const EquilibriumMap& map,
                                    const StabilityCertificate& cert, const GainCertificate& gain,
                                    const HarnessOptions& options = {});

/**
 * Closed-loop contraction: initial states inside the (eps, lambda_tilde eps)
 * box stay inside it, keep the state in the (m + 1/6) eps tube, and contract
 * the state bound to (2/3) eps after time T.
 *
 * The output-gap contraction to (2/3) lambda_tilde eps needs a window of
 * roughly T + ln(3 delta_g alpha / 4 mu) / (mu k); when that exceeds
 * gain_horizon_cap (certified gains can be astronomically small) the check is
 * skipped and the report carries contraction_checked = false. The remaining
 * bounds are still enforced over a 3 T window.
 */
LemmaReport check_gain_lemma(const PlantModel& plant, const EquilibriumMap& map,
                             const StabilityCertificate& cert, const GainCertificate& gain,
                             const HarnessOptions& options = {});

}  // namespace satint
