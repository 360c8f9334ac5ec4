#include "satint/lemma.hpp"

#include <algorithm>
#include <cmath>

namespace satint {

namespace {

constexpr const char* kDisclaimer =
    "A zero-violation run is consistency evidence for the checked implication, never proof.";

constexpr double kEpsFloor = 1e-8;

/// eps drawn from (0, eps0], bounded away from zero so margins stay scaled.
double draw_eps(Rng& rng, double eps0) { return eps0 * (0.01 + 0.99 * rng.uniform01()); }

LemmaReport finalize(std::string lemma_id, std::vector<InstanceDetail> details, double k_used) {
    LemmaReport report;
    report.lemma_id = std::move(lemma_id);
    report.instances = static_cast<int>(details.size());
    report.k_used = k_used;
    for (const InstanceDetail& d : details) {
        report.violations += d.violated ? 1 : 0;
        report.marginal += d.marginal ? 1 : 0;
        report.worst_margin = std::max(report.worst_margin, d.margin);
    }
    report.details = std::move(details);
    report.disclaimer = kDisclaimer;
    return report;
}

}  // namespace

SampledSignal random_lipschitz_input(const SaturatorSpec& spec, double slope_bound,
                                     double resample_period, double horizon, double u_start,
                                     Rng& rng) {
    if (!(resample_period > 0.0) || !(horizon > 0.0)) {
        throw InvalidArgument("random_lipschitz_input: periods must be positive");
    }
    std::vector<double> times, values;
    double t = 0.0;
    double v = spec.clamp(u_start);
    times.push_back(t);
    values.push_back(v);
    while (t < horizon) {
        const double seg = std::min(resample_period, horizon - t);
        const double slope = rng.uniform(-slope_bound, slope_bound);
        v = spec.clamp(v + slope * seg);
        t += seg;
        times.push_back(t);
        values.push_back(v);
    }
    return SampledSignal(std::move(times), std::move(values), SampledSignal::Interp::Linear);
}

OpenLoopDeviation open_loop_tube_deviation(const PlantModel& plant, const EquilibriumMap& map,
                                           const Eigen::VectorXd& x0, const SampledSignal& u,
                                           double T, double horizon, double dt) {
    const Trajectory traj = simulate_varying_input(plant, x0, u, horizon, dt);
    OpenLoopDeviation dev{0.0, 0.0};
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double d = (traj.states[i] - map.xi(traj.inputs[i])).norm();
        dev.sup_all = std::max(dev.sup_all, d);
        if (traj.times[i] >= T) dev.sup_after_T = std::max(dev.sup_after_T, d);
    }
    return dev;
}

namespace {

/// Shared instance generator and runner for the two open-loop tube lemmas.
std::vector<InstanceDetail> run_tube_instances(const PlantModel& plant, const EquilibriumMap& map,
                                               const StabilityCertificate& cert,
                                               const GainCertificate& gain,
                                               const HarnessOptions& options, bool after_T_only) {
    const SaturatorSpec spec(map.u_min(), map.u_max());
    const double kappa = gain.kappa * options.kappa_scale;
    const double T = gain.T;
    const double horizon = options.horizon_factor * T;
    const double slack = 10.0 * options.dt;

    std::vector<InstanceDetail> details(static_cast<std::size_t>(options.n_instances));
    parallel_for(options.n_instances, options.threads, [&](int i) {
        Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(i));
        InstanceDetail& d = details[static_cast<std::size_t>(i)];
        d.epsilon = draw_eps(rng, cert.eps0);
        d.u_start = rng.uniform(spec.u_min, spec.u_max);
        const SampledSignal u =
            random_lipschitz_input(spec, kappa * d.epsilon, T / 4.0, horizon, d.u_start, rng);
        d.rho = rng.uniform01() * d.epsilon;
        const Eigen::VectorXd x0 = map.xi(u.eval(0.0)) + d.rho * rng.unit_vector(plant.n);
        try {
            const OpenLoopDeviation dev =
                open_loop_tube_deviation(plant, map, x0, u, T, horizon, options.dt);
            const double value = after_T_only ? dev.sup_after_T : dev.sup_all;
            const double bound =
                after_T_only ? (2.0 / 3.0) * d.epsilon : (cert.m + 1.0 / 6.0) * d.epsilon;
            d.margin = (value - bound) / std::max(d.epsilon, kEpsFloor);
        } catch (const DivergedError&) {
            d.margin = kInfinity;
        }
        d.violated = d.margin > slack;
        d.marginal = d.margin > 0.0 && d.margin <= slack;
    });
    return details;
}

}  // namespace

LemmaReport check_slow_input_lemma(const PlantModel& plant, const EquilibriumMap& map,
                                   const StabilityCertificate& cert, const GainCertificate& gain,
                                   const HarnessOptions& options) {
    LemmaReport report = finalize(
        "slow-input", run_tube_instances(plant, map, cert, gain, options, /*after_T_only=*/true),
        0.0);
    report.horizon_used = options.horizon_factor * gain.T;
    return report;
}

LemmaReport check_tube_lemma(const PlantModel& plant, const EquilibriumMap& map,
                             const StabilityCertificate& cert, const GainCertificate& gain,
                             const HarnessOptions& options) {
    LemmaReport report = finalize(
        "tube", run_tube_instances(plant, map, cert, gain, options, /*after_T_only=*/false), 0.0);
    report.horizon_used = options.horizon_factor * gain.T;
    return report;
}

SampleHoldResult check_sample_hold_instance(const PlantModel& plant, const EquilibriumMap& map,
                                            const GainCertificate& gain,
                                            const SampleHoldInstance& instance, double dt) {
    (void)map;
    const double T = gain.T;
    const int steps_per_interval = std::max(1, static_cast<int>(std::ceil(T / dt)));
    const double h = T / steps_per_interval;  // step that lands exactly on interval ends
    const double horizon = instance.n_intervals * T;

    const Trajectory x_traj = simulate_varying_input(plant, instance.x0, instance.u, horizon, h);

    SampleHoldResult result;
    result.sup_dev = 0.0;
    result.sup_bound = 0.0;
    result.margin = -kInfinity;
    for (int k = 0; k < instance.n_intervals; ++k) {
        const std::size_t base = static_cast<std::size_t>(k) * static_cast<std::size_t>(steps_per_interval);
        const double t_base = k * T;
        const double u_held = instance.u.eval(t_base);
        const Trajectory z_traj =
            simulate_constant_input(plant, x_traj.states[base], u_held, T, h);

        double interval_dev = 0.0;
        double interval_margin = -kInfinity;
        const double interval_bound_max =
            gain.L2 * instance.delta * T / gain.L1 * (std::exp(gain.L1 * T) - 1.0);
        for (std::size_t s = 0; s < z_traj.times.size(); ++s) {
            const double dev = (z_traj.states[s] - x_traj.states[base + s]).norm();
            const double bound =
                gain.L2 * instance.delta * T / gain.L1 * (std::exp(gain.L1 * z_traj.times[s]) - 1.0);
            interval_dev = std::max(interval_dev, dev);
            interval_margin = std::max(
                interval_margin, (dev - bound) / std::max(interval_bound_max, kEpsFloor));
        }
        result.interval_sup_dev.push_back(interval_dev);
        result.interval_bound.push_back(interval_bound_max);
        result.sup_dev = std::max(result.sup_dev, interval_dev);
        result.sup_bound = std::max(result.sup_bound, interval_bound_max);
        result.margin = std::max(result.margin, interval_margin);
    }
    result.holds = result.margin <= 10.0 * h;
    return result;
}

LemmaReport check_sample_hold_lemma(const PlantModel& plant, const EquilibriumMap& map,
                                    const StabilityCertificate& cert, const GainCertificate& gain,
                                    const HarnessOptions& options) {
    const SaturatorSpec spec(map.u_min(), map.u_max());
    const double kappa = gain.kappa * options.kappa_scale;
    const double slack = 10.0 * options.dt;

    std::vector<InstanceDetail> details(static_cast<std::size_t>(options.n_instances));
    parallel_for(options.n_instances, options.threads, [&](int i) {
        Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(i));
        InstanceDetail& d = details[static_cast<std::size_t>(i)];
        d.epsilon = draw_eps(rng, cert.eps0);
        d.u_start = rng.uniform(spec.u_min, spec.u_max);

        SampleHoldInstance instance;
        instance.delta = kappa * d.epsilon;
        instance.n_intervals = options.n_intervals;
        instance.u = random_lipschitz_input(spec, instance.delta, gain.T / 4.0,
                                            options.n_intervals * gain.T, d.u_start, rng);
        instance.x0 = map.xi(instance.u.eval(0.0));
        d.rho = 0.0;
        try {
            const SampleHoldResult res =
                check_sample_hold_instance(plant, map, gain, instance, options.dt);
            d.margin = res.margin;
        } catch (const DivergedError&) {
            d.margin = kInfinity;
        }
        d.violated = d.margin > slack;
        d.marginal = d.margin > 0.0 && d.margin <= slack;
    });
    LemmaReport report = finalize("sample-hold", std::move(details), 0.0);
    report.horizon_used = options.n_intervals * gain.T;
    return report;
}

LemmaReport check_gain_lemma(const PlantModel& plant, const EquilibriumMap& map,
                             const StabilityCertificate& cert, const GainCertificate& gain,
                             const HarnessOptions& options) {
    const SaturatorSpec spec(map.u_min(), map.u_max());
    const double k = options.k > 0.0 ? options.k : 0.5 * gain.k_max;
    const double slack = 10.0 * options.dt * (1.0 + k);
    const double y_span = map.y_max() - map.y_min();
    const double T = gain.T;

    // Window the output-gap contraction needs according to the constants.
    const double tau_out =
        std::max(0.0, std::log(3.0 * gain.delta_g * gain.alpha / (4.0 * gain.mu))) + 1.0;
    const double tau_full = T + tau_out / (gain.mu * k);
    const bool contraction_checked = 2.0 * tau_full <= options.gain_horizon_cap;
    const double horizon = contraction_checked ? 2.0 * tau_full : std::max(3.0 * T, 20.0);

    std::vector<InstanceDetail> details(static_cast<std::size_t>(options.n_instances));
    parallel_for(options.n_instances, options.threads, [&](int i) {
        Rng rng = Rng::stream(options.seed, static_cast<std::uint64_t>(i));
        InstanceDetail& d = details[static_cast<std::size_t>(i)];
        d.epsilon = draw_eps(rng, cert.eps0);

        const double r = map.y_min() + (0.02 + 0.96 * rng.uniform01()) * y_span;
        const double lam_eps = gain.lambda_tilde * d.epsilon;
        const double y_target = std::min(std::max(r + rng.uniform(-lam_eps, lam_eps),
                                                  map.y_min() + 1e-9 * y_span),
                                         map.y_max() - 1e-9 * y_span);
        const double u0 = map.G_inverse(y_target);
        d.u_start = u0;
        d.rho = rng.uniform01() * d.epsilon;

        ClosedLoopConfig cfg(plant, spec, k, r, map.xi(u0) + d.rho * rng.unit_vector(plant.n), u0);
        cfg.dt = options.dt;
        cfg.horizon = horizon;
        cfg.record_stride =
            std::max(1, static_cast<int>(horizon / options.dt) / 20000);
        try {
            const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, map);
            const double eps_scale = std::max(d.epsilon, kEpsFloor);
            const double gap_scale = std::max(lam_eps, kEpsFloor);

            // Bounds that hold over the whole run under the lemma's hypothesis.
            double whole_run = -kInfinity;
            for (const ClosedLoopRecord& rec : records) {
                const double tube =
                    (rec.xi.norm() - (cert.m + 1.0 / 6.0) * d.epsilon) / eps_scale;
                const double gap_full = (std::abs(rec.w_coord) - lam_eps) / gap_scale;
                whole_run = std::max({whole_run, tube, gap_full});
            }

            // Contracted bounds: state after T always; output gap only when
            // the horizon covers the constants' own waiting time.
            std::vector<double> contracted(records.size(), -kInfinity);
            for (std::size_t s = 0; s < records.size(); ++s) {
                if (records[s].t >= T) {
                    contracted[s] = (records[s].xi.norm() - (2.0 / 3.0) * d.epsilon) / eps_scale;
                }
                if (contraction_checked) {
                    contracted[s] = std::max(
                        contracted[s],
                        (std::abs(records[s].w_coord) - (2.0 / 3.0) * lam_eps) / gap_scale);
                }
            }
            double suffix_max = -kInfinity;
            d.tau_emp = kInfinity;
            double tail = -kInfinity;
            const double tail_start = contraction_checked ? tau_full : 2.0 * T;
            for (std::size_t s = records.size(); s-- > 0;) {
                suffix_max = std::max(suffix_max, contracted[s]);
                if (suffix_max <= slack) d.tau_emp = records[s].t;
                if (records[s].t >= tail_start) tail = std::max(tail, contracted[s]);
            }
            d.margin = std::max(whole_run, tail);
        } catch (const DivergedError&) {
            d.margin = kInfinity;
            d.tau_emp = kInfinity;
        }
        d.violated = d.margin > slack;
        d.marginal = d.margin > 0.0 && d.margin <= slack;
    });
    LemmaReport report = finalize("gain", std::move(details), k);
    report.contraction_checked = contraction_checked;
    report.horizon_used = horizon;
    return report;
}

}  // namespace satint
