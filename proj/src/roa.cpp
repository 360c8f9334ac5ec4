#include "satint/roa.hpp"

#include <algorithm>
#include <cmath>

namespace satint {

bool membership_XT(const PlantModel& plant, const EquilibriumMap& map,
                   const StabilityCertificate& cert, const Eigen::VectorXd& x0, double u0,
                   double T_roa, double dt) {
    try {
        const Trajectory traj = simulate_constant_input(plant, x0, u0, T_roa, dt);
        return (traj.states.back() - map.xi(u0)).norm() <= 0.5 * cert.eps0;
    } catch (const DivergedError&) {
        return false;
    }
}

namespace {

std::vector<double> axis_values(const GridAxis& axis) {
    if (axis.count < 1) throw InvalidArgument("grid axis: count must be >= 1");
    return linspace(axis.lo, axis.hi, axis.count);
}

}  // namespace

XtSampleResult sample_XT(const PlantModel& plant, const EquilibriumMap& map,
                         const StabilityCertificate& cert, double T_roa, const RoaGrid& grid,
                         const XtSampleOptions& options) {
    if (static_cast<int>(grid.x_axes.size()) != plant.n) {
        throw InvalidArgument("sample_XT: grid needs one axis per state coordinate");
    }
    std::vector<std::vector<double>> x_vals;
    for (const GridAxis& a : grid.x_axes) x_vals.push_back(axis_values(a));
    const std::vector<double> u_vals = axis_values(grid.u_axis);

    std::size_t total = u_vals.size();
    for (const auto& v : x_vals) total *= v.size();

    XtSampleResult result;
    result.samples.resize(total);
    std::vector<int> in_2T(total, 0);

    parallel_for(static_cast<int>(total), options.threads, [&](int idx) {
        // Decode row-major index, u fastest.
        std::size_t rem = static_cast<std::size_t>(idx);
        const std::size_t ui = rem % u_vals.size();
        rem /= u_vals.size();
        Eigen::VectorXd x0(plant.n);
        for (int d = plant.n - 1; d >= 0; --d) {
            const auto& vals = x_vals[static_cast<std::size_t>(d)];
            x0[d] = vals[rem % vals.size()];
            rem /= vals.size();
        }
        XtSample& sample = result.samples[static_cast<std::size_t>(idx)];
        sample.x0 = x0;
        sample.u0 = u_vals[ui];
        sample.in_XT = membership_XT(plant, map, cert, x0, sample.u0, T_roa, options.dt);
        if (options.check_nesting) {
            in_2T[static_cast<std::size_t>(idx)] =
                membership_XT(plant, map, cert, x0, sample.u0, 2.0 * T_roa, options.dt) ? 1 : 0;
        }
    });

    for (std::size_t i = 0; i < total; ++i) {
        if (result.samples[i].in_XT) result.members++;
        if (options.check_nesting) {
            if (in_2T[i]) result.members_2T++;
            if (result.samples[i].in_XT && !in_2T[i]) result.nesting_violations++;
        }
    }
    return result;
}

GainSelection select_gain_empirical(const PlantModel& plant, const EquilibriumMap& map,
                                    const StabilityCertificate& cert,
                                    std::vector<XtSample>& samples, double r, double k_start,
                                    double k_cert, const GainSelectionOptions& options) {
    (void)cert;
    std::vector<std::size_t> member_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].in_XT) member_idx.push_back(i);
    }
    if (member_idx.empty()) {
        throw InvalidArgument("select_gain_empirical: no member samples to test");
    }
    if (!(k_start > 0.0)) throw InvalidArgument("select_gain_empirical: k_start must be positive");

    const double u_r = map.invert_reference(r);
    const SaturatorSpec spec(map.u_min(), map.u_max());
    const double tol_settle = options.tol_settle_frac * (map.y_max() - map.y_min());

    double k = k_start;
    for (int halving = 0; halving <= options.max_halvings; ++halving) {
        const double horizon = std::max(50.0 / (map.mu() * k), 10.0 * options.T_roa);
        std::vector<char> ok(member_idx.size(), 0);
        std::vector<double> settle(member_idx.size(), kInfinity);

        parallel_for(static_cast<int>(member_idx.size()), options.threads, [&](int j) {
            const XtSample& sample = samples[member_idx[static_cast<std::size_t>(j)]];
            ClosedLoopConfig cfg(plant, spec, k, r, sample.x0, sample.u0);
            cfg.dt = options.dt;
            cfg.horizon = horizon;
            cfg.record_stride = std::max(1, static_cast<int>(horizon / options.dt) / 20000);
            try {
                const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, map);
                const TrackingMetrics metrics = tracking_metrics(records, r, u_r, tol_settle);
                const bool converged =
                    std::isfinite(metrics.settle_time) && log_envelope_slope(records) < 0.0;
                ok[static_cast<std::size_t>(j)] = converged ? 1 : 0;
                settle[static_cast<std::size_t>(j)] = metrics.settle_time;
            } catch (const DivergedError&) {
                ok[static_cast<std::size_t>(j)] = 0;
            }
        });

        bool all_ok = true;
        std::size_t first_fail = 0;
        for (std::size_t j = 0; j < member_idx.size(); ++j) {
            if (!ok[j]) {
                all_ok = false;
                first_fail = j;
                break;
            }
        }
        if (all_ok) {
            for (std::size_t j = 0; j < member_idx.size(); ++j) {
                XtSample& sample = samples[member_idx[j]];
                sample.tested = true;
                sample.converged = true;
                sample.settle_time = settle[j];
            }
            GainSelection selection;
            selection.k_emp = k;
            selection.k_cert = k_cert;
            selection.halvings = halving;
            selection.members_tested = static_cast<int>(member_idx.size());
            return selection;
        }
        if (halving == options.max_halvings) {
            throw SelectionFailed("no gain passed after " + std::to_string(options.max_halvings) +
                                      " halvings (failing sample at u0=" +
                                      fmt_g12(samples[member_idx[first_fail]].u0) + ")",
                                  samples[member_idx[first_fail]].u0);
        }
        k *= 0.5;
    }
    throw SelectionFailed("gain selection did not terminate", 0.0);  // unreachable
}

}  // namespace satint
