#include "satint/closed_loop.hpp"

#include <algorithm>
#include <cmath>

namespace satint {

namespace {

enum class IntegratorKind { Saturating, ClampedOutput };

void validate(const ClosedLoopConfig& cfg) {
    if (!(cfg.k > 0.0)) throw InvalidArgument("closed loop: gain k must be positive");
    if (!(cfg.dt > 0.0) || !(cfg.horizon > 0.0)) {
        throw InvalidArgument("closed loop: dt and horizon must be positive");
    }
    if (cfg.record_stride < 1) throw InvalidArgument("closed loop: record_stride must be >= 1");
    if (cfg.x0.size() != cfg.plant.n) {
        throw InvalidArgument("closed loop: x0 dimension does not match plant");
    }
    if (cfg.u0 < cfg.spec.u_min - 1e-12 || cfg.u0 > cfg.spec.u_max + 1e-12) {
        throw InvalidArgument("closed loop: u0 outside [u_min, u_max]");
    }
}

std::vector<ClosedLoopRecord> run_loop(const ClosedLoopConfig& cfg, const EquilibriumMap& map,
                                       IntegratorKind kind, const FaultWindow* fault,
                                       double* drive_min_out, double* drive_max_out) {
    validate(cfg);
    const double u_r = map.invert_reference(cfg.r);

    const int n_steps = static_cast<int>(std::ceil(cfg.horizon / cfg.dt - 1e-12));
    std::vector<ClosedLoopRecord> records;
    records.reserve(static_cast<std::size_t>(n_steps / cfg.record_stride) + 2);

    Eigen::VectorXd x = cfg.x0;
    Eigen::VectorXd k1(cfg.plant.n), k2(cfg.plant.n), k3(cfg.plant.n), k4(cfg.plant.n),
        scratch(cfg.plant.n);
    double u = cfg.spec.clamp(cfg.u0);
    double v = u;  // internal integrator state of the clamped variant
    double drive_min = v, drive_max = v;

    auto record = [&](double t, double y) {
        ClosedLoopRecord rec;
        rec.t = t;
        rec.x = x;
        rec.u = u;
        rec.y = y;
        const double Gu = map.G(u);
        rec.eta = y - Gu;
        rec.V = 0.5 * (u - u_r) * (u - u_r);
        rec.xi = x - map.xi(u);
        rec.w_coord = Gu - cfg.r;
        records.push_back(std::move(rec));
    };

    double t = 0.0;
    for (int i = 0;; ++i) {
        const double y = cfg.plant.g(x);
        if (i % cfg.record_stride == 0 || t >= cfg.horizon) record(t, y);
        if (t >= cfg.horizon) break;

        const double y_measured =
            (fault != nullptr && t >= fault->t_on && t < fault->t_off) ? y + fault->y_offset : y;
        const double w = cfg.k * (cfg.r - y_measured);
        const double h = std::min(cfg.dt, cfg.horizon - t);

        const double u_frozen = u;
        rk4_step(
            cfg.plant, x, t, h, [u_frozen](double) { return u_frozen; }, k1, k2, k3, k4, scratch);
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kBlowUpGuard) {
            throw DivergedError("closed loop diverged near t=" + fmt_g12(t + h), t + h);
        }

        if (kind == IntegratorKind::Saturating) {
            u = cfg.spec.clamp(u + h * eval_S(cfg.spec, u, w));
            v = u;
        } else {
            v += h * w;
            u = cfg.spec.clamp(v);
        }
        drive_min = std::min(drive_min, v);
        drive_max = std::max(drive_max, v);
        t = std::min(cfg.horizon, t + h);
    }
    if (drive_min_out) *drive_min_out = drive_min;
    if (drive_max_out) *drive_max_out = drive_max;
    return records;
}

}  // namespace

std::vector<ClosedLoopRecord> simulate_closed_loop(const ClosedLoopConfig& cfg,
                                                   const EquilibriumMap& map) {
    return run_loop(cfg, map, IntegratorKind::Saturating, nullptr, nullptr, nullptr);
}

TrackingMetrics tracking_metrics(const std::vector<ClosedLoopRecord>& records, double r, double u_r,
                                 double tol) {
    if (records.empty()) throw InvalidArgument("tracking_metrics: empty record sequence");
    TrackingMetrics out;

    std::size_t last_bad = records.size();  // sentinel: none bad
    for (std::size_t i = records.size(); i-- > 0;) {
        if (std::abs(records[i].y - r) > tol) {
            last_bad = i;
            break;
        }
    }
    if (last_bad == records.size()) {
        out.settle_time = records.front().t;
    } else if (last_bad + 1 == records.size()) {
        out.settle_time = kInfinity;
    } else {
        out.settle_time = records[last_bad + 1].t;
    }

    const double y0 = records.front().y;
    const double step = r - y0;
    double over = 0.0;
    double excursion = 0.0;
    for (const ClosedLoopRecord& rec : records) {
        if (step >= 0.0) {
            over = std::max(over, rec.y - r);
        } else {
            over = std::max(over, r - rec.y);
        }
        excursion = std::max(excursion, std::abs(rec.u - u_r));
    }
    const double denom = std::abs(step) > 1e-12 ? std::abs(step) : 1.0;
    out.overshoot = over / denom;
    out.final_error = std::abs(records.back().y - r);
    out.u_excursion = excursion;
    return out;
}

namespace {

double recovery_after(const std::vector<ClosedLoopRecord>& records, double r, double t_off,
                      double tol) {
    std::size_t last_bad = records.size();
    for (std::size_t i = records.size(); i-- > 0;) {
        if (records[i].t < t_off) break;
        if (std::abs(records[i].y - r) > tol) {
            last_bad = i;
            break;
        }
    }
    if (last_bad == records.size()) return 0.0;
    if (last_bad + 1 == records.size()) return kInfinity;
    return records[last_bad + 1].t - t_off;
}

}  // namespace

WindupComparison compare_windup(const ClosedLoopConfig& cfg, const EquilibriumMap& map,
                                const FaultWindow& fault, double tol_recovery) {
    if (!(fault.t_on < fault.t_off) || fault.t_on < 0.0 || fault.t_off > cfg.horizon) {
        throw InvalidArgument("compare_windup: fault window must lie inside [0, horizon]");
    }
    WindupComparison cmp;
    double lo = 0.0, hi = 0.0;
    cmp.saturating_records =
        run_loop(cfg, map, IntegratorKind::Saturating, &fault, &lo, &hi);
    cmp.saturating.drive_min = lo;
    cmp.saturating.drive_max = hi;
    cmp.saturating.recovery_time = recovery_after(cmp.saturating_records, cfg.r, fault.t_off, tol_recovery);
    cmp.saturating.final_error = std::abs(cmp.saturating_records.back().y - cfg.r);

    cmp.clamped_records = run_loop(cfg, map, IntegratorKind::ClampedOutput, &fault, &lo, &hi);
    cmp.clamped.drive_min = lo;
    cmp.clamped.drive_max = hi;
    cmp.clamped.recovery_time = recovery_after(cmp.clamped_records, cfg.r, fault.t_off, tol_recovery);
    cmp.clamped.final_error = std::abs(cmp.clamped_records.back().y - cfg.r);
    return cmp;
}

LyapunovReport lyapunov_diagnostics(const std::vector<ClosedLoopRecord>& records,
                                    const EquilibriumMap& map, double r, double mu, double k) {
    if (records.size() < 2) throw InvalidArgument("lyapunov_diagnostics: need at least two records");
    const double u_r = map.invert_reference(r);
    const ShiftedGain gain(map, r);

    LyapunovReport rep;
    double eta_star = 0.0;
    for (const ClosedLoopRecord& rec : records) eta_star = std::max(eta_star, std::abs(rec.eta));
    rep.eta_star = eta_star;
    const double h = records[1].t - records[0].t;
    rep.tol = 10.0 * h * (1.0 + k);
    constexpr double kFloor = 1e-12;

    const double u0_gap = records.front().u - u_r;
    bool in_initial_excess = std::abs(records.front().w_coord) > 2.0 * eta_star;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const ClosedLoopRecord& rec = records[i];
        const bool excess = std::abs(rec.w_coord) > 2.0 * eta_star;

        // dV/dt <= -2 mu k V + tol wherever the output gap exceeds 2 eta*.
        if (excess && i + 1 < records.size()) {
            const double dv = (records[i + 1].V - rec.V) / (records[i + 1].t - rec.t);
            const double margin = dv - (-2.0 * mu * k * rec.V + rep.tol);
            rep.dv_checked++;
            rep.dv_worst_margin = std::max(rep.dv_worst_margin, margin);
            if (margin > 0.0) rep.dv_violations++;
        }

        // |u - u_r| decay on the initial excess interval.
        if (in_initial_excess && !excess) in_initial_excess = false;
        if (in_initial_excess) {
            const double bound =
                std::exp(-mu * k * rec.t) * std::abs(u0_gap) * (1.0 + rep.tol) + kFloor;
            const double margin = std::abs(rec.u - u_r) - bound;
            rep.decay_checked++;
            rep.decay_worst_margin = std::max(rep.decay_worst_margin, margin);
            if (margin > 0.0) rep.decay_violations++;
        }

        // Output-gap envelope everywhere.
        const double shrunk = std::exp(-mu * k * rec.t) * u0_gap;
        const double env =
            std::max(std::abs(gain.eval(shrunk)), 2.0 * eta_star) * (1.0 + rep.tol) + kFloor;
        const double margin = std::abs(rec.w_coord) - env;
        rep.env_checked++;
        rep.env_worst_margin = std::max(rep.env_worst_margin, margin);
        if (margin > 0.0) rep.env_violations++;
    }
    return rep;
}

double log_envelope_slope(const std::vector<ClosedLoopRecord>& records) {
    const std::size_t stride = std::max<std::size_t>(1, records.size() / 2000);
    std::vector<double> ts, logs;
    for (std::size_t i = 0; i < records.size(); i += stride) {
        const ClosedLoopRecord& rec = records[i];
        const double norm = std::sqrt(rec.xi.squaredNorm() + rec.w_coord * rec.w_coord);
        ts.push_back(rec.t);
        logs.push_back(std::log(std::max(norm, 1e-15)));
    }
    return least_squares_slope(ts, logs);
}

}  // namespace satint
