#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "satint/closed_loop.hpp"
#include "satint/rng.hpp"

using namespace satint;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

/// Exact interior flow of the linear1d loop: z = (x, u), dz/dt = M z + b.
struct Linear1dOracle {
    Eigen::MatrixXd M;
    Eigen::VectorXd b;
    Eigen::MatrixXd E;       // expm(M h)
    Eigen::VectorXd z_star;  // equilibrium

    Linear1dOracle(double k, double r, double h) : M(2, 2), b(2) {
        M << -1.0, 1.0, -k, 0.0;
        b << 0.0, k * r;
        E = oracles::expm(M * h);
        z_star = M.fullPivLu().solve(-b);
    }

    Eigen::VectorXd step(const Eigen::VectorXd& z) const { return z_star + E * (z - z_star); }
};

}  // namespace

TEST_CASE("linear1d tracking run matches the matrix-exponential oracle") {
    const auto& fx = fixtures::get("linear1d");
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, 0.5, vec1(0.0), 0.0);
    cfg.dt = 1e-4;
    cfg.horizon = 200.0;
    cfg.record_stride = 100;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);

    const double u_r = fx.map.invert_reference(0.5);
    CHECK(u_r == doctest::Approx(0.5).epsilon(1e-12));

    const double h = records[1].t - records[0].t;
    const Linear1dOracle oracle(cfg.k, cfg.r, h);
    Eigen::VectorXd z(2);
    z << 0.0, 0.0;
    double sup_err = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (i > 0) z = oracle.step(z);
        // The oracle covers the interior phase; u never reaches the box edge here.
        CHECK(records[i].u < fx.setup.range.u_max);
        CHECK(records[i].u > fx.setup.range.u_min);
        sup_err = std::max(sup_err, std::abs(records[i].x[0] - z[0]));
        sup_err = std::max(sup_err, std::abs(records[i].u - z[1]));
    }
    CHECK(sup_err < 1e-5);

    CHECK(std::abs(records.back().y - 0.5) < 1e-3);
    CHECK(std::abs(records.back().u - u_r) < 1e-3);
    CHECK(log_envelope_slope(records) < 0.0);

    SUBCASE("tracking metrics against the oracle") {
        const TrackingMetrics metrics = tracking_metrics(records, cfg.r, u_r, 1e-2);
        // Oracle settle time: step the exact flow and find the last excursion.
        Eigen::VectorXd zo(2);
        zo << 0.0, 0.0;
        double oracle_settle = 0.0;
        for (std::size_t i = 1; i < records.size(); ++i) {
            zo = oracle.step(zo);
            if (std::abs(zo[0] - 0.5) > 1e-2) oracle_settle = records[i].t + h;
        }
        CHECK(std::isfinite(metrics.settle_time));
        CHECK(metrics.settle_time == doctest::Approx(oracle_settle).epsilon(0.02));
        CHECK(metrics.final_error < 1e-3);
        CHECK(metrics.overshoot < 0.01);  // two real stable modes, no ringing
    }
}

TEST_CASE("stationary start stays at the interconnection equilibrium") {
    const auto& fx = fixtures::get("linear1d");
    const double r = 0.5;
    const double u_r = fx.map.invert_reference(r);
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.2, r, fx.map.xi(u_r), u_r);
    cfg.dt = 1e-3;
    cfg.horizon = 10.0;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);
    for (const ClosedLoopRecord& rec : records) {
        CHECK(std::abs(rec.x[0] - 0.5) < 1e-8);
        CHECK(std::abs(rec.u - u_r) < 1e-8);
        CHECK(rec.V < 1e-16);
        CHECK(std::abs(rec.eta) < 1e-8);
        CHECK(rec.xi.norm() < 1e-8);
    }
    const TrackingMetrics metrics = tracking_metrics(records, r, u_r, 1e-2);
    CHECK(metrics.settle_time == 0.0);
    CHECK(metrics.overshoot == 0.0);
}

TEST_CASE("start at the upper boundary: negative drive passes through") {
    const auto& fx = fixtures::get("linear1d");
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, 0.5, vec1(1.0), 1.0);
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);
    CHECK(records[1].u < records[0].u);  // w = k (r - y) < 0 exits via the negative part
    for (const ClosedLoopRecord& rec : records) {
        CHECK(rec.u <= fx.setup.range.u_max);
        CHECK(rec.u >= fx.setup.range.u_min);
    }
}

TEST_CASE("gain above the oscillation threshold overshoots") {
    // s^2 + s + k has complex roots for k > 1/4.
    const auto& fx = fixtures::get("linear1d");
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.5, 0.5, vec1(0.0), 0.0);
    cfg.dt = 1e-3;
    cfg.horizon = 40.0;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);
    const TrackingMetrics metrics =
        tracking_metrics(records, cfg.r, fx.map.invert_reference(cfg.r), 1e-3);
    CHECK(metrics.overshoot > 0.0);
}

TEST_CASE("hard invariant: u stays in the box on random runs") {
    Rng rng(314159);
    for (const char* name : {"linear1d", "osc_cubic", "scalar_cubic"}) {
        const auto& fx = fixtures::get(name);
        for (int run = 0; run < 60; ++run) {
            const double span = fx.map.y_max() - fx.map.y_min();
            const double r = fx.map.y_min() + (0.05 + 0.9 * rng.uniform01()) * span;
            Eigen::VectorXd x0(fx.setup.plant.n);
            for (int d = 0; d < fx.setup.plant.n; ++d) x0[d] = rng.uniform(-2.0, 2.0);
            ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, rng.uniform(0.01, 2.0), r, x0,
                                 rng.uniform(fx.setup.range.u_min, fx.setup.range.u_max));
            cfg.dt = 1e-2;
            cfg.horizon = 10.0;
            const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);
            for (const ClosedLoopRecord& rec : records) {
                CHECK(rec.u >= fx.setup.range.u_min);
                CHECK(rec.u <= fx.setup.range.u_max);
            }
        }
    }
}

TEST_CASE("validation errors") {
    const auto& fx = fixtures::get("linear1d");
    SUBCASE("reference outside the open range") {
        ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, 1.5, vec1(0.0), 0.0);
        CHECK_THROWS_AS(simulate_closed_loop(cfg, fx.map), ReferenceOutOfRange);
    }
    SUBCASE("nonpositive gain") {
        ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.0, 0.5, vec1(0.0), 0.0);
        CHECK_THROWS_AS(simulate_closed_loop(cfg, fx.map), InvalidArgument);
    }
    SUBCASE("u0 outside the box") {
        ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, 0.5, vec1(0.0), 1.5);
        CHECK_THROWS_AS(simulate_closed_loop(cfg, fx.map), InvalidArgument);
    }
}

TEST_CASE("closed-loop blow-up raises DivergedError") {
    std::vector<Poly> f = {{{1.0, {2, 0}}}};  // dx/dt = x^2
    Poly g = {{1.0, {1}}};
    const PlantSetup setup = make_polynomial_plant("square", 1, -1.0, 1.0, f, g);
    // A fake monotone map suffices for the interconnection bookkeeping.
    const auto& fx = fixtures::get("linear1d");
    ClosedLoopConfig cfg(setup.plant, setup.range, 0.1, 0.5, vec1(2.0), 0.0);
    cfg.dt = 1e-3;
    cfg.horizon = 5.0;
    CHECK_THROWS_AS(simulate_closed_loop(cfg, fx.map), DivergedError);
}

TEST_CASE("windup comparison") {
    const auto& fx = fixtures::get("linear1d");
    const double r = 0.5;
    const double u_r = fx.map.invert_reference(r);
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, r, fx.map.xi(u_r), u_r);
    cfg.dt = 1e-3;
    cfg.horizon = 300.0;
    cfg.record_stride = 10;
    const double tol = 2e-3;

    SUBCASE("zero offset: the two controllers coincide") {
        const WindupComparison cmp = compare_windup(cfg, fx.map, {5.0, 15.0, 0.0}, tol);
        CHECK(cmp.saturating.recovery_time == 0.0);
        CHECK(cmp.clamped.recovery_time == 0.0);
        REQUIRE(cmp.saturating_records.size() == cmp.clamped_records.size());
        for (std::size_t i = 0; i < cmp.saturating_records.size(); ++i) {
            CHECK(cmp.saturating_records[i].u == cmp.clamped_records[i].u);
        }
    }

    SUBCASE("short fault: drive stays interior, trajectories identical") {
        const WindupComparison cmp = compare_windup(cfg, fx.map, {5.0, 5.05, 5.0}, tol);
        CHECK(cmp.clamped.drive_min > fx.setup.range.u_min);
        CHECK(cmp.saturating.recovery_time == cmp.clamped.recovery_time);
        for (std::size_t i = 0; i < cmp.saturating_records.size(); ++i) {
            CHECK(cmp.saturating_records[i].u == cmp.clamped_records[i].u);
        }
    }

    SUBCASE("long fault: only the clamped integrator's recovery grows") {
        const WindupComparison cmp5 = compare_windup(cfg, fx.map, {5.0, 10.0, 5.0}, tol);
        const WindupComparison cmp15 = compare_windup(cfg, fx.map, {5.0, 20.0, 5.0}, tol);
        CHECK(cmp5.clamped.drive_min < fx.setup.range.u_min - 0.5);  // wound up past the box
        CHECK(cmp5.saturating.drive_min >= fx.setup.range.u_min);
        CHECK(cmp15.clamped.recovery_time - cmp5.clamped.recovery_time > 5.0);
        CHECK(std::abs(cmp15.saturating.recovery_time - cmp5.saturating.recovery_time) < 0.5);
    }

    SUBCASE("fault window validation") {
        CHECK_THROWS_AS(compare_windup(cfg, fx.map, {10.0, 5.0, 1.0}, tol), InvalidArgument);
        CHECK_THROWS_AS(compare_windup(cfg, fx.map, {5.0, 400.0, 1.0}, tol), InvalidArgument);
    }
}

TEST_CASE("Lyapunov inequalities hold on the tracking run") {
    const auto& fx = fixtures::get("linear1d");
    ClosedLoopConfig cfg(fx.setup.plant, fx.setup.range, 0.1, 0.5, vec1(0.0), 0.0);
    cfg.dt = 1e-3;
    cfg.horizon = 200.0;
    cfg.record_stride = 10;
    const std::vector<ClosedLoopRecord> records = simulate_closed_loop(cfg, fx.map);
    const LyapunovReport rep = lyapunov_diagnostics(records, fx.map, cfg.r, fx.map.mu(), cfg.k);
    CHECK(rep.eta_star > 0.0);
    CHECK(rep.dv_checked > 0);      // the initial gap exceeds 2 eta*
    CHECK(rep.decay_checked > 0);
    CHECK(rep.violations() == 0);
}
