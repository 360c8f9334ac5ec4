#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "satint/roa.hpp"

using namespace satint;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

StabilityCertificate forced_cert(double eps0) {
    StabilityCertificate cert;
    cert.lambda0 = -1.0;
    cert.m = 1.0;
    cert.lambda = 0.9;
    cert.eps0 = eps0;
    return cert;
}

}  // namespace

TEST_CASE("membership: equilibria are always members") {
    const auto& fx = fixtures::get("osc_cubic");
    for (double u0 : {-0.9, 0.0, 0.7}) {
        CHECK(membership_XT(fx.setup.plant, fx.map, fx.cert, fx.map.xi(u0), u0, 0.5));
        CHECK(membership_XT(fx.setup.plant, fx.map, fx.cert, fx.map.xi(u0), u0, 5.0));
    }
}

TEST_CASE("membership band on linear1d: |x0 - u0| <= eps0/2 e^T") {
    // eps0 = 0.5, T = 3: members iff |x0 - u0| <= 0.25 e^3 = 5.0214.
    const auto& fx = fixtures::get("linear1d");
    const StabilityCertificate cert = forced_cert(0.5);
    CHECK(membership_XT(fx.setup.plant, fx.map, cert, vec1(5.0), 0.0, 3.0));
    CHECK_FALSE(membership_XT(fx.setup.plant, fx.map, cert, vec1(5.1), 0.0, 3.0));
    CHECK(membership_XT(fx.setup.plant, fx.map, cert, vec1(-4.5), 0.5, 3.0));
    CHECK_FALSE(membership_XT(fx.setup.plant, fx.map, cert, vec1(-4.7), 0.5, 3.0));
}

TEST_CASE("membership: blow-up means non-membership") {
    std::vector<Poly> f = {{{1.0, {2, 0}}}};  // dx/dt = x^2, finite escape from 1
    Poly g = {{1.0, {1}}};
    const PlantSetup setup = make_polynomial_plant("square", 1, -1.0, 1.0, f, g);
    const auto& fx = fixtures::get("linear1d");
    CHECK_FALSE(membership_XT(setup.plant, fx.map, fx.cert, vec1(1.0), 0.0, 3.0));
}

TEST_CASE("grid sweep classifies the linear1d band exactly") {
    const auto& fx = fixtures::get("linear1d");
    const StabilityCertificate cert = forced_cert(0.5);
    RoaGrid grid;
    grid.x_axes = {GridAxis{-6.0, 6.0, 61}};
    grid.u_axis = GridAxis{-1.0, 1.0, 11};
    XtSampleOptions opts;
    opts.threads = 2;
    const XtSampleResult result = sample_XT(fx.setup.plant, fx.map, cert, 3.0, grid, opts);
    CHECK(result.samples.size() == 61u * 11u);

    const double band = 0.25 * std::exp(3.0);
    int members = 0;
    for (const XtSample& sample : result.samples) {
        const bool predicted = std::abs(sample.x0[0] - sample.u0) <= band;
        CHECK(sample.in_XT == predicted);
        if (sample.in_XT) ++members;
    }
    CHECK(members == result.members);
    CHECK(members > 0);
    CHECK(result.nesting_violations == 0);   // X_T inside X_{2T}
    CHECK(result.members_2T >= result.members);
}

TEST_CASE("single-node grid at an equilibrium") {
    const auto& fx = fixtures::get("linear1d");
    RoaGrid grid;
    grid.x_axes = {GridAxis{0.2, 0.2, 1}};
    grid.u_axis = GridAxis{0.2, 0.2, 1};
    const XtSampleResult result = sample_XT(fx.setup.plant, fx.map, fx.cert, 2.0, grid);
    REQUIRE(result.samples.size() == 1);
    CHECK(result.samples[0].in_XT);
}

TEST_CASE("empirical gain selection on linear1d accepts k_start") {
    const auto& fx = fixtures::get("linear1d");
    const StabilityCertificate cert = forced_cert(0.5);
    RoaGrid grid;
    grid.x_axes = {GridAxis{-4.0, 4.0, 9}};
    grid.u_axis = GridAxis{-0.8, 0.8, 5};
    XtSampleOptions sopts;
    sopts.threads = 2;
    XtSampleResult result = sample_XT(fx.setup.plant, fx.map, cert, 3.0, grid, sopts);
    REQUIRE(result.members > 0);

    GainSelectionOptions gopts;
    gopts.T_roa = 3.0;
    gopts.threads = 2;
    const GainSelection selection = select_gain_empirical(
        fx.setup.plant, fx.map, cert, result.samples, 0.5, 1.0, fx.gain.k_max, gopts);
    CHECK(selection.k_emp == 1.0);  // every member converges at the starting gain
    CHECK(selection.halvings == 0);
    CHECK(selection.k_cert == fx.gain.k_max);
    CHECK(selection.k_emp > selection.k_cert);  // empirical bound far less conservative
    CHECK(selection.members_tested == result.members);

    const double tol_settle = 1e-3 * (fx.map.y_max() - fx.map.y_min());
    for (const XtSample& sample : result.samples) {
        if (!sample.in_XT) continue;
        CHECK(sample.tested);
        CHECK(sample.converged);
        CHECK(std::isfinite(sample.settle_time));
        (void)tol_settle;
    }
}

TEST_CASE("empirical gain selection on osc_cubic returns a finite gain") {
    const auto& fx = fixtures::get("osc_cubic");
    RoaGrid grid;
    grid.x_axes = {GridAxis{-1.0, 1.0, 5}, GridAxis{-0.5, 0.5, 3}};
    grid.u_axis = GridAxis{-0.8, 0.8, 3};
    XtSampleOptions sopts;
    sopts.threads = 2;
    XtSampleResult result = sample_XT(fx.setup.plant, fx.map, fx.cert, 3.0, grid, sopts);
    REQUIRE(result.members > 0);
    GainSelectionOptions gopts;
    gopts.T_roa = 3.0;
    gopts.threads = 2;
    const GainSelection selection = select_gain_empirical(fx.setup.plant, fx.map, fx.cert,
                                                          result.samples, 1.0, 1.0, 0.0, gopts);
    CHECK(selection.k_emp > 0.0);
    CHECK(selection.k_emp <= 1.0);
}

TEST_CASE("empty member set is rejected") {
    const auto& fx = fixtures::get("linear1d");
    std::vector<XtSample> samples(3);
    for (auto& s : samples) {
        s.x0 = vec1(0.0);
        s.u0 = 0.0;
        s.in_XT = false;
    }
    CHECK_THROWS_AS(
        select_gain_empirical(fx.setup.plant, fx.map, fx.cert, samples, 0.5, 1.0),
        InvalidArgument);
}

TEST_CASE("converged members re-validate on a denser grid") {
    const auto& fx = fixtures::get("linear1d");
    const StabilityCertificate cert = forced_cert(0.5);
    RoaGrid coarse;
    coarse.x_axes = {GridAxis{-4.0, 4.0, 9}};
    coarse.u_axis = GridAxis{-0.8, 0.8, 5};
    XtSampleOptions sopts;
    sopts.threads = 2;
    XtSampleResult base = sample_XT(fx.setup.plant, fx.map, cert, 3.0, coarse, sopts);
    GainSelectionOptions gopts;
    gopts.T_roa = 3.0;
    gopts.threads = 2;
    const GainSelection selection = select_gain_empirical(fx.setup.plant, fx.map, cert,
                                                          base.samples, 0.5, 1.0, 0.0, gopts);

    RoaGrid dense;
    dense.x_axes = {GridAxis{-4.0, 4.0, 17}};
    dense.u_axis = GridAxis{-0.8, 0.8, 9};
    XtSampleResult fresh = sample_XT(fx.setup.plant, fx.map, cert, 3.0, dense, sopts);
    int tested = 0, converged = 0;
    const GainSelection dense_sel = select_gain_empirical(
        fx.setup.plant, fx.map, cert, fresh.samples, 0.5, selection.k_emp, 0.0, gopts);
    for (const XtSample& s : fresh.samples) {
        if (!s.in_XT) continue;
        ++tested;
        if (s.converged) ++converged;
    }
    CHECK(dense_sel.k_emp == selection.k_emp);  // no halving needed on the denser grid
    CHECK(tested > 0);
    CHECK(static_cast<double>(converged) >= 0.99 * static_cast<double>(tested));
}
