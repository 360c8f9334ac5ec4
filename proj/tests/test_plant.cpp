#include <doctest.h>

#include <cmath>
#include <fstream>

#include "satint/plant.hpp"
#include "satint/rng.hpp"

using namespace satint;

namespace {

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd x(2);
    x << a, b;
    return x;
}

}  // namespace

TEST_CASE("linear1d decays to the closed form") {
    const PlantSetup setup = builtin_plant("linear1d");
    const Trajectory traj = simulate_constant_input(setup.plant, vec1(2.0), 0.0, 1.0, 1e-3);
    CHECK(traj.times.back() == doctest::Approx(1.0));
    CHECK(traj.states.back()[0] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-6));
    CHECK(traj.outputs.back() == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("equilibrium initial conditions stay put") {
    SUBCASE("linear1d") {
        const PlantSetup setup = builtin_plant("linear1d");
        const Trajectory traj = simulate_constant_input(setup.plant, vec1(0.37), 0.37, 20.0, 1e-2);
        for (const auto& x : traj.states) CHECK(std::abs(x[0] - 0.37) < 1e-8);
    }
    SUBCASE("osc_cubic") {
        const PlantSetup setup = builtin_plant("osc_cubic");
        const Trajectory traj =
            simulate_constant_input(setup.plant, vec2(0.5, 0.0), 0.5, 20.0, 1e-2);
        for (const auto& x : traj.states) {
            CHECK(std::abs(x[0] - 0.5) < 1e-8);
            CHECK(std::abs(x[1]) < 1e-8);
        }
    }
}

TEST_CASE("finite escape raises DivergedError with the escape time") {
    // dx/dt = x^2 from x(0) = 1 blows up at t = 1 (closed form 1/(1-t)).
    std::vector<Poly> f = {{{1.0, {2, 0}}}};
    Poly g = {{1.0, {1}}};
    const PlantSetup setup = make_polynomial_plant("square", 1, -1.0, 1.0, f, g);
    try {
        simulate_constant_input(setup.plant, vec1(1.0), 0.0, 2.0, 1e-4);
        FAIL("expected DivergedError");
    } catch (const DivergedError& e) {
        CHECK(e.escape_time > 0.9);
        CHECK(e.escape_time < 1.01);
    }
}

TEST_CASE("jacobians of a linear plant are exact") {
    const PlantSetup setup = builtin_plant("osc_cubic");
    const Eigen::MatrixXd J = jacobian_x(setup.plant, vec2(0.3, -0.2), 0.1);
    CHECK(J(0, 0) == doctest::Approx(0.0));
    CHECK(J(0, 1) == doctest::Approx(1.0));
    CHECK(J(1, 0) == doctest::Approx(-1.0));
    CHECK(J(1, 1) == doctest::Approx(-2.0));
    const Eigen::VectorXd Ju = jacobian_u(setup.plant, vec2(0.3, -0.2), 0.1);
    CHECK(Ju[0] == doctest::Approx(0.0));
    CHECK(Ju[1] == doctest::Approx(1.0));
}

TEST_CASE("cubic derivative matches the analytic value") {
    // dx/dt = -x^3 + u: df/dx at x = 1 is -3.
    std::vector<Poly> f = {{{-1.0, {3, 0}}, {1.0, {0, 1}}}};
    Poly g = {{1.0, {1}}};
    const PlantSetup setup = make_polynomial_plant("cubic", 1, -1.0, 1.0, f, g);
    CHECK(jacobian_x(setup.plant, vec1(1.0), 0.0)(0, 0) == doctest::Approx(-3.0).epsilon(1e-9));

    // Finite-difference fallback agrees.
    PlantModel fd = setup.plant;
    fd.jac_x = nullptr;
    fd.jac_u = nullptr;
    fd.grad_g = nullptr;
    CHECK(jacobian_x(fd, vec1(1.0), 0.0)(0, 0) == doctest::Approx(-3.0).epsilon(1e-6));
}

TEST_CASE("finite differences track analytic jacobians on a random polynomial plant") {
    Rng rng(11);
    std::vector<Poly> f(2);
    for (auto& p : f) {
        for (int m = 0; m < 4; ++m) {
            Monomial term;
            term.coeff = rng.uniform(-1.0, 1.0);
            term.powers = {rng.uniform_int(0, 2), rng.uniform_int(0, 2), rng.uniform_int(0, 1)};
            p.push_back(term);
        }
    }
    Poly g = {{0.7, {1, 0}}, {-0.3, {0, 2}}};
    const PlantSetup setup = make_polynomial_plant("random", 2, -1.0, 1.0, f, g);
    PlantModel fd = setup.plant;
    fd.jac_x = nullptr;
    fd.jac_u = nullptr;
    fd.grad_g = nullptr;
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd x = vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        const double u = rng.uniform(-1.0, 1.0);
        const double dJ =
            (jacobian_x(setup.plant, x, u) - jacobian_x(fd, x, u)).cwiseAbs().maxCoeff();
        const double dJu = (jacobian_u(setup.plant, x, u) - jacobian_u(fd, x, u)).cwiseAbs().maxCoeff();
        const double dG = (gradient_g(setup.plant, x) - gradient_g(fd, x)).cwiseAbs().maxCoeff();
        CHECK(dJ < 1e-5);
        CHECK(dJu < 1e-5);
        CHECK(dG < 1e-5);
    }
}

TEST_CASE("RK4 order: halving dt cuts the error by about 16") {
    const PlantSetup setup = builtin_plant("linear1d");
    const double exact = 0.3 + 1.7 * std::exp(-1.0);
    auto error_at = [&](double dt) {
        const Trajectory traj = simulate_constant_input(setup.plant, vec1(2.0), 0.3, 1.0, dt);
        return std::abs(traj.states.back()[0] - exact);
    };
    const double ratio = error_at(0.1) / error_at(0.05);
    CHECK(ratio > 16.0 * 0.7);
    CHECK(ratio < 16.0 * 1.3);
}

TEST_CASE("plant registry") {
    CHECK(builtin_plant_names().size() == 3);
    CHECK_THROWS_AS(builtin_plant("nonsense"), InvalidArgument);
    const PlantSetup scalar = builtin_plant("scalar_cubic");
    CHECK(scalar.plant.n == 1);
    CHECK(scalar.range.u_min == -1.0);
    CHECK(scalar.range.u_max == 1.0);
    Eigen::VectorXd dx(1);
    scalar.plant.f(vec1(0.5), 0.2, dx);
    CHECK(dx[0] == doctest::Approx(-0.125 - 0.5 + 0.2));
}

TEST_CASE("plant config loads from JSON") {
    const char* config = R"({
        "name": "damped_cubic",
        "n": 1,
        "umin": -2.0,
        "umax": 2.0,
        "f": [[{"coeff": -1.0, "powers": [1, 0]},
               {"coeff": -0.5, "powers": [3, 0]},
               {"coeff": 1.0, "powers": [0, 1]}]],
        "g": [{"coeff": 1.0, "powers": [1]}]
    })";
    const std::string path = "/tmp/satint_test_plant.json";
    {
        std::ofstream out(path);
        out << config;
    }
    const PlantSetup setup = load_plant(path);
    CHECK(setup.plant.name == "damped_cubic");
    CHECK(setup.plant.n == 1);
    CHECK(setup.range.u_max == 2.0);
    Eigen::VectorXd dx(1);
    setup.plant.f(vec1(1.0), 0.0, dx);
    CHECK(dx[0] == doctest::Approx(-1.5));
    CHECK(jacobian_x(setup.plant, vec1(1.0), 0.0)(0, 0) == doctest::Approx(-2.5));

    CHECK_THROWS_AS(load_plant("/tmp/does_not_exist.json"), InvalidArgument);
}
