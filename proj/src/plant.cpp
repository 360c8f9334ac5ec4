#include "satint/plant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <utility>

#include <json.hpp>

namespace satint {

void rk4_step(const PlantModel& plant, Eigen::VectorXd& x, double t, double dt,
              const std::function<double(double)>& u_of_t, Eigen::VectorXd& k1,
              Eigen::VectorXd& k2, Eigen::VectorXd& k3, Eigen::VectorXd& k4,
              Eigen::VectorXd& scratch) {
    const double u0 = u_of_t(t);
    const double u_half = u_of_t(t + 0.5 * dt);
    const double u1 = u_of_t(t + dt);
    plant.f(x, u0, k1);
    scratch = x + (0.5 * dt) * k1;
    plant.f(scratch, u_half, k2);
    scratch = x + (0.5 * dt) * k2;
    plant.f(scratch, u_half, k3);
    scratch = x + dt * k3;
    plant.f(scratch, u1, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

std::string fmtTime(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", t);
    return std::string(buf);
}

Trajectory run_fixed_step(const PlantModel& plant, const Eigen::VectorXd& x0,
                          const std::function<double(double)>& u_of_t, double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0)) {
        throw InvalidArgument("simulate: horizon and dt must be positive");
    }
    if (x0.size() != plant.n) {
        throw InvalidArgument("simulate: x0 dimension does not match plant '" + plant.name + "'");
    }
    const int n_steps = static_cast<int>(std::ceil(horizon / dt - 1e-12));
    Trajectory traj;
    traj.times.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.inputs.reserve(static_cast<std::size_t>(n_steps) + 1);
    traj.outputs.reserve(static_cast<std::size_t>(n_steps) + 1);

    Eigen::VectorXd x = x0;
    Eigen::VectorXd k1(plant.n), k2(plant.n), k3(plant.n), k4(plant.n), scratch(plant.n);
    double t = 0.0;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(u_of_t(t));
    traj.outputs.push_back(plant.g(x));
    for (int i = 0; i < n_steps; ++i) {
        const double h = std::min(dt, horizon - t);
        rk4_step(plant, x, t, h, u_of_t, k1, k2, k3, k4, scratch);
        t = std::min(horizon, t + h);
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kBlowUpGuard) {
            throw DivergedError("plant '" + plant.name + "' diverged near t=" + fmtTime(t), t);
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.inputs.push_back(u_of_t(t));
        traj.outputs.push_back(plant.g(x));
    }
    return traj;
}

}  // namespace

Trajectory simulate_constant_input(const PlantModel& plant, const Eigen::VectorXd& x0, double u0,
                                   double horizon, double dt) {
    return run_fixed_step(
        plant, x0, [u0](double) { return u0; }, horizon, dt);
}

Trajectory simulate_varying_input(const PlantModel& plant, const Eigen::VectorXd& x0,
                                  const SampledSignal& u, double horizon, double dt) {
    return run_fixed_step(
        plant, x0, [&u](double t) { return u.eval(t); }, horizon, dt);
}

Eigen::MatrixXd jacobian_x(const PlantModel& plant, const Eigen::VectorXd& x, double u) {
    if (plant.jac_x) {
        Eigen::MatrixXd J(plant.n, plant.n);
        plant.jac_x(x, u, J);
        return J;
    }
    const double h = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
    Eigen::MatrixXd J(plant.n, plant.n);
    Eigen::VectorXd xp = x, xm = x, fp(plant.n), fm(plant.n);
    for (int j = 0; j < plant.n; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        plant.f(xp, u, fp);
        plant.f(xm, u, fm);
        J.col(j) = (fp - fm) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return J;
}

Eigen::VectorXd jacobian_u(const PlantModel& plant, const Eigen::VectorXd& x, double u) {
    if (plant.jac_u) {
        Eigen::VectorXd J(plant.n);
        plant.jac_u(x, u, J);
        return J;
    }
    const double h = 1e-6 * (1.0 + std::abs(u));
    Eigen::VectorXd fp(plant.n), fm(plant.n);
    plant.f(x, u + h, fp);
    plant.f(x, u - h, fm);
    return (fp - fm) / (2.0 * h);
}

Eigen::VectorXd gradient_g(const PlantModel& plant, const Eigen::VectorXd& x) {
    if (plant.grad_g) {
        Eigen::VectorXd grad(plant.n);
        plant.grad_g(x, grad);
        return grad;
    }
    const double h = 1e-6 * (1.0 + x.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd grad(plant.n);
    Eigen::VectorXd xp = x, xm = x;
    for (int j = 0; j < plant.n; ++j) {
        xp[j] = x[j] + h;
        xm[j] = x[j] - h;
        grad[j] = (plant.g(xp) - plant.g(xm)) / (2.0 * h);
        xp[j] = x[j];
        xm[j] = x[j];
    }
    return grad;
}

PlantSetup make_polynomial_plant(const std::string& name, int n, double u_min, double u_max,
                                 std::vector<Poly> f_polys, Poly g_poly) {
    if (n <= 0) throw InvalidArgument("polynomial plant: state dimension must be positive");
    if (static_cast<int>(f_polys.size()) != n) {
        throw InvalidArgument("polynomial plant: need one f polynomial per state coordinate");
    }
    const std::size_t n_vars = static_cast<std::size_t>(n) + 1;  // (x1..xn, u)
    for (const Poly& p : f_polys) {
        for (const Monomial& m : p) {
            if (m.powers.size() != n_vars) {
                throw InvalidArgument("polynomial plant: f monomials need " + std::to_string(n_vars) +
                                      " powers (x1..xn, u)");
            }
        }
    }
    for (const Monomial& m : g_poly) {
        if (m.powers.size() != static_cast<std::size_t>(n)) {
            throw InvalidArgument("polynomial plant: g monomials need " + std::to_string(n) + " powers");
        }
    }

    // Exact derivative polynomials, computed once.
    std::vector<std::vector<Poly>> df_dx(static_cast<std::size_t>(n));
    std::vector<Poly> df_du(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        df_dx[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            df_dx[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                poly_derivative(f_polys[static_cast<std::size_t>(i)], static_cast<std::size_t>(j));
        }
        df_du[static_cast<std::size_t>(i)] =
            poly_derivative(f_polys[static_cast<std::size_t>(i)], static_cast<std::size_t>(n));
    }
    std::vector<Poly> dg(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) dg[static_cast<std::size_t>(j)] = poly_derivative(g_poly, static_cast<std::size_t>(j));

    constexpr int kMaxDim = 15;
    if (n > kMaxDim) throw InvalidArgument("polynomial plant: state dimension too large");

    PlantModel model;
    model.name = name;
    model.n = n;
    model.f = [n, f = std::move(f_polys)](const Eigen::VectorXd& x, double u, Eigen::VectorXd& out) {
        double vars[kMaxDim + 1];
        for (int i = 0; i < n; ++i) vars[i] = x[i];
        vars[n] = u;
        for (int i = 0; i < n; ++i) out[i] = poly_eval(f[static_cast<std::size_t>(i)], vars);
    };
    model.g = [n, gp = g_poly](const Eigen::VectorXd& x) {
        double vars[kMaxDim];
        for (int i = 0; i < n; ++i) vars[i] = x[i];
        return poly_eval(gp, vars);
    };
    model.jac_x = [n, d = std::move(df_dx)](const Eigen::VectorXd& x, double u, Eigen::MatrixXd& J) {
        double vars[kMaxDim + 1];
        for (int i = 0; i < n; ++i) vars[i] = x[i];
        vars[n] = u;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                J(i, j) = poly_eval(d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], vars);
    };
    model.jac_u = [n, d = std::move(df_du)](const Eigen::VectorXd& x, double u, Eigen::VectorXd& J) {
        double vars[kMaxDim + 1];
        for (int i = 0; i < n; ++i) vars[i] = x[i];
        vars[n] = u;
        for (int i = 0; i < n; ++i) J[i] = poly_eval(d[static_cast<std::size_t>(i)], vars);
    };
    model.grad_g = [n, d = std::move(dg)](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        double vars[kMaxDim];
        for (int i = 0; i < n; ++i) vars[i] = x[i];
        for (int j = 0; j < n; ++j) grad[j] = poly_eval(d[static_cast<std::size_t>(j)], vars);
    };
    return PlantSetup{std::move(model), SaturatorSpec(u_min, u_max)};
}

std::vector<std::string> builtin_plant_names() { return {"linear1d", "osc_cubic", "scalar_cubic"}; }

PlantSetup builtin_plant(const std::string& name) {
    if (name == "linear1d") {
        // dx/dt = -x + u, y = x
        std::vector<Poly> f = {{{-1.0, {1, 0}}, {1.0, {0, 1}}}};
        Poly g = {{1.0, {1}}};
        return make_polynomial_plant(name, 1, -1.0, 1.0, std::move(f), std::move(g));
    }
    if (name == "osc_cubic") {
        // dx1/dt = x2, dx2/dt = -x1 - 2 x2 + u, y = x1 + x1^3
        std::vector<Poly> f = {{{1.0, {0, 1, 0}}},
                               {{-1.0, {1, 0, 0}}, {-2.0, {0, 1, 0}}, {1.0, {0, 0, 1}}}};
        Poly g = {{1.0, {1, 0}}, {1.0, {3, 0}}};
        return make_polynomial_plant(name, 2, -1.0, 1.0, std::move(f), std::move(g));
    }
    if (name == "scalar_cubic") {
        // dx/dt = -x^3 - x + u, y = x
        std::vector<Poly> f = {{{-1.0, {3, 0}}, {-1.0, {1, 0}}, {1.0, {0, 1}}}};
        Poly g = {{1.0, {1}}};
        return make_polynomial_plant(name, 1, -1.0, 1.0, std::move(f), std::move(g));
    }
    throw InvalidArgument("unknown builtin plant '" + name + "'");
}

namespace {

Poly poly_from_json(const nlohmann::json& arr, std::size_t n_vars, const std::string& where) {
    Poly p;
    for (const auto& term : arr) {
        Monomial m;
        m.coeff = term.at("coeff").get<double>();
        for (const auto& pw : term.at("powers")) {
            const int e = pw.get<int>();
            if (e < 0) throw InvalidArgument("plant config: negative power in " + where);
            m.powers.push_back(e);
        }
        if (m.powers.size() != n_vars) {
            throw InvalidArgument("plant config: " + where + " monomial needs " +
                                  std::to_string(n_vars) + " powers");
        }
        p.push_back(std::move(m));
    }
    return p;
}

}  // namespace

PlantSetup load_plant_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open plant config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("plant config '" + path + "': " + e.what());
    }
    try {
        const std::string name = j.at("name").get<std::string>();
        const int n = j.at("n").get<int>();
        const double u_min = j.at("umin").get<double>();
        const double u_max = j.at("umax").get<double>();
        const auto& f_arr = j.at("f");
        if (!f_arr.is_array() || static_cast<int>(f_arr.size()) != n) {
            throw InvalidArgument("plant config: f must list one monomial array per coordinate");
        }
        std::vector<Poly> f_polys;
        for (int i = 0; i < n; ++i) {
            f_polys.push_back(poly_from_json(f_arr.at(static_cast<std::size_t>(i)),
                                             static_cast<std::size_t>(n) + 1,
                                             "f[" + std::to_string(i) + "]"));
        }
        Poly g_poly = poly_from_json(j.at("g"), static_cast<std::size_t>(n), "g");
        return make_polynomial_plant(name, n, u_min, u_max, std::move(f_polys), std::move(g_poly));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("plant config '" + path + "': " + e.what());
    }
}

PlantSetup load_plant(const std::string& name_or_path) {
    for (const std::string& b : builtin_plant_names()) {
        if (name_or_path == b) return builtin_plant(name_or_path);
    }
    return load_plant_config(name_or_path);
}

}  // namespace satint
