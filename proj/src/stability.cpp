#include "satint/stability.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "satint/rng.hpp"
#include "satint/util.hpp"

namespace satint {

double spectral_abscissa(const PlantModel& plant, const EquilibriumMap& map, double u0) {
    const Eigen::MatrixXd A = jacobian_x(plant, map.xi(u0), u0);
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
    return solver.eigenvalues().real().maxCoeff();
}

namespace {

struct Probe {
    std::size_t u_index;
    double radius;
    std::vector<double> m_required;  // one per candidate lambda
};

}  // namespace

StabilityCertificate certify_exponential_stability(const PlantModel& plant, const EquilibriumMap& map,
                                         const SaturatorSpec& spec, const CertifyOptions& options) {
    const std::vector<double> u_probe = linspace(spec.u_min, spec.u_max, options.n_u);
    std::vector<double> radii = options.radii;
    if (radii.empty()) {
        radii = geomspace(0.01, 1.0, 9);
        for (double& r : radii) r *= options.radius_scale;
    }
    std::sort(radii.begin(), radii.end());

    std::vector<double> abscissae(u_probe.size());
    for (std::size_t i = 0; i < u_probe.size(); ++i) {
        abscissae[i] = spectral_abscissa(plant, map, u_probe[i]);
        if (abscissae[i] >= 0.0) {
            throw NotExponentiallyStable("linearization at u0=" + fmt_g12(u_probe[i]) +
                                             " has spectral abscissa " + fmt_g12(abscissae[i]),
                                         u_probe[i], abscissae[i]);
        }
    }
    const double lambda0 = *std::max_element(abscissae.begin(), abscissae.end());

    std::vector<double> lambdas;
    for (int j = 0; j <= options.lambda_shrinks; ++j) {
        lambdas.push_back(options.lambda_init_factor * std::abs(lambda0) * std::pow(0.8, j));
    }

    const double horizon = options.horizon_factor / std::abs(lambda0);
    const int n_probes = static_cast<int>(u_probe.size()) * options.n_dirs * static_cast<int>(radii.size());
    std::vector<Probe> probes(static_cast<std::size_t>(n_probes));

    parallel_for(n_probes, options.threads, [&](int idx) {
        const std::size_t per_u = static_cast<std::size_t>(options.n_dirs) * radii.size();
        const std::size_t ui = static_cast<std::size_t>(idx) / per_u;
        const std::size_t rem = static_cast<std::size_t>(idx) % per_u;
        const std::size_t di = rem / radii.size();
        const std::size_t ri = rem % radii.size();

        // One direction stream per (u0, dir) pair so radii share directions.
        Rng rng = Rng::stream(options.seed, ui * 1000003ULL + di);
        const Eigen::VectorXd dir = rng.unit_vector(plant.n);

        const double u0 = u_probe[ui];
        const double rho = radii[ri];
        const Eigen::VectorXd xi0 = map.xi(u0);

        Probe& probe = probes[static_cast<std::size_t>(idx)];
        probe.u_index = ui;
        probe.radius = rho;
        probe.m_required.assign(lambdas.size(), 1.0);
        try {
            const Trajectory traj =
                simulate_constant_input(plant, xi0 + rho * dir, u0, horizon, options.dt);
            for (std::size_t s = 0; s < traj.times.size(); ++s) {
                const double ratio = (traj.states[s] - xi0).norm() / rho;
                for (std::size_t l = 0; l < lambdas.size(); ++l) {
                    const double need = ratio * std::exp(lambdas[l] * traj.times[s]);
                    probe.m_required[l] = std::max(probe.m_required[l], need);
                }
            }
        } catch (const DivergedError&) {
            probe.m_required.assign(lambdas.size(), kInfinity);
        }
    });

    // Prefer the fastest decay rate, then the largest validated radius.
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        for (std::size_t ri = radii.size(); ri-- > 0;) {
            const double eps0 = radii[ri];
            double m_need = 1.0;
            for (const Probe& p : probes) {
                if (p.radius <= eps0) m_need = std::max(m_need, p.m_required[l]);
            }
            if (m_need <= options.m_cap) {
                StabilityCertificate cert;
                cert.lambda0 = lambda0;
                cert.lambda = lambdas[l];
                cert.m = m_need;
                cert.eps0 = eps0;
                cert.evidence.reserve(u_probe.size());
                for (std::size_t ui = 0; ui < u_probe.size(); ++ui) {
                    EvidenceRecord rec;
                    rec.u0 = u_probe[ui];
                    rec.abscissa = abscissae[ui];
                    rec.worst_m_required = 1.0;
                    for (const Probe& p : probes) {
                        if (p.u_index == ui && p.radius <= eps0) {
                            rec.worst_m_required = std::max(rec.worst_m_required, p.m_required[l]);
                        }
                    }
                    cert.evidence.push_back(rec);
                }
                return cert;
            }
        }
    }

    const Probe* worst = &probes.front();
    for (const Probe& p : probes) {
        if (p.m_required.back() > worst->m_required.back()) worst = &p;
    }
    throw CertificationFailed("no decay envelope with m <= " + fmt_g12(options.m_cap) +
                                  " fits the probe set (worst probe: u0=" +
                                  fmt_g12(u_probe[worst->u_index]) + ", radius=" +
                                  fmt_g12(worst->radius) + ")",
                              u_probe[worst->u_index], worst->radius);
}

}  // namespace satint
