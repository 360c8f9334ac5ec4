#include "satint/gain.hpp"

#include <algorithm>
#include <cmath>

#include "satint/util.hpp"

namespace satint {

TubeW::TubeW(const EquilibriumMap& map, const StabilityCertificate& cert)
    : map_(map), radius_((cert.m + 1.0 / 6.0) * cert.eps0) {}

double TubeW::distance(const Eigen::VectorXd& x) const {
    double best = kInfinity;
    for (const Eigen::VectorXd& xi : map_.xi_values()) {
        best = std::min(best, (x - xi).norm());
    }
    return best;
}

Eigen::VectorXd TubeW::sample_point(Rng& rng) const {
    const double u = rng.uniform(map_.u_min(), map_.u_max());
    const double rho = rng.uniform01() * radius_;
    return map_.xi(u) + rho * rng.unit_vector(map_.state_dim());
}

LipschitzEstimates estimate_lipschitz(const PlantModel& plant, const TubeW& W,
                                      const SaturatorSpec& spec, int n_samples, std::uint64_t seed) {
    if (n_samples <= 0) throw InvalidArgument("estimate_lipschitz: n_samples must be positive");
    Rng rng = Rng::stream(seed, 0);
    double L1 = 0.0, L2 = 0.0, delta_g = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const Eigen::VectorXd x = W.sample_point(rng);
        const double u = rng.uniform(spec.u_min, spec.u_max);
        const Eigen::MatrixXd Jx = jacobian_x(plant, x, u);
        L1 = std::max(L1, Jx.cwiseAbs().rowwise().sum().maxCoeff());  // operator inf-norm
        L2 = std::max(L2, jacobian_u(plant, x, u).norm());
        delta_g = std::max(delta_g, gradient_g(plant, x).norm());
    }
    return LipschitzEstimates{1.1 * L1, 1.1 * L2, 1.1 * delta_g};
}

GainCertificate compute_constants(const StabilityCertificate& cert, const LipschitzEstimates& lip,
                                  double alpha, double mu) {
    if (!(cert.m >= 1.0) || !(cert.lambda > 0.0) || !(cert.eps0 > 0.0) || !(alpha > 0.0) ||
        !(mu > 0.0) || !(lip.L1 > 0.0) || !(lip.L2 > 0.0) || !(lip.delta_g > 0.0)) {
        throw InvalidArgument("compute_constants: all inputs must be positive with m >= 1");
    }
    GainCertificate gc;
    gc.m = cert.m;
    gc.lambda = cert.lambda;
    gc.eps0 = cert.eps0;
    gc.L1 = lip.L1;
    gc.L2 = lip.L2;
    gc.delta_g = lip.delta_g;
    gc.alpha = alpha;
    gc.mu = mu;
    gc.W_radius = (cert.m + 1.0 / 6.0) * cert.eps0;

    const double m = cert.m;
    gc.T = std::log(6.0 * m * (m + 1.0)) / cert.lambda;
    gc.kappa_slew_branch = 1.0 / (6.0 * (m + 1.0) * alpha * gc.T);
    gc.kappa_drift_branch =
        lip.L1 / (6.0 * (m + 1.0) * lip.L2 * gc.T) / (std::exp(lip.L1 * gc.T) - 1.0);
    gc.kappa = std::min(gc.kappa_slew_branch, gc.kappa_drift_branch);
    gc.lambda_tilde = 2.0 * lip.delta_g * (m + 1.0 / 6.0);
    gc.k_max = 2.0 * gc.kappa / (lip.delta_g * (6.0 * m + 1.0));
    return gc;
}

}  // namespace satint
