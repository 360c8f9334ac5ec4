#pragma once

#include <cstdint>

#include "satint/equilibrium.hpp"
#include "satint/rng.hpp"
#include "satint/stability.hpp"

namespace satint {

/**
 * Tube around the equilibrium curve: all x whose distance to the sampled
 * curve is below (m + 1/6) * eps0. Lipschitz constants are taken over this
 * region, since slowly driven trajectories that start near the curve stay
 * inside it.
 */
class TubeW {
public:
    TubeW(const EquilibriumMap& map, const StabilityCertificate& cert);

    double radius() const { return radius_; }

    /// Distance from x to the sampled equilibrium curve (min over grid nodes).
    double distance(const Eigen::VectorXd& x) const;

    bool contains(const Eigen::VectorXd& x) const { return distance(x) < radius_; }

    /// Random point inside the tube: Xi(u) + rho * dir with rho < radius.
    Eigen::VectorXd sample_point(Rng& rng) const;

    const EquilibriumMap& map() const { return map_; }

private:
    EquilibriumMap map_;
    double radius_;
};

/// Sampled Lipschitz upper estimates of f and g over the tube.
struct LipschitzEstimates {
    double L1;       ///< operator inf-norm of df/dx, inflated by 1.1
    double L2;       ///< norm of df/du, inflated by 1.1
    double delta_g;  ///< norm of grad g, inflated by 1.1
};

/**
 * Jacobian-norm sampling over W x [u_min, u_max], inflated by a 1.1 safety
 * factor. Samples are drawn from one seeded stream, so enlarging n_samples
 * extends the sample set and the estimates never decrease.
 */
LipschitzEstimates estimate_lipschitz(const PlantModel& plant, const TubeW& W,
                                      const SaturatorSpec& spec, int n_samples,
                                      std::uint64_t seed = 1);

/**
 * The closed-form gain-selection constants:
 *   T            = (1/lambda) * ln(6 m (m+1))
 *   kappa        = min{ 1 / (6 (m+1) alpha T),
 *                       L1 / (6 (m+1) L2 T) * 1 / (e^{L1 T} - 1) }
 *   lambda_tilde = 2 delta_g (m + 1/6)
 *   k_max        = 2 kappa / (delta_g (6 m + 1))
 *
 * The sampled stability constants and tube radius are carried along so one
 * struct holds everything a report needs.
 */
struct GainCertificate {
    double m;
    double lambda;
    double eps0;
    double L1;
    double L2;
    double delta_g;
    double alpha;
    double mu;
    double W_radius;
    double T;
    double kappa;
    double kappa_slew_branch;   ///< first min-branch: equilibrium drift limit
    double kappa_drift_branch;  ///< second min-branch: trajectory deviation limit
    double lambda_tilde;
    double k_max;
};

GainCertificate compute_constants(const StabilityCertificate& cert, const LipschitzEstimates& lip,
                                  double alpha, double mu);

}  // namespace satint
