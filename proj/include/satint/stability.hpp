#pragma once

#include <cstdint>
#include <vector>

#include "satint/equilibrium.hpp"
#include "satint/plant.hpp"

namespace satint {

/// Per-equilibrium evidence backing a certificate.
struct EvidenceRecord {
    double u0;
    double abscissa;           ///< max real part of eig(A(u0))
    double worst_m_required;   ///< largest envelope factor demanded by this u0's probes
};

/**
 * Sampled uniform-exponential-stability certificate: the decay envelope
 * m * exp(-lambda t) holds on every probe trajectory started within radius
 * eps0 of an equilibrium. Empirical evidence, not a proof; reports that carry
 * it are labeled "sampled certificate".
 */
struct StabilityCertificate {
    double lambda0;  ///< max spectral abscissa over the u-grid (< 0)
    double m;        ///< envelope amplitude, >= 1
    double lambda;   ///< certified decay rate, > 0, <= |lambda0|
    double eps0;     ///< radius on which the envelope was validated
    std::vector<EvidenceRecord> evidence;
};

/// Max real part of the eigenvalues of A(u0) = df/dx at (Xi(u0), u0).
double spectral_abscissa(const PlantModel& plant, const EquilibriumMap& map, double u0);

struct CertifyOptions {
    int n_u = 21;                  ///< equilibria probed along the u-grid
    int n_dirs = 16;               ///< random unit perturbation directions per equilibrium
    std::vector<double> radii;     ///< candidate eps0 values; default geometric 0.01..1 x radius_scale
    double radius_scale = 1.0;
    double horizon_factor = 10.0;  ///< probe horizon = horizon_factor / |lambda0|
    double dt = 1e-2;
    double m_cap = 100.0;
    int lambda_shrinks = 5;        ///< times lambda may shrink by 0.8 looking for a fit
    double lambda_init_factor = 0.9;
    std::uint64_t seed = 1;
    int threads = 1;
};

/**
 * Probes perturbed initial conditions around sampled equilibria and fits the
 * smallest envelope amplitude m and largest validated radius eps0 for a decay
 * rate starting at 0.9 |lambda0|. Throws NotExponentiallyStable when a
 * linearization has nonnegative abscissa, CertificationFailed when no
 * envelope with m <= m_cap fits any candidate radius.
 */
StabilityCertificate certify_exponential_stability(const PlantModel& plant, const EquilibriumMap& map,
                                         const SaturatorSpec& spec, const CertifyOptions& options = {});

}  // namespace satint
