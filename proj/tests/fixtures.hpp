#pragma once

// Cached per-plant pipeline artifacts shared across test files.

#include <map>
#include <string>

#include "satint/gain.hpp"

namespace fixtures {

struct PlantFixture {
    satint::PlantSetup setup;
    satint::EquilibriumMap map;
    satint::StabilityCertificate cert;
    satint::GainCertificate gain;
};

inline const PlantFixture& get(const std::string& name) {
    static std::map<std::string, PlantFixture> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;

    satint::PlantSetup setup = satint::builtin_plant(name);
    satint::EquilibriumMap map = satint::EquilibriumMap::build(setup.plant, setup.range, 201);
    satint::CertifyOptions copts;
    copts.threads = 2;
    satint::StabilityCertificate cert =
        satint::certify_exponential_stability(setup.plant, map, setup.range, copts);
    const satint::TubeW tube(map, cert);
    const satint::LipschitzEstimates lip =
        satint::estimate_lipschitz(setup.plant, tube, setup.range, 2000);
    satint::GainCertificate gain = satint::compute_constants(cert, lip, map.alpha(), map.mu());
    auto inserted = cache.emplace(
        name, PlantFixture{std::move(setup), std::move(map), std::move(cert), std::move(gain)});
    return inserted.first->second;
}

}  // namespace fixtures
