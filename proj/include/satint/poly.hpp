#pragma once

#include <cstddef>
#include <vector>

namespace satint {

/// coeff * prod_i vars[i]^powers[i]
struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;
};

/// Sparse polynomial in `powers.size()` variables.
using Poly = std::vector<Monomial>;

inline double poly_eval(const Poly& p, const double* vars) {
    double sum = 0.0;
    for (const Monomial& m : p) {
        double term = m.coeff;
        for (std::size_t v = 0; v < m.powers.size(); ++v) {
            for (int k = 0; k < m.powers[v]; ++k) term *= vars[v];
        }
        sum += term;
    }
    return sum;
}

/// Exact partial derivative with respect to variable `var`.
inline Poly poly_derivative(const Poly& p, std::size_t var) {
    Poly out;
    for (const Monomial& m : p) {
        if (var >= m.powers.size() || m.powers[var] == 0) continue;
        Monomial d;
        d.coeff = m.coeff * m.powers[var];
        d.powers = m.powers;
        d.powers[var] -= 1;
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace satint
