#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "satint/errors.hpp"

namespace satint {

/**
 * Scalar signal sampled on an increasing time grid.
 *
 * Interp::Hold reads as a step function (left-continuous hold),
 * Interp::Linear as the piecewise-linear interpolant. Evaluation outside
 * [t_begin, t_end] clamps to the nearest endpoint value.
 */
class SampledSignal {
public:
    enum class Interp { Hold, Linear };

    SampledSignal() = default;

    SampledSignal(std::vector<double> times, std::vector<double> values, Interp interp)
        : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
        if (times_.size() != values_.size() || times_.empty()) {
            throw InvalidArgument("SampledSignal: times and values must be nonempty and equal length");
        }
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (times_[i] <= times_[i - 1]) {
                throw InvalidArgument("SampledSignal: times must be strictly increasing");
            }
        }
    }

    /// Constant signal on [0, horizon].
    static SampledSignal constant(double value, double horizon) {
        return SampledSignal({0.0, horizon}, {value, value}, Interp::Hold);
    }

    double eval(double t) const {
        if (t <= times_.front()) return values_.front();
        if (t >= times_.back()) return values_.back();
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
        const std::size_t lo = hi - 1;
        if (interp_ == Interp::Hold) return values_[lo];
        const double frac = (t - times_[lo]) / (times_[hi] - times_[lo]);
        return values_[lo] + frac * (values_[hi] - values_[lo]);
    }

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
    Interp interp_ = Interp::Hold;
};

}  // namespace satint
