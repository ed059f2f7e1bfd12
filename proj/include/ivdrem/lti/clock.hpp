#pragma once

#include "ivdrem/core/errors.hpp"

#include <cmath>

namespace ivdrem::lti {

/// Uniform time grid. Time is always t0 + k·h, never a running sum.
class SimClock {
public:
    SimClock(double t0, double h) : t0_(t0), h_(h) {
        if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("step size must be positive and finite", "grid.h");
    }

    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] StepIndex k() const noexcept { return k_; }
    [[nodiscard]] double t() const noexcept { return time_at(k_); }
    [[nodiscard]] double time_at(StepIndex k) const noexcept { return t0_ + static_cast<double>(k) * h_; }

    void tick() noexcept { ++k_; }

    /// Number of steps of size h that span `duration` exactly, or throws.
    [[nodiscard]] static StepIndex steps_in(double duration, double h, const char* field = "") {
        const double ratio = duration / h;
        const double rounded = std::round(ratio);
        if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-12 * rounded) {
            throw ConfigError("duration " + std::to_string(duration) + " is not a positive integer multiple of h = " +
                                  std::to_string(h),
                              field);
        }
        return static_cast<StepIndex>(rounded);
    }

private:
    double t0_;
    double h_;
    StepIndex k_ = 0;
};

}  // namespace ivdrem::lti
