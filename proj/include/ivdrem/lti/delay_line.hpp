#pragma once

#include "ivdrem/lti/clock.hpp"

#include <algorithm>
#include <span>
#include <vector>

namespace ivdrem::lti {

/// Exact sample delay of round(T/h) steps for fixed-width vector samples.
///
/// Samples are stored verbatim, so a delayed read is bit-identical to what was
/// pushed. Reads that reach before the first push return zeros (signals are 0
/// before t0).
class DelayLine {
public:
    DelayLine(double delay, double h, std::size_t width)
        : lag_(static_cast<std::size_t>(SimClock::steps_in(delay, h, "T"))),
          width_(width),
          ring_(lag_ * width, 0.0) {}

    [[nodiscard]] std::size_t lag() const noexcept { return lag_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }

    /// Stores `sample` for the current step and writes the sample from `lag`
    /// steps earlier into `delayed`.
    void push_query(std::span<const double> sample, std::span<double> delayed) {
        double* slot = ring_.data() + head_ * width_;
        std::copy_n(slot, width_, delayed.begin());
        std::copy_n(sample.begin(), width_, slot);
        head_ = head_ + 1 == lag_ ? 0 : head_ + 1;
    }

    [[nodiscard]] std::vector<double> push_query(std::span<const double> sample) {
        std::vector<double> out(width_);
        push_query(sample, out);
        return out;
    }

private:
    std::size_t lag_;
    std::size_t width_;
    std::vector<double> ring_;
    std::size_t head_ = 0;
};

}  // namespace ivdrem::lti
