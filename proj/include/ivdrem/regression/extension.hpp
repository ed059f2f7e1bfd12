#pragma once

#include "ivdrem/lti/delay_line.hpp"
#include "ivdrem/core/types.hpp"

#include <span>
#include <vector>

namespace ivdrem::regression {

/// Trapezoidal sliding-window integral ∫_{max(t0, t−T)}^{t} g(s) ds of a
/// vector signal sampled on the grid. Advancing adds the newest trapezoid and,
/// once the window is full, drops the oldest one read back from a delay line,
/// which is the discrete form of ẋ = g(t) − g(t−T) with g ≡ 0 before t0.
class WindowIntegral {
public:
    WindowIntegral(std::size_t width, double window, double h)
        : h_(h), line_(window, h, width), value_(width, 0.0), prev_(width, 0.0), delayed_(width, 0.0),
          prev_delayed_(width, 0.0) {}

    [[nodiscard]] std::size_t width() const noexcept { return value_.size(); }
    [[nodiscard]] std::size_t lag() const noexcept { return line_.lag(); }
    [[nodiscard]] const std::vector<double>& value() const noexcept { return value_; }

    /// Consumes the sample at the next grid point and returns the integral there.
    const std::vector<double>& update(std::span<const double> sample) {
        const std::size_t w = value_.size();
        line_.push_query(sample, delayed_);
        if (count_ > 0) {
            const double half = 0.5 * h_;
            for (std::size_t i = 0; i < w; ++i) value_[i] += half * (sample[i] + prev_[i]);
            if (count_ > static_cast<StepIndex>(line_.lag()))
                for (std::size_t i = 0; i < w; ++i) value_[i] -= half * (delayed_[i] + prev_delayed_[i]);
        }
        std::copy(sample.begin(), sample.end(), prev_.begin());
        std::swap(prev_delayed_, delayed_);
        ++count_;
        return value_;
    }

private:
    double h_;
    lti::DelayLine line_;
    std::vector<double> value_;
    std::vector<double> prev_;
    std::vector<double> delayed_;
    std::vector<double> prev_delayed_;
    StepIndex count_ = 0;
};

/// Sliding-window extension: ϑ = ∫ ζz, ψ = ∫ ζφᵀ over the window T.
class ExtensionState {
public:
    ExtensionState(int dim, double window, double h)
        : dim_(dim), integral_(static_cast<std::size_t>(dim + dim * dim), window, h),
          packed_(static_cast<std::size_t>(dim + dim * dim)) {
        vartheta_.setZero(dim);
        psi_.setZero(dim, dim);
    }

    [[nodiscard]] int dim() const noexcept { return dim_; }
    [[nodiscard]] const RegVector& vartheta() const noexcept { return vartheta_; }
    [[nodiscard]] const RegMatrix& psi() const noexcept { return psi_; }
    [[nodiscard]] std::size_t lag() const noexcept { return integral_.lag(); }

    /// Consumes (z, φ, ζ) at the next grid point.
    void update(double z, const RegVector& phi, const RegVector& zeta) {
        const auto m = static_cast<std::size_t>(dim_);
        for (std::size_t i = 0; i < m; ++i) packed_[i] = zeta(static_cast<int>(i)) * z;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                packed_[m + i * m + j] = zeta(static_cast<int>(i)) * phi(static_cast<int>(j));
        const auto& v = integral_.update(packed_);
        for (std::size_t i = 0; i < m; ++i) vartheta_(static_cast<int>(i)) = v[i];
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) psi_(static_cast<int>(i), static_cast<int>(j)) = v[m + i * m + j];
    }

private:
    int dim_;
    WindowIntegral integral_;
    std::vector<double> packed_;
    RegVector vartheta_;
    RegMatrix psi_;
};

/// Consumes one grid sample and returns (ϑ, ψ) there.
inline std::pair<RegVector, RegMatrix> extension_step(ExtensionState& ext, double z, const RegVector& phi,
                                                      const RegVector& zeta) {
    ext.update(z, phi, zeta);
    return {ext.vartheta(), ext.psi()};
}

}  // namespace ivdrem::regression
