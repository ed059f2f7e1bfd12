#pragma once

#include "ivdrem/lti/state_space.hpp"

#include <cmath>
#include <optional>

namespace ivdrem::diagnostics {

using lti::Polynomial;
using lti::TransferFunction;

/// R(θ̂, s) = sⁿ + θ̂_0 s^{n−1} + … + θ̂_{n−1} and Z(θ̂, s) = θ̂_n s^{n−1} + … + θ̂_{2n−1}.
inline std::pair<Polynomial, Polynomial> plant_polynomials(const RegVector& theta) {
    const int n = static_cast<int>(theta.size()) / 2;
    std::vector<double> r(static_cast<std::size_t>(n + 1)), z(static_cast<std::size_t>(n));
    r[0] = 1.0;
    for (int i = 0; i < n; ++i) {
        r[static_cast<std::size_t>(i + 1)] = theta(i);
        z[static_cast<std::size_t>(i)] = theta(n + i);
    }
    return {Polynomial(r), Polynomial(z)};
}

struct ObserverConfig {
    Polynomial P{1.0};
    Polynomial Q{0.01, 1.0};
    double rebuild_period = 1.0;  // seconds of simulated time between rebuilds
};

/// Certainty-equivalence disturbance observer
///   f̂ = P_f R(θ̂)/(Q_f Z(θ̂)) y − P_f/Q_f u.
/// θ̂ is frozen into the y-filter every `rebuild_period`; the filter state is
/// carried over. While the latest θ̂ gives a non-Hurwitz or degenerate Z(θ̂)
/// the observer is paused: states and f̂ are held.
class ObserverState {
public:
    ObserverState(const ObserverConfig& cfg, int plant_order, double t0 = 0.0)
        : cfg_(cfg), n_(plant_order), next_rebuild_(t0) {
        if (cfg.P.degree() + n_ > cfg.Q.degree() + n_ - 1)
            throw ConfigError("P_f R/(Q_f Z) is improper: need deg Q_f ≥ deg P_f + 1", "observer");
        if (cfg.Q(0.0) == 0.0 || std::abs(cfg.P(0.0) / cfg.Q(0.0) - 1.0) > 1e-12)
            throw ConfigError("observer filter needs P_f(0)/Q_f(0) = 1", "observer");
        if (!lti::is_hurwitz(cfg.Q)) throw ConfigError("Q_f must be Hurwitz", "observer.Q");
        if (!(cfg.rebuild_period > 0.0)) throw ConfigError("rebuild period must be positive", "observer.rebuild");
        gu_ = lti::realize(TransferFunction(cfg.P, cfg.Q));
    }

    [[nodiscard]] bool paused() const noexcept { return paused_; }
    [[nodiscard]] bool ever_paused() const noexcept { return ever_paused_; }
    [[nodiscard]] int rebuilds() const noexcept { return rebuilds_; }
    [[nodiscard]] double f_hat() const noexcept { return f_hat_; }

    /// Rebuilds the y-filter from θ̂. Returns false (and pauses) if Z(θ̂) is
    /// not Hurwitz of degree n − 1.
    bool rebuild(const RegVector& theta_hat) {
        const auto [R, Z] = plant_polynomials(theta_hat);
        if (Z.degree() != n_ - 1 || Z.is_zero() || !lti::is_hurwitz(Z)) {
            paused_ = true;
            ever_paused_ = true;
            return false;
        }
        auto next = lti::realize(TransferFunction(cfg_.P * R, cfg_.Q * Z));
        if (gy_ && gy_->order() == next.order()) next.x = gy_->x;
        gy_ = std::move(next);
        paused_ = false;
        ++rebuilds_;
        return true;
    }

    /// Advances both filters over the last step, y interpolated linearly and
    /// u held as applied, then returns f̂ at the current sample.
    double step(double t, double y, double u, const RegVector& theta_hat, double h, StepIndex step = kNoStep) {
        if (t >= next_rebuild_ - 0.5 * h) {
            rebuild(theta_hat);
            next_rebuild_ += cfg_.rebuild_period;
        }
        const bool have_prev = prev_.has_value();
        const auto [y0, u0] = prev_.value_or(std::pair{y, u});
        prev_ = std::pair{y, u};
        if (paused_ || !gy_) return f_hat_;
        if (have_prev) {
            advance(*gy_, y0, y, h, step);
            advance(gu_, u0, u0, h, step);
        }
        f_hat_ = gy_->output(y) - gu_.output(u);
        return f_hat_;
    }

private:
    static void advance(lti::StateSpaceModel& m, double v0, double v1, double h, StepIndex step) {
        m.x = lti::rk4_advance(m.x, h, [&](const ModelVector& s, double c) {
            return m.derivative(s, v0 + c * (v1 - v0));
        });
        if (!m.x.allFinite()) throw NumericalError("non-finite observer state", step, "observer");
    }

    ObserverConfig cfg_;
    int n_;
    double next_rebuild_;
    std::optional<lti::StateSpaceModel> gy_;
    lti::StateSpaceModel gu_;
    std::optional<std::pair<double, double>> prev_;
    double f_hat_ = 0.0;
    bool paused_ = true;
    bool ever_paused_ = false;
    int rebuilds_ = 0;
};

inline double observe_disturbance(ObserverState& obs, double t, double y, double u, const RegVector& theta_hat,
                                  double h, StepIndex step = kNoStep) {
    return obs.step(t, y, u, theta_hat, h, step);
}

}  // namespace ivdrem::diagnostics
