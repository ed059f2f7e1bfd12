#pragma once

#include "ivdrem/regression/loop.hpp"

namespace ivdrem::regression {

enum class IvMode { Open, Closed };

/// Instrumental-variable generator.
///
/// Open loop: y_iv = Z_iv/R_iv u and ζ = [−λ/Λ y_iv ; λ/Λ u].
/// Closed loop: the same instrumental plant wrapped in a copy of the real
/// controller and driven by r only, ζ = [−λ/Λ y_iv ; λ/Λ u_iv]. In both cases
/// ζ never sees the plant disturbance.
class IvModel {
public:
    static IvModel open(const TransferFunction& model, const Polynomial& lambda) {
        if (!lti::is_hurwitz(model.den()))
            throw ConfigError("R(θ_iv, s) = " + model.den().to_string() + " is not Hurwitz", "iv.den");
        return IvModel(IvMode::Open, FilteredLoop(model, lambda, std::nullopt, false));
    }

    static IvModel closed(const TransferFunction& model, const Controller& controller, const Polynomial& lambda) {
        const Polynomial cl = closed_loop_polynomial(model, controller.feedback);
        if (!lti::is_hurwitz(cl))
            throw ConfigError("instrumental closed loop is unstable: characteristic polynomial " + cl.to_string(),
                              "iv");
        if (!lti::is_hurwitz(controller.reference.den()))
            throw ConfigError("reference prefilter Q_r = " + controller.reference.den().to_string() +
                                  " is not Hurwitz",
                              "controller.reference");
        return IvModel(IvMode::Closed, FilteredLoop(model, lambda, controller, false));
    }

    [[nodiscard]] IvMode mode() const noexcept { return mode_; }

    /// ζ at the current state for the held drive signal (u or r).
    [[nodiscard]] RegVector zeta(double drive) const { return loop_.sample(drive, 0.0).phi; }
    [[nodiscard]] FilteredLoop::Sample sample(double drive) const { return loop_.sample(drive, 0.0); }

    void advance(double drive, double h, StepIndex step = kNoStep) { loop_.advance(drive, 0.0, h, step); }

private:
    IvModel(IvMode mode, FilteredLoop loop) : mode_(mode), loop_(std::move(loop)) {}

    IvMode mode_;
    FilteredLoop loop_;
};

/// Advances an open-loop instrument one step with u held; returns ζ at the new step.
inline RegVector iv_step_open(IvModel& iv, double u, double h, StepIndex step = kNoStep) {
    if (iv.mode() != IvMode::Open) throw ConfigError("iv_step_open on a closed-loop instrument");
    iv.advance(u, h, step);
    return iv.zeta(u);
}

/// Advances a closed-loop instrument one step with r held; returns ζ at the new step.
inline RegVector iv_step_closed(IvModel& iv, double r, double h, StepIndex step = kNoStep) {
    if (iv.mode() != IvMode::Closed) throw ConfigError("iv_step_closed on an open-loop instrument");
    iv.advance(r, h, step);
    return iv.zeta(r);
}

}  // namespace ivdrem::regression
