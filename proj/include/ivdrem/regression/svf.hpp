#pragma once

#include "ivdrem/lti/state_space.hpp"

#include <optional>

namespace ivdrem::regression {

using lti::Polynomial;

/// Companion realization of 1/Λ(s). With state x = [v, v', …, v^(n-1)] and
/// v = (1/Λ)q the filter yields
///   λ_{n-1}(s)/Λ(s) q = [x_{n-1}, …, x_0]   and   sⁿ/Λ(s) q = q − Σ λ_j x_j.
class StateVariableFilter {
public:
    StateVariableFilter() = default;
    explicit StateVariableFilter(const Polynomial& lambda) : lambda_(lambda) {
        if (!lambda.is_monic()) throw ConfigError("Λ(s) must be monic, got " + lambda.to_string(), "lambda");
        if (lambda.degree() < 1) throw ConfigError("Λ(s) must have degree ≥ 1", "lambda");
        if (lambda.degree() > kMaxPlantOrder) throw ConfigError("Λ(s) degree exceeds supported plant order", "lambda");
        if (!lti::is_hurwitz(lambda)) throw ConfigError("Λ(s) = " + lambda.to_string() + " is not Hurwitz", "lambda");
        lti::companion(lambda, A_, B_);
    }

    [[nodiscard]] int order() const noexcept { return lambda_.degree(); }
    [[nodiscard]] const Polynomial& lambda() const noexcept { return lambda_; }
    [[nodiscard]] const ModelMatrix& A() const noexcept { return A_; }
    [[nodiscard]] const ModelVector& B() const noexcept { return B_; }

    /// λ_{n-1}/Λ applied: components ordered s^{n-1} … s^0.
    template <typename Seg>
    [[nodiscard]] RegVector lambda_outputs(const Seg& x) const {
        const int n = order();
        RegVector out(n);
        for (int i = 0; i < n; ++i) out(i) = x(n - 1 - i);
        return out;
    }

    /// sⁿ/Λ applied, given the current input sample q.
    template <typename Seg>
    [[nodiscard]] double top_output(const Seg& x, double q) const {
        double acc = q;
        for (int j = 0; j < order(); ++j) acc -= lambda_.coeff_of_power(j) * x(j);
        return acc;
    }

private:
    Polynomial lambda_;
    ModelMatrix A_;
    ModelVector B_;
};

/// Filtered regressor pair of the linear regression z = φᵀθ + w.
struct LreSample {
    double z = 0.0;
    RegVector phi;
};

/// Builds φ = [−λ/Λ y ; λ/Λ u] from the two λ-output blocks.
inline RegVector stack_regressor(const RegVector& y_block, const RegVector& u_block) {
    const int n = static_cast<int>(y_block.size());
    RegVector phi(2 * n);
    phi.head(n) = -y_block;
    phi.tail(n) = u_block;
    return phi;
}

/// Standalone SVF bank on sampled (y, u) with both inputs held over a step.
/// The experiment runner couples the y filter to the plant instead (see
/// MeasuredLoop); this form is for analysis of recorded data.
class SvfBank {
public:
    explicit SvfBank(const Polynomial& lambda) : filt_(lambda) {
        const int n = filt_.order();
        xy_.setZero(n);
        xu_.setZero(n);
    }

    [[nodiscard]] int order() const noexcept { return filt_.order(); }
    [[nodiscard]] const StateVariableFilter& filter() const noexcept { return filt_; }

    /// Advances both filters one step with (y, u) held and returns (z, φ) at
    /// the new step.
    LreSample step(double y, double u, double h, StepIndex step = kNoStep) {
        advance(xy_, y, h);
        advance(xu_, u, h);
        if (!xy_.allFinite() || !xu_.allFinite()) throw NumericalError("non-finite SVF state", step, "svf_step");
        return {filt_.top_output(xy_, y), stack_regressor(filt_.lambda_outputs(xy_), filt_.lambda_outputs(xu_))};
    }

private:
    void advance(ModelVector& x, double q, double h) const {
        x = lti::rk4_advance(x, h, [&](const ModelVector& s, double) -> ModelVector {
            return filt_.A() * s + filt_.B() * q;
        });
    }

    StateVariableFilter filt_;
    ModelVector xy_;
    ModelVector xu_;
};

/// w = [b_{n-1} … b_0]·(λ_{n-1}/Λ) f, the LRE perturbation. Simulation only.
class TruthChannel {
public:
    explicit TruthChannel(const Polynomial& lambda) : filt_(lambda) { xf_.setZero(filt_.order()); }

    /// Advances with f held and returns w at the new step for numerator
    /// coefficients `b` (highest power first, length n).
    double step(double f, const RegVector& b, double h) {
        xf_ = lti::rk4_advance(xf_, h, [&](const ModelVector& s, double) -> ModelVector {
            return filt_.A() * s + filt_.B() * f;
        });
        return b.dot(filt_.lambda_outputs(xf_));
    }

private:
    StateVariableFilter filt_;
    ModelVector xf_;
};

}  // namespace ivdrem::regression
