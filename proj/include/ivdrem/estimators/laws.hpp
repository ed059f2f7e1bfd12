#pragma once

#include "ivdrem/lti/integrate.hpp"
#include "ivdrem/regression/mixing.hpp"

#include <cmath>

namespace ivdrem::estimators {

using regression::MixedRegression;

/// Regressor data over one grid step, linearly interpolated for RK4 stages.
struct RegressorSegment {
    double z0 = 0.0, z1 = 0.0;
    RegVector phi0, phi1;
    RegVector zeta0, zeta1;

    static RegressorSegment constant(double z, const RegVector& phi, const RegVector& zeta) {
        return {z, z, phi, phi, zeta, zeta};
    }
    static RegressorSegment constant(double z, const RegVector& phi) { return constant(z, phi, phi); }

    [[nodiscard]] double z(double c) const { return z0 + c * (z1 - z0); }
    [[nodiscard]] RegVector phi(double c) const { return phi0 + c * (phi1 - phi0); }
    [[nodiscard]] RegVector zeta(double c) const { return zeta0 + c * (zeta1 - zeta0); }
};

/// (1 − e^{−x})/x, continuous at 0.
inline double phi1(double x) { return x < 1e-8 ? 1.0 - 0.5 * x : -std::expm1(-x) / x; }

// --- scalar gradient on mixed regressions --------------------------------------

struct GradientScalarState {
    RegVector theta_hat;
    double gamma = 1.0;
};

/// Exact update of θ̂̇_i = −γΔ(Δθ̂_i − 𝒴_i) for (Δ, 𝒴) frozen over the step:
/// θ̂_i ← θ̂_i − γhΔ(Δθ̂_i − 𝒴_i)·(1 − e^{−γΔ²h})/(γΔ²h). Components are
/// independent; Δ = 0 leaves θ̂ unchanged.
inline const RegVector& grad_scalar_step(GradientScalarState& st, double Delta, const RegVector& Ycal, double h,
                                         StepIndex step = kNoStep) {
    if (!std::isfinite(Delta) || !Ycal.allFinite())
        throw NumericalError("non-finite mixed regression", step, "grad_scalar_step");
    const double x = st.gamma * Delta * Delta * h;
    const double gain = st.gamma * h * Delta * phi1(x);
    for (int i = 0; i < st.theta_hat.size(); ++i)
        st.theta_hat(i) -= gain * (Delta * st.theta_hat(i) - Ycal(i));
    if (!st.theta_hat.allFinite()) throw NumericalError("non-finite estimate", step, "grad_scalar_step");
    return st.theta_hat;
}

inline const RegVector& grad_scalar_step(GradientScalarState& st, const MixedRegression& m, double h,
                                         StepIndex step = kNoStep) {
    return grad_scalar_step(st, m.Delta, m.Ycal, h, step);
}

/// Same law fed by (ϑ, ψ) mixed directly, skipping averaging.
inline const RegVector& swm_step(GradientScalarState& st, const RegVector& vartheta, const RegMatrix& psi, double h,
                                 StepIndex step = kNoStep) {
    return grad_scalar_step(st, regression::mix(vartheta, psi, step), h, step);
}

// --- least squares family ---------------------------------------------------------

struct LeastSquaresState {
    RegVector theta_hat;
    RegMatrix Gamma;
    RegMatrix Gamma0;
    bool wound_down = false;  // det Γ fell below 1e-300 at some step
};

namespace detail {

struct ThetaGamma {
    RegVector th;
    RegMatrix G;
    friend ThetaGamma operator+(const ThetaGamma& a, const ThetaGamma& b) { return {a.th + b.th, a.G + b.G}; }
    friend ThetaGamma operator*(double s, const ThetaGamma& a) { return {s * a.th, s * a.G}; }
};

template <bool Instrumental>
void least_squares_step(LeastSquaresState& st, const RegressorSegment& seg, double h, StepIndex step,
                        const char* module) {
    const ThetaGamma x0{st.theta_hat, st.Gamma};
    const auto deriv = [&](const ThetaGamma& x, double c) -> ThetaGamma {
        const RegVector phi = seg.phi(c);
        const double err = phi.dot(x.th) - seg.z(c);
        if constexpr (Instrumental) {
            const RegVector gz = x.G * seg.zeta(c);
            const RegVector gp = x.G.transpose() * phi;
            return {-gz * err, -gz * gp.transpose()};
        } else {
            const RegVector g = x.G * phi;
            return {-g * err, -g * g.transpose()};
        }
    };
    const ThetaGamma x1 = lti::rk4_advance(x0, h, deriv);
    if (!x1.th.allFinite() || !x1.G.allFinite()) throw NumericalError("non-finite Γ or θ̂", step, module);
    st.theta_hat = x1.th;
    st.Gamma = x1.G;
    if (std::abs(regression::determinant(st.Gamma)) < 1e-300) st.wound_down = true;
}

}  // namespace detail

inline LeastSquaresState make_least_squares(const RegVector& theta0, double gamma0) {
    const int m = static_cast<int>(theta0.size());
    const RegMatrix G0 = gamma0 * RegMatrix::Identity(m, m);
    return {theta0, G0, G0, false};
}

/// RK4 step of θ̂̇ = −Γφ(φᵀθ̂ − z), Γ̇ = −ΓφφᵀΓ.
inline void pls_step(LeastSquaresState& st, const RegressorSegment& seg, double h, StepIndex step = kNoStep) {
    detail::least_squares_step<false>(st, seg, h, step, "pls_step");
}

/// RK4 step of θ̂̇ = −Γζ(φᵀθ̂ − z), Γ̇ = −ΓζφᵀΓ.
inline void ivpls_step(LeastSquaresState& st, const RegressorSegment& seg, double h, StepIndex step = kNoStep) {
    detail::least_squares_step<true>(st, seg, h, step, "ivpls_step");
}

// --- vector gradient --------------------------------------------------------------

struct GradientVectorState {
    RegVector theta_hat;
    RegMatrix Gamma;  // constant, symmetric positive definite
};

/// RK4 step of θ̂̇ = −Γφ(φᵀθ̂ − z).
inline const RegVector& grad_vector_step(GradientVectorState& st, const RegressorSegment& seg, double h,
                                         StepIndex step = kNoStep) {
    st.theta_hat = lti::rk4_advance(st.theta_hat, h, [&](const RegVector& th, double c) -> RegVector {
        const RegVector phi = seg.phi(c);
        return -(st.Gamma * phi) * (phi.dot(th) - seg.z(c));
    });
    if (!st.theta_hat.allFinite()) throw NumericalError("non-finite estimate", step, "grad_vector_step");
    return st.theta_hat;
}

// --- classical DREM baseline -----------------------------------------------------

struct DremBaselineState {
    RegVector Y;
    RegMatrix Phi;
    GradientScalarState grad;
    double l = 0.1;
    MixedRegression last;  // mixing of (Y, Φ) at the current grid point

    static DremBaselineState make(const RegVector& theta0, double gamma, double l) {
        const int m = static_cast<int>(theta0.size());
        DremBaselineState s;
        s.Y = RegVector::Zero(m);
        s.Phi = RegMatrix::Zero(m, m);
        s.grad = {theta0, gamma};
        s.l = l;
        s.last = regression::mix(s.Y, s.Phi);
        return s;
    }
};

/// RK4 step of Ẏ = −lY + φz, Φ̇ = −lΦ + φφᵀ, then the scalar gradient law on
/// adj(Φ)Y, det Φ averaged over the step.
inline const RegVector& drem_baseline_step(DremBaselineState& st, const RegressorSegment& seg, double h,
                                           StepIndex step = kNoStep) {
    const detail::ThetaGamma x0{st.Y, st.Phi};
    const auto x1 = lti::rk4_advance(x0, h, [&](const detail::ThetaGamma& x, double c) -> detail::ThetaGamma {
        const RegVector phi = seg.phi(c);
        return {-st.l * x.th + phi * seg.z(c), -st.l * x.G + phi * phi.transpose()};
    });
    st.Y = x1.th;
    st.Phi = x1.G;
    const MixedRegression next = regression::mix(st.Y, st.Phi, step);
    const double Delta = 0.5 * (st.last.Delta + next.Delta);
    const RegVector Ycal = 0.5 * (st.last.Ycal + next.Ycal);
    grad_scalar_step(st.grad, Delta, Ycal, h, step);
    st.last = next;
    return st.grad.theta_hat;
}

}  // namespace ivdrem::estimators
