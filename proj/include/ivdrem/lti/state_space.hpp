#pragma once

#include "ivdrem/core/errors.hpp"
#include "ivdrem/lti/integrate.hpp"
#include "ivdrem/lti/transfer_function.hpp"

#include <complex>

namespace ivdrem::lti {

/// SISO-input linear model ẋ = Ax + Bu, y = Cx + Du with its own state.
/// Realizations produced here are in controllable canonical form:
/// x = [v, v', …, v^(n-1)] for v = u/den(s).
struct StateSpaceModel {
    ModelMatrix A;
    ModelVector B;
    ModelMatrix C;
    ModelVector D;
    ModelVector x;

    [[nodiscard]] int order() const noexcept { return static_cast<int>(A.rows()); }
    [[nodiscard]] int outputs() const noexcept { return static_cast<int>(C.rows()); }

    [[nodiscard]] ModelVector derivative(const ModelVector& state, double u) const { return A * state + B * u; }

    [[nodiscard]] ModelVector output_vector(double u) const { return C * x + D * u; }
    [[nodiscard]] double output(double u) const { return (C.row(0) * x)(0) + D(0) * u; }

    /// Frequency response of output row `row` at s.
    [[nodiscard]] std::complex<double> response(std::complex<double> s, int row = 0) const {
        using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxModelOrder,
                                   kMaxModelOrder>;
        const int n = order();
        if (n == 0) return {D(row), 0.0};
        CMat M = CMat::Identity(n, n) * s - A.cast<std::complex<double>>();
        const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1, 0, kMaxModelOrder, 1> b =
            B.cast<std::complex<double>>();
        const auto sol = M.partialPivLu().solve(b);
        return (C.row(row).cast<std::complex<double>>() * sol)(0) + D(row);
    }

    void reset() { x.setZero(order()); }
};

/// Companion-form state matrices (A, B) of 1/den(s) with den normalized monic.
inline void companion(const Polynomial& den, ModelMatrix& A, ModelVector& B) {
    const Polynomial d = den.monic();
    const int n = d.degree();
    if (n > kMaxModelOrder) throw ConfigError("model order " + std::to_string(n) + " exceeds supported maximum");
    A.setZero(n, n);
    for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) A(n - 1, j) = -d.coeff_of_power(j);
    B.setZero(n);
    if (n > 0) B(n - 1) = 1.0;
}

/// Controllable canonical realization of a proper transfer function.
inline StateSpaceModel realize(const TransferFunction& tf) {
    const Polynomial den = tf.den().monic();
    const double scale = 1.0 / tf.den().leading();
    const Polynomial num = tf.num().scaled(scale);
    const int n = den.degree();

    StateSpaceModel m;
    companion(den, m.A, m.B);
    m.C.setZero(1, n);
    m.D.setZero(1);
    const double lead = n == num.degree() ? num.leading() : 0.0;
    for (int j = 0; j < n; ++j) m.C(0, j) = num.coeff_of_power(j) - lead * den.coeff_of_power(j);
    m.D(0) = lead;
    m.x.setZero(n);
    return m;
}

/// Filter realizing [1, s, …, s^(n-1)]/den(s) on its input: the outputs are the
/// companion states themselves (C = I, D = 0).
inline StateSpaceModel state_filter(const Polynomial& den) {
    StateSpaceModel m;
    companion(den, m.A, m.B);
    const int n = static_cast<int>(m.A.rows());
    m.C = ModelMatrix::Identity(n, n);
    m.D.setZero(n);
    m.x.setZero(n);
    return m;
}

namespace detail {
inline void check_finite(const ModelVector& x, StepIndex step, const char* module) {
    if (!x.allFinite()) throw NumericalError("non-finite state", step, module);
}
}  // namespace detail

/// Advances one step with the input held constant and returns y = Cx + Du at
/// the new step (first output row).
inline double rk4_step(StateSpaceModel& model, double input, double h, StepIndex step = kNoStep) {
    model.x = rk4_advance(model.x, h, [&](const ModelVector& s, double) { return model.derivative(s, input); });
    detail::check_finite(model.x, step, "rk4_step");
    return model.output(input);
}

}  // namespace ivdrem::lti
