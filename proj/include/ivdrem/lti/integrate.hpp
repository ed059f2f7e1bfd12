#pragma once

namespace ivdrem::lti {

/// One classical fourth-order Runge–Kutta step.
///
/// `deriv(x, c)` returns dx/dt at the stage located c·h into the step
/// (c ∈ {0, 1/2, 1}). Callers holding inputs constant ignore `c`; callers with
/// interpolated inputs use it to evaluate them at the stage time.
template <typename State, typename Deriv>
[[nodiscard]] State rk4_advance(const State& x, double h, Deriv&& deriv) {
    const State k1 = deriv(x, 0.0);
    const State k2 = deriv(State(x + (0.5 * h) * k1), 0.5);
    const State k3 = deriv(State(x + (0.5 * h) * k2), 0.5);
    const State k4 = deriv(State(x + h * k3), 1.0);
    return State(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace ivdrem::lti
