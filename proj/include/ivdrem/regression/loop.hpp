#pragma once

#include "ivdrem/regression/svf.hpp"

#include <optional>
#include <string>

namespace ivdrem::regression {

using lti::TransferFunction;

/// Two-degree-of-freedom linear controller u = (P_y/Q_y) y + (P_r/Q_r) r.
struct Controller {
    TransferFunction feedback;   // P_y/Q_y
    TransferFunction reference;  // P_r/Q_r
};

/// Characteristic polynomial Q_y·R − P_y·Z of plant Z/R under feedback P_y/Q_y.
inline Polynomial closed_loop_polynomial(const TransferFunction& plant, const TransferFunction& feedback) {
    return feedback.den() * plant.den() - feedback.num() * plant.num();
}

/// A plant (optionally in closed loop with a Controller) whose output y and
/// input u are filtered by state-variable filters integrated in the same RK4
/// step as the plant. Exogenous signals (u in open loop, r in closed loop,
/// and the disturbance f) are held over each step; y and the closed-loop u
/// are internal, so (z, φ) satisfy the LRE up to integration error only.
class FilteredLoop {
public:
    struct Sample {
        double y = 0.0;
        double u = 0.0;
        double z = 0.0;
        RegVector phi;
        RegVector f_filtered;  // λ_{n-1}/Λ f, empty unless disturbance tracking is on
    };

    FilteredLoop(const TransferFunction& plant, const Polynomial& lambda, std::optional<Controller> controller,
                 bool track_disturbance)
        : svf_(lambda), controller_(std::move(controller)), track_f_(track_disturbance) {
        plant_ = lti::realize(plant);
        n_plant_ = plant_.order();
        if (controller_) {
            cy_ = lti::realize(controller_->feedback);
            cr_ = lti::realize(controller_->reference);
        }
        n_cy_ = controller_ ? cy_.order() : 0;
        n_cr_ = controller_ ? cr_.order() : 0;
        const int n = svf_.order();
        off_cy_ = n_plant_;
        off_cr_ = off_cy_ + n_cy_;
        off_sy_ = off_cr_ + n_cr_;
        off_su_ = off_sy_ + n;
        off_sf_ = off_su_ + n;
        const int total = off_sf_ + (track_f_ ? n : 0);
        if (total > kMaxLoopStates) throw ConfigError("loop has too many states");
        x_.setZero(total);
        check_well_posed();
    }

    [[nodiscard]] int order() const noexcept { return svf_.order(); }
    [[nodiscard]] bool closed_loop() const noexcept { return controller_.has_value(); }
    [[nodiscard]] const LoopState& state() const noexcept { return x_; }

    /// Swaps plant coefficients keeping the internal state (same order only).
    void set_plant(const TransferFunction& plant) {
        auto next = lti::realize(plant);
        if (next.order() != n_plant_) throw ConfigError("plant order must stay constant across the schedule");
        plant_.A = next.A;
        plant_.B = next.B;
        plant_.C = next.C;
        plant_.D = next.D;
        check_well_posed();
    }

    /// Signals at the current state for held inputs `command` (u or r) and `f`.
    [[nodiscard]] Sample sample(double command, double f) const {
        double y = 0.0, u = 0.0;
        solve_io(x_, command, f, y, u);
        const int n = svf_.order();
        Sample s;
        s.y = y;
        s.u = u;
        s.z = svf_.top_output(x_.segment(off_sy_, n), y);
        s.phi = stack_regressor(svf_.lambda_outputs(x_.segment(off_sy_, n)),
                                svf_.lambda_outputs(x_.segment(off_su_, n)));
        if (track_f_) s.f_filtered = svf_.lambda_outputs(x_.segment(off_sf_, n));
        return s;
    }

    void advance(double command, double f, double h, StepIndex step = kNoStep) {
        x_ = lti::rk4_advance(x_, h, [&](const LoopState& x, double) { return derivative(x, command, f); });
        if (!x_.allFinite()) throw NumericalError("non-finite loop state", step, "filtered_loop");
    }

private:
    void check_well_posed() const {
        if (controller_ && plant_.D(0) * cy_.D(0) == 1.0)
            throw ConfigError("algebraic loop is ill-posed (D_plant·D_feedback = 1)", "controller");
    }

    void solve_io(const LoopState& x, double command, double f, double& y, double& u) const {
        const double yp = (plant_.C.row(0) * x.segment(0, n_plant_))(0);
        const double dp = plant_.D(0);
        if (!controller_) {
            u = command;
            y = yp + dp * (u + f);
            return;
        }
        const double uc = (n_cy_ ? (cy_.C.row(0) * x.segment(off_cy_, n_cy_))(0) : 0.0) +
                          (n_cr_ ? (cr_.C.row(0) * x.segment(off_cr_, n_cr_))(0) : 0.0) + cr_.D(0) * command;
        const double dy = cy_.D(0);
        y = (yp + dp * (uc + f)) / (1.0 - dp * dy);
        u = uc + dy * y;
    }

    [[nodiscard]] LoopState derivative(const LoopState& x, double command, double f) const {
        double y = 0.0, u = 0.0;
        solve_io(x, command, f, y, u);
        LoopState dx(x.size());
        dx.segment(0, n_plant_) = plant_.A * x.segment(0, n_plant_) + plant_.B * (u + f);
        if (n_cy_) dx.segment(off_cy_, n_cy_) = cy_.A * x.segment(off_cy_, n_cy_) + cy_.B * y;
        if (n_cr_) dx.segment(off_cr_, n_cr_) = cr_.A * x.segment(off_cr_, n_cr_) + cr_.B * command;
        const int n = svf_.order();
        dx.segment(off_sy_, n) = svf_.A() * x.segment(off_sy_, n) + svf_.B() * y;
        dx.segment(off_su_, n) = svf_.A() * x.segment(off_su_, n) + svf_.B() * u;
        if (track_f_) dx.segment(off_sf_, n) = svf_.A() * x.segment(off_sf_, n) + svf_.B() * f;
        return dx;
    }

    StateVariableFilter svf_;
    std::optional<Controller> controller_;
    bool track_f_;
    lti::StateSpaceModel plant_, cy_, cr_;
    int n_plant_ = 0, n_cy_ = 0, n_cr_ = 0;
    int off_cy_ = 0, off_cr_ = 0, off_sy_ = 0, off_su_ = 0, off_sf_ = 0;
    LoopState x_;
};

/// θ = [a_{n-1} … a_0, b_{n-1} … b_0] of Z/R with R made monic, Z padded to
/// degree n-1.
inline RegVector plant_parameters(const TransferFunction& plant) {
    const Polynomial R = plant.den().monic();
    const Polynomial Z = plant.num().scaled(1.0 / plant.den().leading());
    const int n = R.degree();
    if (Z.degree() >= n && !Z.is_zero())
        throw ConfigError("plant must be strictly proper (deg Z ≤ n − 1)", "plant");
    RegVector theta(2 * n);
    for (int i = 0; i < n; ++i) {
        theta(i) = R.coeff_of_power(n - 1 - i);
        theta(n + i) = Z.coeff_of_power(n - 1 - i);
    }
    return theta;
}

/// [b_{n-1} … b_0], the numerator block of θ.
inline RegVector numerator_block(const RegVector& theta) {
    const int n = static_cast<int>(theta.size()) / 2;
    return theta.tail(n);
}

}  // namespace ivdrem::regression
