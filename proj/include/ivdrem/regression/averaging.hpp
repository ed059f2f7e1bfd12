#pragma once

#include "ivdrem/core/errors.hpp"

#include <cmath>
#include <string>

namespace ivdrem::regression {

/// Averaging weight F(t) = F0 + t^p − t0^p, Ḟ(t) = p·t^(p−1).
class AveragingWeight {
public:
    AveragingWeight(double t0, double p, double F0) : t0_(t0), p_(p), F0_(F0) {
        if (!(t0 >= 0.0)) throw ConfigError("averaging requires t0 ≥ 0", "grid.t0");
        if (!(p >= 1.0)) throw ConfigError("p ≥ 1 required, got " + std::to_string(p), "pipeline.p");
        if (!(F0 > std::pow(t0, p)))
            throw ConfigError("F0 > t0^p required, got F0 = " + std::to_string(F0), "pipeline.F0");
        t0p_ = std::pow(t0, p);
    }

    [[nodiscard]] double p() const noexcept { return p_; }
    [[nodiscard]] double F0() const noexcept { return F0_; }
    [[nodiscard]] double F(double t) const { return F0_ + std::pow(t, p_) - t0p_; }
    /// F(b) − F(a) without cancellation against F0.
    [[nodiscard]] double increment(double a, double b) const { return std::pow(b, p_) - std::pow(a, p_); }
    [[nodiscard]] double Fdot(double t) const { return p_ == 1.0 ? 1.0 : p_ * std::pow(t, p_ - 1.0); }

private:
    double t0_, p_, F0_, t0p_ = 0.0;
};

/// Filter Ẋ = −(Ḟ/F)(X − input) with X(t0) = 0, stepped as
/// X ← (F(t_k)·X + (F(t_{k+1}) − F(t_k))·ū)/F(t_{k+1}), ū the mean input over
/// the step. This is exact for a piecewise-constant input, keeps F·X equal to
/// the quadrature of Ḟ·input, and stays relatively accurate while X ≪ input.
template <typename Value>
class AveragingFilter {
public:
    AveragingFilter(const AveragingWeight& weight, Value zero) : weight_(weight), value_(zero), prev_input_(zero) {}

    [[nodiscard]] const Value& value() const noexcept { return value_; }
    [[nodiscard]] double F() const noexcept { return F_; }

    const Value& update(double t, const Value& input) {
        if (!started_) {
            started_ = true;
            F_ = weight_.F0();
            value_.setZero();
        } else {
            const double dF = weight_.increment(t_, t);
            const double F_next = F_ + dF;
            value_ = (F_ * value_ + (0.5 * dF) * (prev_input_ + input)) / F_next;
            F_ = F_next;
        }
        t_ = t;
        prev_input_ = input;
        return value_;
    }

private:
    AveragingWeight weight_;
    Value value_;
    Value prev_input_;
    double F_ = 0.0;
    double t_ = 0.0;
    bool started_ = false;
};

}  // namespace ivdrem::regression

#include "ivdrem/core/types.hpp"

namespace ivdrem::regression {

/// (Y, Φ, F) of the averaging stage.
class AveragingState {
public:
    AveragingState(int dim, const AveragingWeight& weight)
        : weight_(weight), Y_(weight, RegVector::Zero(dim)), Phi_(weight, RegMatrix::Zero(dim, dim)) {}

    [[nodiscard]] const AveragingWeight& weight() const noexcept { return weight_; }
    [[nodiscard]] const RegVector& Y() const noexcept { return Y_.value(); }
    [[nodiscard]] const RegMatrix& Phi() const noexcept { return Phi_.value(); }
    [[nodiscard]] double F() const noexcept { return Y_.F(); }

    void update(double t, const RegVector& vartheta, const RegMatrix& psi) {
        Y_.update(t, vartheta);
        Phi_.update(t, psi);
    }

private:
    AveragingWeight weight_;
    AveragingFilter<RegVector> Y_;
    AveragingFilter<RegMatrix> Phi_;
};

struct AveragingOutput {
    RegVector Y;
    RegMatrix Phi;
    double F = 0.0;
};

/// Consumes (ϑ, ψ) at grid time t and returns (Y, Φ, F) there.
inline AveragingOutput averaging_step(AveragingState& avg, double t, const RegVector& vartheta, const RegMatrix& psi) {
    avg.update(t, vartheta, psi);
    return {avg.Y(), avg.Phi(), avg.F()};
}

}  // namespace ivdrem::regression
