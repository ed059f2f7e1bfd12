#pragma once

#include "ivdrem/estimators/laws.hpp"
#include "ivdrem/regression/pipeline.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace ivdrem::estimators {

/// The six estimation laws.
enum class LawKind {
    IvDrem,    // scalar gradient on IV-extended, averaged, mixed regressions
    Pls,       // pure least squares
    IvPls,     // instrumental-variable pure least squares
    Gradient,  // vector gradient with constant gain
    Drem,      // classical DREM with first-order filters
    Swm,       // sliding-window mixing without averaging
};

inline constexpr std::array<std::pair<LawKind, std::string_view>, 6> kLawNames{{
    {LawKind::IvDrem, "iv_drem"},
    {LawKind::Pls, "pls"},
    {LawKind::IvPls, "iv_pls"},
    {LawKind::Gradient, "gradient"},
    {LawKind::Drem, "drem"},
    {LawKind::Swm, "swm"},
}};

inline std::string_view law_name(LawKind k) {
    for (const auto& [kind, name] : kLawNames)
        if (kind == k) return name;
    return "unknown";
}

inline std::optional<LawKind> parse_law(std::string_view name) {
    for (const auto& [kind, n] : kLawNames)
        if (n == name) return kind;
    return std::nullopt;
}

/// `gain` is γ for the scalar-gradient laws, Γ0 (times I) for the least
/// squares pair and the constant Γ (times I) for the vector gradient.
struct EstimatorConfig {
    LawKind kind = LawKind::IvDrem;
    double gain = 1.0;
    double forgetting = 0.1;  // l, DREM baseline only
    RegVector theta0;
};

/// One law with its state, stepped from grid point k−1 to k.
class Estimator {
public:
    explicit Estimator(const EstimatorConfig& cfg) : cfg_(cfg) {
        if (!(cfg.gain > 0.0) || !std::isfinite(cfg.gain))
            throw ConfigError("estimator gain must be positive", std::string(law_name(cfg.kind)));
        if (cfg.kind == LawKind::Drem && !(cfg.forgetting > 0.0))
            throw ConfigError("forgetting factor l must be positive", "drem");
        const int m = static_cast<int>(cfg.theta0.size());
        switch (cfg.kind) {
            case LawKind::IvDrem:
            case LawKind::Swm: state_ = GradientScalarState{cfg.theta0, cfg.gain}; break;
            case LawKind::Pls:
            case LawKind::IvPls: state_ = make_least_squares(cfg.theta0, cfg.gain); break;
            case LawKind::Gradient:
                state_ = GradientVectorState{cfg.theta0, cfg.gain * RegMatrix::Identity(m, m)};
                break;
            case LawKind::Drem: state_ = DremBaselineState::make(cfg.theta0, cfg.gain, cfg.forgetting); break;
        }
    }

    [[nodiscard]] LawKind kind() const noexcept { return cfg_.kind; }
    [[nodiscard]] std::string_view name() const noexcept { return law_name(cfg_.kind); }
    [[nodiscard]] const EstimatorConfig& config() const noexcept { return cfg_; }

    [[nodiscard]] const RegVector& theta_hat() const {
        return std::visit(
            [](const auto& s) -> const RegVector& {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, DremBaselineState>) return s.grad.theta_hat;
                else return s.theta_hat;
            },
            state_);
    }

    /// Γ for the least-squares laws.
    [[nodiscard]] const LeastSquaresState* least_squares() const { return std::get_if<LeastSquaresState>(&state_); }

    /// On NumericalError the state is rolled back to its value before the call.
    void step(const regression::PipelineSample& prev, const regression::PipelineSample& curr, double h) {
        const auto saved = state_;
        try {
            advance(prev, curr, h);
        } catch (const NumericalError&) {
            state_ = saved;
            throw;
        }
    }

private:
    void advance(const regression::PipelineSample& prev, const regression::PipelineSample& curr, double h) {
        const StepIndex k = curr.k;
        const RegressorSegment seg{prev.z, curr.z, prev.phi, curr.phi, prev.zeta, curr.zeta};
        switch (cfg_.kind) {
            case LawKind::IvDrem: {
                const double D = 0.5 * (prev.mixed.Delta + curr.mixed.Delta);
                const RegVector Y = 0.5 * (prev.mixed.Ycal + curr.mixed.Ycal);
                grad_scalar_step(std::get<GradientScalarState>(state_), D, Y, h, k);
                break;
            }
            case LawKind::Swm: {
                const double D = 0.5 * (prev.mixed_window.Delta + curr.mixed_window.Delta);
                const RegVector Y = 0.5 * (prev.mixed_window.Ycal + curr.mixed_window.Ycal);
                grad_scalar_step(std::get<GradientScalarState>(state_), D, Y, h, k);
                break;
            }
            case LawKind::Pls: pls_step(std::get<LeastSquaresState>(state_), seg, h, k); break;
            case LawKind::IvPls: ivpls_step(std::get<LeastSquaresState>(state_), seg, h, k); break;
            case LawKind::Gradient: grad_vector_step(std::get<GradientVectorState>(state_), seg, h, k); break;
            case LawKind::Drem: drem_baseline_step(std::get<DremBaselineState>(state_), seg, h, k); break;
        }
    }

    EstimatorConfig cfg_;
    std::variant<GradientScalarState, LeastSquaresState, GradientVectorState, DremBaselineState> state_;
};

}  // namespace ivdrem::estimators
