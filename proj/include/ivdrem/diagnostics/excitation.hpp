#pragma once

#include "ivdrem/regression/extension.hpp"
#include "ivdrem/regression/mixing.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace ivdrem::diagnostics {

struct ExcitationReport {
    bool active = false;        // false: run shorter than t0 + T
    std::string status;         // "ok", "not excited" or "insufficient horizon"
    double alpha_hat = 0.0;     // min |det ∫_{t−T}^{t} ζφᵀ| over logged t ≥ t0 + T
    double delta_lb = 0.0;      // min |Δ| over logged t ≥ t0 + T
    double delta_ub = 0.0;      // max |Δ| over all logged t
    double t_delta = 0.0;       // from here on |Δ| ≥ Δ_LB on every logged step
    bool sign_constant = true;  // Δ kept one sign over logged t ≥ t0 + T
};

/// Windowed Gram integral of ζφᵀ plus running statistics of |Δ|.
class ExcitationMonitor {
public:
    ExcitationMonitor(int dim, double window, double h, double t0 = 0.0)
        : dim_(dim), t0_(t0), window_(window), h_(h),
          integral_(static_cast<std::size_t>(dim * dim), window, h),
          buf_(static_cast<std::size_t>(dim * dim)) {}

    /// Feeds one grid sample. Pass Δ = NaN when no mixed regressor is tracked.
    /// `logged` selects the steps the statistics are taken over.
    void update(double t, const RegVector& zeta, const RegVector& phi, double Delta = std::nan(""),
                bool logged = true) {
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) buf_[static_cast<std::size_t>(i * dim_ + j)] = zeta(i) * phi(j);
        const auto& v = integral_.update(buf_);
        if (!logged) return;

        const bool full = t >= t0_ + window_ - 0.5 * h_;
        if (!std::isnan(Delta)) {
            const double a = std::abs(Delta);
            delta_ub_ = std::max(delta_ub_, a);
            if (full) {
                delta_lb_ = std::min(delta_lb_, a);
                if (sign_ == 0 && Delta != 0.0) sign_ = Delta > 0.0 ? 1 : -1;
                if (Delta == 0.0 || Delta * sign_ < 0.0) sign_constant_ = false;
                delta_hist_.push_back({t, a});
            }
        }
        if (full) {
            RegMatrix G(dim_, dim_);
            for (int i = 0; i < dim_; ++i)
                for (int j = 0; j < dim_; ++j) G(i, j) = v[static_cast<std::size_t>(i * dim_ + j)];
            alpha_ = std::min(alpha_, std::abs(regression::determinant(G)));
            any_full_ = true;
        }
    }

    [[nodiscard]] ExcitationReport report() const {
        ExcitationReport r;
        r.active = any_full_;
        if (!any_full_) {
            r.status = "insufficient horizon";
            return r;
        }
        r.alpha_hat = alpha_;
        r.status = alpha_ > 0.0 ? "ok" : "not excited";
        r.delta_ub = delta_ub_;
        r.sign_constant = sign_constant_;
        if (!delta_hist_.empty()) {
            r.delta_lb = delta_lb_;
            r.t_delta = settle_time(delta_lb_);
        }
        return r;
    }

    /// T_Δ for a user-chosen lower bound: first logged t ≥ t0 + T after which
    /// |Δ| ≥ bound holds on every logged step; NaN if it never settles.
    [[nodiscard]] double settle_time(double bound) const {
        double t_settle = std::nan("");
        for (auto it = delta_hist_.rbegin(); it != delta_hist_.rend(); ++it) {
            if (it->second < bound) break;
            t_settle = it->first;
        }
        return t_settle;
    }

private:
    int dim_;
    double t0_, window_, h_;
    regression::WindowIntegral integral_;
    std::vector<double> buf_;
    double alpha_ = std::numeric_limits<double>::infinity();
    double delta_lb_ = std::numeric_limits<double>::infinity();
    double delta_ub_ = 0.0;
    int sign_ = 0;
    bool sign_constant_ = true;
    bool any_full_ = false;
    std::vector<std::pair<double, double>> delta_hist_;
};

/// One-shot report over a log of (t, ζ, φ, Δ) samples on a uniform grid.
template <typename Log>
ExcitationReport excitation_report(const Log& log, double window, double h, double t0 = 0.0) {
    if (log.empty()) return ExcitationMonitor(1, window, h, t0).report();
    ExcitationMonitor m(static_cast<int>(log.front().zeta.size()), window, h, t0);
    for (const auto& s : log) m.update(s.t, s.zeta, s.phi, s.Delta);
    return m.report();
}

}  // namespace ivdrem::diagnostics
