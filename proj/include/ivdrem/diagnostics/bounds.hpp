#pragma once

#include "ivdrem/core/types.hpp"

#include <cmath>
#include <vector>

namespace ivdrem::diagnostics {

struct BoundReport {
    double c_w_hat = 0.0;                // sup ‖𝒲‖·F/Ḟ over steps with Ḟ > 0
    std::vector<double> l1_of_W;         // ∫|𝒲_i| ds
    std::vector<double> l1_of_W2;        // ∫𝒲_i² ds
    double l2_of_delta = 0.0;            // ∫Δ² ds
    double l2_of_delta_at_quarter = 0.0; // ∫Δ² at t0 + 3/4·(t_end − t0)
    bool delta_not_l2 = false;           // ∫Δ² grew ≥ 10% over the final quarter
};

/// Perturbation bound and integrability accumulators, all trapezoidal.
class BoundMonitor {
public:
    BoundMonitor(int dim, double h, double t0, double t_end)
        : h_(h), t_quarter_(t0 + 0.75 * (t_end - t0)), l1_(static_cast<std::size_t>(dim), 0.0),
          l2_(static_cast<std::size_t>(dim), 0.0), prev_abs_(static_cast<std::size_t>(dim), 0.0),
          prev_sq_(static_cast<std::size_t>(dim), 0.0) {}

    void update(double t, const RegVector& Wcal, double F, double Fdot, double Delta) {
        if (Fdot > 0.0) c_w_ = std::max(c_w_, Wcal.norm() * F / Fdot);
        const double d2 = Delta * Delta;
        for (std::size_t i = 0; i < l1_.size(); ++i) {
            const double a = std::abs(Wcal(static_cast<Eigen::Index>(i)));
            if (started_) {
                l1_[i] += 0.5 * h_ * (a + prev_abs_[i]);
                l2_[i] += 0.5 * h_ * (a * a + prev_sq_[i]);
            }
            prev_abs_[i] = a;
            prev_sq_[i] = a * a;
        }
        if (started_) delta2_ += 0.5 * h_ * (d2 + prev_d2_);
        prev_d2_ = d2;
        if (!quarter_seen_ && t >= t_quarter_ - 0.5 * h_) {
            delta2_quarter_ = delta2_;
            quarter_seen_ = true;
        }
        started_ = true;
    }

    /// Running c_𝒲 estimate so far.
    [[nodiscard]] double c_w() const noexcept { return c_w_; }

    [[nodiscard]] BoundReport report() const {
        BoundReport r;
        r.c_w_hat = c_w_;
        r.l1_of_W = l1_;
        r.l1_of_W2 = l2_;
        r.l2_of_delta = delta2_;
        r.l2_of_delta_at_quarter = delta2_quarter_;
        r.delta_not_l2 = quarter_seen_ && delta2_ >= 1.1 * delta2_quarter_ && delta2_ > 0.0;
        return r;
    }

private:
    double h_, t_quarter_;
    double c_w_ = 0.0;
    std::vector<double> l1_, l2_, prev_abs_, prev_sq_;
    double delta2_ = 0.0, prev_d2_ = 0.0, delta2_quarter_ = 0.0;
    bool quarter_seen_ = false, started_ = false;
};

template <typename Log>
BoundReport bound_report(const Log& log, double h, double t0, double t_end) {
    if (log.empty()) return {};
    BoundMonitor m(static_cast<int>(log.front().Wcal.size()), h, t0, t_end);
    for (const auto& s : log) m.update(s.t, s.Wcal, s.F, s.Fdot, s.Delta);
    return m.report();
}

}  // namespace ivdrem::diagnostics
