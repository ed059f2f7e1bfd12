#pragma once

#include "ivdrem/core/types.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace ivdrem::diagnostics {

inline double max_abs_error(const RegVector& theta_hat, const RegVector& theta) {
    return (theta_hat - theta).cwiseAbs().maxCoeff();
}

struct ErrorSummary {
    double final_max_abs = 0.0;
    double final_norm = 0.0;
    std::optional<double> convergence_time;  // none if the tolerance is not met at the end
    std::vector<std::pair<double, double>> probes;  // (t, max_i |θ̃_i|) at requested times
};

/// Per-law error trajectory. Convergence time is the first logged t after
/// which max_i|θ̃_i(t)| ≤ rel_tol·max_i|θ_i(t)| holds on every later sample.
class ErrorTracker {
public:
    explicit ErrorTracker(double rel_tol = 0.1, std::vector<double> probe_times = {})
        : rel_tol_(rel_tol), probe_times_(std::move(probe_times)) {}

    void update(double t, double h, const RegVector& theta_hat, const RegVector& theta) {
        const double e = max_abs_error(theta_hat, theta);
        last_max_ = e;
        last_norm_ = (theta_hat - theta).norm();
        if (e <= rel_tol_ * theta.cwiseAbs().maxCoeff()) {
            if (!inside_) since_ = t;
            inside_ = true;
        } else {
            inside_ = false;
        }
        for (double tp : probe_times_)
            if (std::abs(t - tp) <= 0.5 * h) probes_.emplace_back(tp, e);
    }

    [[nodiscard]] ErrorSummary summary() const {
        ErrorSummary s;
        s.final_max_abs = last_max_;
        s.final_norm = last_norm_;
        if (inside_) s.convergence_time = since_;
        s.probes = probes_;
        return s;
    }

private:
    double rel_tol_;
    std::vector<double> probe_times_;
    double last_max_ = 0.0, last_norm_ = 0.0;
    bool inside_ = false;
    double since_ = 0.0;
    std::vector<std::pair<double, double>> probes_;
};

/// Error metrics over a log of (t, θ̂, θ) samples.
template <typename Log>
ErrorSummary error_metrics(const Log& log, double h, double rel_tol = 0.1, std::vector<double> probes = {}) {
    ErrorTracker tr(rel_tol, std::move(probes));
    for (const auto& s : log) tr.update(s.t, h, s.theta_hat, s.theta);
    return tr.summary();
}

}  // namespace ivdrem::diagnostics
