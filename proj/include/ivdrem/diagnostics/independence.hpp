#pragma once

#include "ivdrem/regression/extension.hpp"

#include <cmath>
#include <vector>

namespace ivdrem::diagnostics {

inline constexpr double kDivergenceSlope = 1e-3;

/// Least-squares line fit of y(t), accumulated online.
class SlopeFit {
public:
    void add(double t, double y) {
        ++n_;
        st_ += t;
        stt_ += t * t;
        sy_ += y;
        sty_ += t * y;
    }
    [[nodiscard]] long count() const noexcept { return n_; }
    [[nodiscard]] double slope() const {
        if (n_ < 2) return 0.0;
        const double n = static_cast<double>(n_);
        const double den = n * stt_ - st_ * st_;
        return den == 0.0 ? 0.0 : (n * sty_ - st_ * sy_) / den;
    }

private:
    long n_ = 0;
    double st_ = 0.0, stt_ = 0.0, sy_ = 0.0, sty_ = 0.0;
};

struct ChannelIndependence {
    double value = 0.0;  // I(t_end)
    double sup = 0.0;    // sup |I|
    double slope = 0.0;  // fitted growth rate of |I| over the final half
    bool divergent = false;
};

struct IndependenceReport {
    std::vector<ChannelIndependence> zeta;  // ∫ζ_i w
    std::vector<ChannelIndependence> phi;   // ∫φ_i w
    [[nodiscard]] bool all_zeta_bounded() const {
        for (const auto& c : zeta)
            if (c.divergent) return false;
        return true;
    }
    [[nodiscard]] bool any_phi_divergent() const {
        for (const auto& c : phi)
            if (c.divergent) return true;
        return false;
    }
    [[nodiscard]] bool any_zeta_divergent() const { return !all_zeta_bounded(); }
};

/// Running trapezoid integrals I_i(t) = ∫_{t0}^{t} ζ_i w ds and ∫ φ_i w ds of
/// the ground-truth perturbation. |I| is fitted by a line over the second
/// half of [t0, t_end].
class IndependenceMonitor {
public:
    IndependenceMonitor(int dim, double h, double t0, double t_end)
        : h_(h), t_half_(t0 + 0.5 * (t_end - t0)), zeta_(static_cast<std::size_t>(dim)),
          phi_(static_cast<std::size_t>(dim)) {}

    void update(double t, const RegVector& zeta, const RegVector& phi, double w, bool logged = true) {
        advance(zeta_, zeta, w, t, logged);
        advance(phi_, phi, w, t, logged);
        started_ = true;
    }

    [[nodiscard]] IndependenceReport report(double threshold = kDivergenceSlope) const {
        IndependenceReport r;
        r.zeta = summarize(zeta_, threshold);
        r.phi = summarize(phi_, threshold);
        return r;
    }

private:
    struct Channel {
        double I = 0.0, prev = 0.0, sup = 0.0;
        SlopeFit fit;
    };

    void advance(std::vector<Channel>& ch, const RegVector& x, double w, double t, bool logged) {
        for (std::size_t i = 0; i < ch.size(); ++i) {
            auto& c = ch[i];
            const double g = x(static_cast<Eigen::Index>(i)) * w;
            if (started_) c.I += 0.5 * h_ * (g + c.prev);
            c.prev = g;
            c.sup = std::max(c.sup, std::abs(c.I));
            if (logged && t >= t_half_) c.fit.add(t, std::abs(c.I));
        }
    }

    static std::vector<ChannelIndependence> summarize(const std::vector<Channel>& ch, double threshold) {
        std::vector<ChannelIndependence> out;
        for (const auto& c : ch) {
            ChannelIndependence r{c.I, c.sup, c.fit.slope(), false};
            r.divergent = r.slope > threshold;
            out.push_back(r);
        }
        return out;
    }

    double h_;
    double t_half_;
    std::vector<Channel> zeta_, phi_;
    bool started_ = false;
};

template <typename Log>
IndependenceReport independence_report(const Log& log, double h, double t0, double t_end) {
    if (log.empty()) return {};
    IndependenceMonitor m(static_cast<int>(log.front().zeta.size()), h, t0, t_end);
    for (const auto& s : log) m.update(s.t, s.zeta, s.phi, s.w);
    return m.report();
}

/// Windowed integral ∫_{max(t0, t−T)}^{t} ζ_i w ds for each channel; returns
/// per channel whether it stayed within `tol` of zero at every t ≥ t0 + T.
class AnnihilationMonitor {
public:
    AnnihilationMonitor(int dim, double window, double h, double t0 = 0.0, double tol = 1e-9)
        : t_full_(t0 + window), h_(h), tol_(tol), integral_(static_cast<std::size_t>(dim), window, h),
          buf_(static_cast<std::size_t>(dim)), ok_(static_cast<std::size_t>(dim), true),
          max_abs_(static_cast<std::size_t>(dim), 0.0) {}

    void update(double t, const RegVector& zeta, double w) {
        for (std::size_t i = 0; i < buf_.size(); ++i) buf_[i] = zeta(static_cast<Eigen::Index>(i)) * w;
        const auto& v = integral_.update(buf_);
        if (t < t_full_ - 0.5 * h_) return;
        for (std::size_t i = 0; i < v.size(); ++i) {
            max_abs_[i] = std::max(max_abs_[i], std::abs(v[i]));
            if (std::abs(v[i]) > tol_) ok_[i] = false;
        }
    }

    [[nodiscard]] const std::vector<bool>& passed() const noexcept { return ok_; }
    [[nodiscard]] const std::vector<double>& max_abs() const noexcept { return max_abs_; }
    [[nodiscard]] bool all_passed() const {
        for (bool b : ok_)
            if (!b) return false;
        return true;
    }

private:
    double t_full_, h_, tol_;
    regression::WindowIntegral integral_;
    std::vector<double> buf_;
    std::vector<bool> ok_;
    std::vector<double> max_abs_;
};

template <typename Log>
std::vector<bool> annihilation_check(const Log& log, double window, double h, double t0 = 0.0, double tol = 1e-9) {
    if (log.empty()) return {};
    AnnihilationMonitor m(static_cast<int>(log.front().zeta.size()), window, h, t0, tol);
    for (const auto& s : log) m.update(s.t, s.zeta, s.w);
    return m.passed();
}

}  // namespace ivdrem::diagnostics
