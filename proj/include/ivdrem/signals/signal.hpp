#pragma once

#include "ivdrem/core/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace ivdrem::signals {

enum class Wave { Sin, Cos };

struct Harmonic {
    double amplitude = 0.0;
    double frequency = 0.0;  // rad/s, strictly positive
    double phase = 0.0;      // rad
    Wave kind = Wave::Sin;
};

/// offset + Σ amplitude·{sin|cos}(frequency·t + phase).
class HarmonicSum {
public:
    HarmonicSum() = default;
    HarmonicSum(std::vector<Harmonic> terms, double offset = 0.0) : terms_(std::move(terms)), offset_(offset) {
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const auto& h = terms_[i];
            const std::string field = "terms[" + std::to_string(i) + "]";
            if (!std::isfinite(h.amplitude) || !std::isfinite(h.frequency) || !std::isfinite(h.phase))
                throw ConfigError("non-finite harmonic parameter", field);
            if (!(h.frequency > 0.0))
                throw ConfigError("harmonic frequency must be > 0; put constants in the offset", field);
        }
        if (!std::isfinite(offset_)) throw ConfigError("non-finite offset", "offset");
    }

    [[nodiscard]] const std::vector<Harmonic>& terms() const noexcept { return terms_; }
    [[nodiscard]] double offset() const noexcept { return offset_; }

    [[nodiscard]] double operator()(double t) const {
        double v = offset_;
        for (const auto& h : terms_) {
            const double arg = h.frequency * t + h.phase;
            v += h.amplitude * (h.kind == Wave::Sin ? std::sin(arg) : std::cos(arg));
        }
        return v;
    }

    /// Sum of |amplitude| over the oscillating terms.
    [[nodiscard]] double oscillation_amplitude() const {
        double a = 0.0;
        for (const auto& h : terms_) a += std::abs(h.amplitude);
        return a;
    }

    /// Distinct frequencies of terms with nonzero amplitude, ascending,
    /// merged within `tol` rad/s.
    [[nodiscard]] std::vector<double> frequencies(double tol = 1e-9) const {
        std::vector<double> f;
        for (const auto& h : terms_)
            if (h.amplitude != 0.0) f.push_back(h.frequency);
        std::sort(f.begin(), f.end());
        std::vector<double> out;
        for (double w : f)
            if (out.empty() || w - out.back() > tol) out.push_back(w);
        return out;
    }

private:
    std::vector<Harmonic> terms_;
    double offset_ = 0.0;
};

/// Uniformly sampled series read from a (t, value) CSV.
class SampledSeries {
public:
    SampledSeries() = default;
    SampledSeries(std::vector<double> t, std::vector<double> v) : t_(std::move(t)), v_(std::move(v)) {
        if (t_.size() != v_.size() || t_.size() < 2) throw ConfigError("sampled series needs at least two rows");
        for (std::size_t i = 1; i < t_.size(); ++i)
            if (!(t_[i] > t_[i - 1]))
                throw ConfigError("time column is not strictly increasing at sample " + std::to_string(i + 1));
    }

    [[nodiscard]] double t_first() const { return t_.front(); }
    [[nodiscard]] double t_last() const { return t_.back(); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return t_; }

    /// Checks that the series covers [t0, t_end] at spacing h.
    void check_grid(double t0, double t_end, double h) const {
        if (t_.front() > t0 + 1e-9 * h) throw ConfigError("series starts after t0");
        if (t_.back() < t_end - 1e-9 * h) throw ConfigError("series ends before the run horizon");
        for (std::size_t i = 1; i < t_.size(); ++i)
            if (std::abs((t_[i] - t_[i - 1]) - h) > 1e-6 * h)
                throw ConfigError("gap or irregular spacing at sample " + std::to_string(i + 1) + " (expected h = " +
                                  std::to_string(h) + ")");
    }

    /// Linear interpolation; on-grid queries return the stored sample.
    [[nodiscard]] double operator()(double t) const {
        if (t <= t_.front()) return v_.front();
        if (t >= t_.back()) return v_.back();
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
        const double w = (t - t_[i]) / (t_[i + 1] - t_[i]);
        if (w == 0.0) return v_[i];
        return v_[i] + w * (v_[i + 1] - v_[i]);
    }

private:
    std::vector<double> t_;
    std::vector<double> v_;
};

struct ZeroSignal {};

using SignalSpec = std::variant<ZeroSignal, HarmonicSum, SampledSeries>;

[[nodiscard]] inline double eval_signal(const SignalSpec& spec, double t) {
    return std::visit(
        [t](const auto& s) -> double {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, ZeroSignal>) return 0.0;
            else return s(t);
        },
        spec);
}

[[nodiscard]] inline bool is_zero_signal(const SignalSpec& spec) { return std::holds_alternative<ZeroSignal>(spec); }

struct SpectrumOverlap {
    bool disjoint = true;
    std::vector<double> shared;   // rad/s, ascending
    bool shared_offset = false;   // both carry a nonzero constant (reported, not counted)
};

/// Shared-frequency test between two harmonic sums (tolerance 1e-9 rad/s).
[[nodiscard]] inline SpectrumOverlap spectra_disjoint(const HarmonicSum& a, const HarmonicSum& b,
                                                      double tol = 1e-9) {
    SpectrumOverlap out;
    const auto fa = a.frequencies(tol);
    const auto fb = b.frequencies(tol);
    for (double wa : fa)
        for (double wb : fb)
            if (std::abs(wa - wb) <= tol) {
                out.shared.push_back(std::min(wa, wb));
                break;
            }
    out.disjoint = out.shared.empty();
    out.shared_offset = a.offset() != 0.0 && b.offset() != 0.0;
    return out;
}

/// Spectral-line count: two per distinct nonzero frequency plus one for a
/// nonzero constant.
[[nodiscard]] inline int richness_order(const HarmonicSum& a) {
    return 2 * static_cast<int>(a.frequencies().size()) + (a.offset() != 0.0 ? 1 : 0);
}

/// Reads a two-column CSV (header row required) into a series.
[[nodiscard]] inline SampledSeries load_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sampled signal file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty sampled signal file '" + path + "'");
    std::vector<double> t, v;
    std::size_t row = 1;
    auto parse = [&](std::string_view s, double& out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '"')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '"' || s.back() == '\r')) s.remove_suffix(1);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
            throw ConfigError("malformed number at row " + std::to_string(row) + " of '" + path + "'");
    };
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("expected two columns at row " + std::to_string(row));
        double tv = 0.0, vv = 0.0;
        parse(std::string_view(line).substr(0, comma), tv);
        parse(std::string_view(line).substr(comma + 1), vv);
        t.push_back(tv);
        v.push_back(vv);
    }
    return SampledSeries(std::move(t), std::move(v));
}

}  // namespace ivdrem::signals
