#pragma once

#include "ivdrem/core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace ivdrem::lti {

/// Real polynomial in s, coefficients stored highest degree first.
///
/// Leading zeros are stripped on construction, so `degree()` is always the
/// true degree. The zero polynomial is stored as a single 0 coefficient and
/// reports degree 0.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : Polynomial(std::vector<double>(coeffs)) {}
    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

    static Polynomial constant(double c) { return Polynomial({c}); }

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
    [[nodiscard]] double leading() const noexcept { return coeffs_.front(); }
    [[nodiscard]] bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }
    [[nodiscard]] bool is_monic() const noexcept { return leading() == 1.0; }
    [[nodiscard]] std::span<const double> coeffs() const noexcept { return coeffs_; }

    /// Coefficient of s^power (0 when power exceeds the degree).
    [[nodiscard]] double coeff_of_power(int power) const noexcept {
        if (power < 0 || power > degree()) return 0.0;
        return coeffs_[static_cast<std::size_t>(degree() - power)];
    }

    [[nodiscard]] Polynomial monic() const {
        if (is_zero()) throw ConfigError("cannot normalize the zero polynomial");
        std::vector<double> c(coeffs_);
        const double lead = c.front();
        for (auto& v : c) v /= lead;
        c.front() = 1.0;
        return Polynomial(std::move(c));
    }

    template <typename T>
    [[nodiscard]] T operator()(T s) const {
        T acc{0};
        for (double c : coeffs_) acc = acc * s + c;
        return acc;
    }

    [[nodiscard]] Polynomial scaled(double k) const {
        std::vector<double> c(coeffs_);
        for (auto& v : c) v *= k;
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        const int deg = std::max(a.degree(), b.degree());
        std::vector<double> c(static_cast<std::size_t>(deg + 1), 0.0);
        for (int p = 0; p <= deg; ++p)
            c[static_cast<std::size_t>(deg - p)] = a.coeff_of_power(p) + b.coeff_of_power(p);
        return Polynomial(std::move(c));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b.scaled(-1.0); }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return Polynomial(std::move(c));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        os.precision(17);
        os << '[';
        for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? ", " : "") << coeffs_[i];
        os << ']';
        return os.str();
    }

private:
    void normalize() {
        auto first = std::find_if(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; });
        coeffs_.erase(coeffs_.begin(), first);
        if (coeffs_.empty()) coeffs_.push_back(0.0);
    }

    std::vector<double> coeffs_;
};

inline Polynomial poly_mul(const Polynomial& a, const Polynomial& b) { return a * b; }

/// Routh–Hurwitz test: true iff every root lies in the open left half-plane.
/// A zero anywhere in the first column (marginal or unstable case) fails.
inline bool is_hurwitz(const Polynomial& p) {
    if (p.is_zero()) return false;
    const int n = p.degree();
    if (n == 0) return true;
    const double sign = p.leading() > 0 ? 1.0 : -1.0;

    std::vector<double> row0, row1;
    for (int i = 0; i <= n; i += 2) row0.push_back(sign * p.coeffs()[static_cast<std::size_t>(i)]);
    for (int i = 1; i <= n; i += 2) row1.push_back(sign * p.coeffs()[static_cast<std::size_t>(i)]);

    for (int r = 0; r < n; ++r) {
        if (!(row0.front() > 0.0)) return false;
        if (row1.empty() || !(row1.front() > 0.0)) return false;
        std::vector<double> next;
        for (std::size_t i = 0; i + 1 < row0.size(); ++i) {
            const double b = i + 1 < row1.size() ? row1[i + 1] : 0.0;
            next.push_back((row1.front() * row0[i + 1] - row0.front() * b) / row1.front());
        }
        row0 = std::move(row1);
        row1 = std::move(next);
        if (r == n - 1) break;
        if (row1.empty() && r < n - 1) return false;
    }
    return true;
}

}  // namespace ivdrem::lti
