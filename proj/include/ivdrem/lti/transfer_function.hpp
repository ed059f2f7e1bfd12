#pragma once

#include "ivdrem/lti/polynomial.hpp"

#include <complex>
#include <string>

namespace ivdrem::lti {

enum class Stability { Any, Required };

/// Proper SISO transfer function num(s)/den(s).
class TransferFunction {
public:
    TransferFunction() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}

    TransferFunction(Polynomial num, Polynomial den, Stability stability = Stability::Any)
        : num_(std::move(num)), den_(std::move(den)) {
        if (den_.is_zero()) throw ConfigError("transfer function denominator is zero");
        if (num_.degree() > den_.degree() && !num_.is_zero()) {
            throw ConfigError("improper transfer function: deg(num) = " + std::to_string(num_.degree()) +
                              " > deg(den) = " + std::to_string(den_.degree()));
        }
        if (stability == Stability::Required && !is_hurwitz(den_)) {
            throw ConfigError("denominator " + den_.to_string() + " is not Hurwitz");
        }
    }

    [[nodiscard]] const Polynomial& num() const noexcept { return num_; }
    [[nodiscard]] const Polynomial& den() const noexcept { return den_; }
    [[nodiscard]] int order() const noexcept { return den_.degree(); }
    [[nodiscard]] bool biproper() const noexcept { return !num_.is_zero() && num_.degree() == den_.degree(); }

    [[nodiscard]] std::complex<double> operator()(std::complex<double> s) const { return num_(s) / den_(s); }

private:
    Polynomial num_;
    Polynomial den_;
};

}  // namespace ivdrem::lti
