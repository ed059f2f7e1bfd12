#pragma once

#include "ivdrem/core/errors.hpp"

#include <cmath>

namespace ivdrem::regression {

namespace detail {

template <typename M>
double det_small(const M& a) {
    const auto n = a.rows();
    switch (n) {
        case 0: return 1.0;
        case 1: return a(0, 0);
        case 2: return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        case 3:
            return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                   a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                   a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        default: return RegMatrix(a).partialPivLu().determinant();
    }
}

}  // namespace detail

/// Determinant by LU with partial pivoting.
inline double determinant(const RegMatrix& m) {
    if (m.rows() == 0) return 1.0;
    return m.partialPivLu().determinant();
}

inline RegMatrix minor_of(const RegMatrix& m, int row, int col) {
    const int n = static_cast<int>(m.rows());
    RegMatrix out(n - 1, n - 1);
    for (int i = 0, oi = 0; i < n; ++i) {
        if (i == row) continue;
        for (int j = 0, oj = 0; j < n; ++j) {
            if (j == col) continue;
            out(oi, oj++) = m(i, j);
        }
        ++oi;
    }
    return out;
}

/// Adjugate (transposed cofactor matrix); adj(M)·M = det(M)·I for any square
/// M, singular included. Cofactor expansion up to 6×6; above that det·M⁻¹
/// with the identity verified.
inline RegMatrix adjugate(const RegMatrix& m, StepIndex step = kNoStep) {
    const int n = static_cast<int>(m.rows());
    if (m.cols() != n) throw ConfigError("adjugate of a non-square matrix");
    RegMatrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = 1.0;
        return adj;
    }
    if (n <= 6) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double c = detail::det_small(minor_of(m, i, j));
                adj(j, i) = ((i + j) % 2 == 0) ? c : -c;
            }
        return adj;
    }
    const auto lu = m.partialPivLu();
    const double det = lu.determinant();
    adj = det * lu.inverse();
    const double scale = std::max(1.0, std::pow(m.cwiseAbs().rowwise().sum().maxCoeff(), n - 1));
    const double resid = (adj * m - det * RegMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!(resid <= 1e-9 * scale)) throw NumericalError("adjugate identity check failed", step, "mix");
    return adj;
}

/// Scalar regressions 𝒴_i = Δ·θ_i + 𝒲_i obtained by multiplying Y = Φθ + W
/// with adj(Φ).
struct MixedRegression {
    RegVector Ycal;
    double Delta = 0.0;
    RegMatrix adj;
};

inline MixedRegression mix(const RegVector& Y, const RegMatrix& Phi, StepIndex step = kNoStep) {
    if (Phi.rows() != Phi.cols() || Phi.rows() != Y.size()) throw ConfigError("mix: dimension mismatch");
    if (!Phi.allFinite() || !Y.allFinite()) throw NumericalError("non-finite entries in (Y, Φ)", step, "mix");
    MixedRegression out;
    out.adj = adjugate(Phi, step);
    out.Delta = determinant(Phi);
    out.Ycal = out.adj * Y;
    return out;
}

/// ‖adj(Φ)Φ − det(Φ)I‖_∞ (max-row-sum norm).
inline double adjugate_residual(const RegMatrix& Phi, const MixedRegression& m) {
    const int n = static_cast<int>(Phi.rows());
    return (m.adj * Phi - m.Delta * RegMatrix::Identity(n, n)).cwiseAbs().rowwise().sum().maxCoeff();
}

inline double inf_norm(const RegMatrix& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace ivdrem::regression
