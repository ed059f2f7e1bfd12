#include <catch_amalgamated.hpp>

#include "ivdrem/estimators/estimator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace ivdrem;
using namespace ivdrem::estimators;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

RegVector vec(std::initializer_list<double> v) {
    RegVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

RegVector scalar(double x) { return vec({x}); }

regression::PipelineSample regressor_sample(StepIndex k, double z, const RegVector& phi, const RegVector& zeta) {
    regression::PipelineSample s;
    s.k = k;
    s.z = z;
    s.phi = phi;
    s.zeta = zeta;
    return s;
}

regression::PipelineConfig short_config() {
    using lti::Polynomial;
    using lti::TransferFunction;
    regression::PipelineConfig c;
    c.h = 1e-3;
    c.lambda = Polynomial{1, 20, 100};
    c.plant = regression::PlantSchedule({{0.0, TransferFunction(Polynomial{-2, -1}, Polynomial{1, 1, 2})}});
    c.iv = {regression::IvMode::Open, TransferFunction(Polynomial{20, 100}, Polynomial{1, 20, 100})};
    c.window = 1.0;
    c.p = 2.0;
    c.F0 = 0.01;
    return c;
}

std::vector<regression::PipelineSample> short_run(double t_end) {
    regression::RegressionPipeline pipe(short_config());
    std::vector<regression::PipelineSample> out;
    const auto n = static_cast<int>(std::lround(t_end / 1e-3));
    for (int k = 0; k <= n; ++k) {
        const double t = k * 1e-3;
        out.push_back(pipe.sample({std::sin(2 * pi * t) + std::cos(3 * t), std::sin(4 * t) + 1.0}));
    }
    return out;
}

}  // namespace

TEST_CASE("scalar gradient exponential update", "[estimators]") {
    GradientScalarState st{scalar(1.0), 1.0};
    grad_scalar_step(st, 1.0, scalar(0.0), 0.1);
    CHECK_THAT(st.theta_hat(0), WithinAbs(std::exp(-0.1), 1e-9));
    CHECK_THAT(st.theta_hat(0), WithinAbs(0.904837, 1e-6));

    GradientScalarState frozen{vec({0.3, -7.0}), 1e26};
    grad_scalar_step(frozen, 0.0, vec({5.0, 5.0}), 1e-4);
    CHECK(frozen.theta_hat(0) == 0.3);
    CHECK(frozen.theta_hat(1) == -7.0);
}

TEST_CASE("scalar gradient matches the frozen-coefficient ODE solution", "[estimators]") {
    for (double gamma : {1.0, 1e6, 1e26})
        for (double Delta : {1e-15, 1e-12, 1e-3, -2.0})
            for (double h : {1e-4, 0.1}) {
                const double Y = 0.7 * Delta, th0 = -1.5;
                GradientScalarState st{scalar(th0), gamma};
                grad_scalar_step(st, Delta, scalar(Y), h);
                const double star = Y / Delta;
                const double ref = star + (th0 - star) * std::exp(-gamma * Delta * Delta * h);
                INFO("gamma " << gamma << " Delta " << Delta << " h " << h);
                CHECK_THAT(st.theta_hat(0), WithinAbs(ref, 1e-12));
            }
}

TEST_CASE("scalar gradient contracts monotonically without overshoot", "[estimators]") {
    const RegVector theta = vec({1.0, 2.0, -2.0, -1.0});
    for (double gamma : {1.0, 1e3, 1e26}) {
        GradientScalarState st{RegVector::Zero(4), gamma};
        RegVector last = (st.theta_hat - theta).cwiseAbs();
        for (int k = 0; k < 2000; ++k) {
            const double Delta = 1e-3 * (1.0 + std::sin(0.01 * k));
            grad_scalar_step(st, Delta, Delta * theta, 1e-2);
            const RegVector err = (st.theta_hat - theta).cwiseAbs();
            CHECK((err.array() <= last.array()).all());
            CHECK(((st.theta_hat - theta).array() * theta.array() <= 0.0).all());
            last = err;
        }
    }
    GradientScalarState one{scalar(0.0), 1e30};
    grad_scalar_step(one, 1.0, scalar(3.0), 1.0);
    CHECK_THAT(one.theta_hat(0), WithinAbs(3.0, 1e-15));
}

TEST_CASE("scalar gradient flags non-finite inputs", "[estimators]") {
    GradientScalarState st{scalar(1.0), 1.0};
    CHECK_THROWS_AS(grad_scalar_step(st, std::nan(""), scalar(0.0), 0.1, 3), NumericalError);
    CHECK_THROWS_AS(grad_scalar_step(st, 1.0, scalar(std::numeric_limits<double>::infinity()), 0.1, 3),
                    NumericalError);
}

TEST_CASE("P-LS scalar Riccati solution", "[estimators]") {
    auto st = make_least_squares(scalar(0.0), 1.0);
    const auto seg = RegressorSegment::constant(1.0, scalar(1.0));
    const double h = 1e-3;
    for (int k = 0; k < 1000; ++k) pls_step(st, seg, h);
    CHECK_THAT(st.Gamma(0, 0), WithinAbs(0.5, 1e-6));
    CHECK_THAT(st.theta_hat(0), WithinAbs(0.5, 1e-6));
    // t/(1+t) along the way
    auto st2 = make_least_squares(scalar(0.0), 1.0);
    for (int k = 1; k <= 3000; ++k) {
        pls_step(st2, seg, h);
        const double t = k * h;
        CHECK_THAT(st2.theta_hat(0), WithinAbs(t / (1 + t), 1e-9));
        CHECK_THAT(st2.Gamma(0, 0), WithinAbs(1 / (1 + t), 1e-9));
    }
}

TEST_CASE("least squares freeze on a zero regressor", "[estimators]") {
    auto st = make_least_squares(vec({1.0, -1.0}), 10.0);
    const auto seg = RegressorSegment::constant(0.0, RegVector::Zero(2));
    for (int k = 0; k < 10; ++k) {
        pls_step(st, seg, 0.1);
        ivpls_step(st, seg, 0.1);
    }
    CHECK((st.theta_hat.array() == vec({1.0, -1.0}).array()).all());
    CHECK((st.Gamma.array() == (10.0 * RegMatrix::Identity(2, 2)).array()).all());
}

TEST_CASE("P-LS error relation and symmetry", "[estimators]") {
    // Γ⁻¹θ̃ = Γ0⁻¹θ̃0 + ∫φw and Γ⁻¹ = Γ0⁻¹ + ∫φφᵀ, checked against a trapezoid
    // quadrature of the same samples.
    const RegVector theta = vec({0.5, -1.0});
    const double h = 1e-3, g0 = 5.0;
    auto st = make_least_squares(RegVector::Zero(2), g0);
    auto phi_at = [](double t) { return vec({std::sin(t), std::cos(2 * t) + 0.5}); };
    auto w_at = [](double t) { return 0.2 * std::sin(5 * t); };
    RegMatrix info = RegMatrix::Identity(2, 2) / g0;
    RegVector rhs = (RegVector::Zero(2) - theta) / g0;
    double worst_sym = 0.0;
    for (int k = 0; k < 5000; ++k) {
        const double t0 = k * h, t1 = (k + 1) * h;
        const RegVector p0 = phi_at(t0), p1 = phi_at(t1);
        RegressorSegment seg{p0.dot(theta) + w_at(t0), p1.dot(theta) + w_at(t1), p0, p1, p0, p1};
        pls_step(st, seg, h);
        info += 0.5 * h * (p0 * p0.transpose() + p1 * p1.transpose());
        rhs += 0.5 * h * (p0 * w_at(t0) + p1 * w_at(t1));
        worst_sym = std::max(worst_sym, (st.Gamma - st.Gamma.transpose()).cwiseAbs().maxCoeff() /
                                            st.Gamma.cwiseAbs().maxCoeff());
    }
    const RegVector err = st.theta_hat - theta;
    const RegMatrix Ginv = RegMatrix(st.Gamma.inverse());
    CHECK((Ginv - info).cwiseAbs().maxCoeff() <= 1e-5 * info.cwiseAbs().maxCoeff());
    CHECK((info * err - rhs).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK(worst_sym <= 1e-9);
    CHECK(st.Gamma.llt().info() == Eigen::Success);
}

TEST_CASE("IV P-LS reduces to P-LS when the instrument is the regressor", "[estimators]") {
    auto a = make_least_squares(RegVector::Zero(2), 3.0);
    auto b = a;
    const double h = 1e-2;
    for (int k = 0; k < 500; ++k) {
        const double t0 = k * h, t1 = t0 + h;
        const RegVector p0 = vec({std::sin(t0), 1.0}), p1 = vec({std::sin(t1), 1.0});
        RegressorSegment seg{std::cos(t0), std::cos(t1), p0, p1, p0, p1};
        pls_step(a, seg, h);
        ivpls_step(b, seg, h);
    }
    CHECK((a.theta_hat - b.theta_hat).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.Gamma - b.Gamma).cwiseAbs().maxCoeff() <= 1e-12);

    auto st = make_least_squares(scalar(0.0), 1.0);
    for (int k = 0; k < 1000; ++k) ivpls_step(st, RegressorSegment::constant(1.0, scalar(1.0), scalar(1.0)), 1e-3);
    CHECK_THAT(st.theta_hat(0), WithinAbs(0.5, 1e-6));
    CHECK_THAT(st.Gamma(0, 0), WithinAbs(0.5, 1e-6));
}

TEST_CASE("vector gradient closed form", "[estimators]") {
    GradientVectorState st{scalar(0.0), RegMatrix::Identity(1, 1)};
    const auto seg = RegressorSegment::constant(1.0, scalar(1.0));
    for (int k = 1; k <= 2000; ++k) {
        grad_vector_step(st, seg, 1e-3);
        CHECK_THAT(st.theta_hat(0), WithinAbs(1.0 - std::exp(-k * 1e-3), 1e-12));
    }
    GradientVectorState z{vec({2.0, 3.0}), 100.0 * RegMatrix::Identity(2, 2)};
    grad_vector_step(z, RegressorSegment::constant(1.0, RegVector::Zero(2)), 0.1);
    CHECK((z.theta_hat.array() == vec({2.0, 3.0}).array()).all());
}

TEST_CASE("DREM baseline filters", "[estimators]") {
    SECTION("homogeneous decay at rate l") {
        auto st = DremBaselineState::make(RegVector::Zero(2), 1.0, 0.5);
        st.Y = vec({1.0, -2.0});
        st.Phi = RegMatrix::Identity(2, 2);
        const double h = 1e-3;
        for (int k = 0; k < 2000; ++k) drem_baseline_step(st, RegressorSegment::constant(0.0, RegVector::Zero(2)), h);
        const double decay = std::exp(-0.5 * 2.0);
        CHECK(st.Y.isApprox(vec({1.0, -2.0}) * decay, 1e-10));
        CHECK(st.Phi.isApprox(RegMatrix::Identity(2, 2) * decay, 1e-10));
    }
    SECTION("constant regressor gives a rank-one filter and frozen estimates") {
        const RegVector c = vec({1.0, 2.0}), theta = vec({0.5, -0.25});
        auto st = DremBaselineState::make(RegVector::Zero(2), 1.0, 0.1);
        const auto seg = RegressorSegment::constant(c.dot(theta), c);
        for (int k = 0; k < 5000; ++k) drem_baseline_step(st, seg, 1e-2);
        const double scale = (1.0 - std::exp(-0.1 * 50.0)) / 0.1;
        CHECK(st.Phi.isApprox(c * c.transpose() * scale, 1e-9));
        CHECK(std::abs(regression::determinant(st.Phi)) <= 1e-12 * st.Phi.squaredNorm());
        CHECK(st.grad.theta_hat.cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("SWM on a synthetic identity window reduces to the scalar law", "[estimators]") {
    GradientScalarState a{vec({0.0, 1.0}), 2.0}, b = a;
    const RegVector vt = vec({0.4, -0.6});
    for (int k = 0; k < 100; ++k) {
        swm_step(a, vt, RegMatrix::Identity(2, 2), 0.01);
        grad_scalar_step(b, 1.0, vt, 0.01);
    }
    CHECK((a.theta_hat.array() == b.theta_hat.array()).all());
}

TEST_CASE("SWM converges on a noise-free rich regressor", "[estimators]") {
    const int N = 1000;
    const double T = 2 * pi, h = T / N;
    const RegVector theta = vec({1.5, -0.5});
    regression::ExtensionState ext(2, T, h);
    GradientScalarState st{RegVector::Zero(2), 1.0};
    for (int k = 0; k <= 6 * N; ++k) {
        const double t = k * h;
        const RegVector phi = vec({std::sin(t), std::cos(t)});
        ext.update(phi.dot(theta), phi, phi);
        swm_step(st, ext.vartheta(), ext.psi(), h);
    }
    CHECK((st.theta_hat - theta).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("law names round-trip", "[estimators]") {
    for (const auto& [kind, name] : kLawNames) {
        CHECK(law_name(kind) == name);
        CHECK(parse_law(name) == kind);
    }
    CHECK_FALSE(parse_law("rls").has_value());
}

TEST_CASE("estimator configuration checks", "[estimators]") {
    CHECK_THROWS_AS(Estimator({LawKind::IvDrem, 0.0, 0.1, RegVector::Zero(4)}), ConfigError);
    CHECK_THROWS_AS(Estimator({LawKind::Pls, -1.0, 0.1, RegVector::Zero(4)}), ConfigError);
    CHECK_THROWS_AS(Estimator({LawKind::Gradient, std::numeric_limits<double>::infinity(), 0.1, RegVector::Zero(4)}),
                    ConfigError);
    CHECK_THROWS_AS(Estimator({LawKind::Drem, 1.0, 0.0, RegVector::Zero(4)}), ConfigError);
    CHECK_NOTHROW(Estimator({LawKind::Drem, 1e20, 0.1, RegVector::Zero(4)}));
}

TEST_CASE("estimator rolls back on a numerical failure", "[estimators]") {
    Estimator est({LawKind::Pls, 1.0, 0.1, vec({0.25})});
    const auto s0 = regressor_sample(0, 1.0, scalar(1.0), scalar(1.0));
    const auto s1 = regressor_sample(1, 1.0, scalar(1.0), scalar(1.0));
    est.step(s0, s1, 0.1);
    const RegVector good = est.theta_hat();
    const RegMatrix G = est.least_squares()->Gamma;
    const auto bad = regressor_sample(2, std::nan(""), scalar(1.0), scalar(1.0));
    CHECK_THROWS_AS(est.step(s1, bad, 0.1), NumericalError);
    CHECK((est.theta_hat().array() == good.array()).all());
    CHECK((est.least_squares()->Gamma.array() == G.array()).all());
}

TEST_CASE("mixed-regression law decouples the components", "[estimators]") {
    const auto run = short_run(4.0);
    const RegVector base = vec({0.0, 0.0, 0.0, 0.0});
    for (int j = 0; j < 4; ++j) {
        RegVector pert = base;
        pert(j) = 3.0;
        Estimator a({LawKind::IvDrem, 1e30, 0.1, base}), b({LawKind::IvDrem, 1e30, 0.1, pert});
        bool others_identical = true;
        for (std::size_t k = 1; k < run.size(); ++k) {
            a.step(run[k - 1], run[k], 1e-3);
            b.step(run[k - 1], run[k], 1e-3);
            for (int i = 0; i < 4; ++i)
                if (i != j) others_identical = others_identical && a.theta_hat()(i) == b.theta_hat()(i);
        }
        INFO("perturbed component " << j);
        CHECK(others_identical);
        CHECK(b.theta_hat()(j) != 3.0);
    }
}

TEST_CASE("least squares keep a symmetric positive definite gain on the pipeline", "[estimators]") {
    const auto run = short_run(3.0);
    Estimator est({LawKind::Pls, 1e6, 0.1, RegVector::Zero(4)});
    double worst = 0.0;
    for (std::size_t k = 1; k < run.size(); ++k) {
        est.step(run[k - 1], run[k], 1e-3);
        const RegMatrix& G = est.least_squares()->Gamma;
        worst = std::max(worst, (G - G.transpose()).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-9);
    CHECK(est.least_squares()->Gamma.llt().info() == Eigen::Success);
}
