#pragma once

#include "ivdrem/diagnostics/bounds.hpp"
#include "ivdrem/diagnostics/error_metrics.hpp"
#include "ivdrem/diagnostics/excitation.hpp"
#include "ivdrem/diagnostics/independence.hpp"
#include "ivdrem/diagnostics/observer.hpp"
#include "ivdrem/experiment/config.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ivdrem::experiment {

/// Decimated trajectories on one time base. `rows[i][j]` is column j.
struct RunLog {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("no log column " + name);
    }
    [[nodiscard]] bool has(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }
    [[nodiscard]] std::vector<double> column(const std::string& name) const {
        const std::size_t j = index(name);
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(r[j]);
        return v;
    }
};

struct LawReport {
    std::string name;
    std::vector<double> final_theta_hat;
    diagnostics::ErrorSummary errors;
    std::optional<StepIndex> diverged_at;  // estimator hit a non-finite state and was frozen
    std::string divergence;
    bool wound_down = false;  // least squares only: det Γ underflowed
};

struct AbortRecord {
    StepIndex step = 0;
    double t = 0.0;
    std::string module;
    std::string message;
};

struct ComparisonReport {
    std::string name;
    StepIndex steps = 0;
    double h = 0.0;
    std::vector<LawReport> laws;
    std::optional<diagnostics::ExcitationReport> excitation;
    std::optional<diagnostics::IndependenceReport> independence;
    std::optional<diagnostics::BoundReport> bounds;
    struct Observer {
        bool ever_paused = false;
        int rebuilds = 0;
        double mean_abs_error_40_50 = 0.0;  // mean |f̂ − f| over [40, 50] (NaN if not covered)
    };
    std::optional<Observer> observer;
    double max_adjugate_ratio = 0.0;     // max over logged steps of ‖adjΦ·Φ − ΔI‖∞ / max(1, ‖Φ‖∞³)
    double max_lre_ratio = 0.0;          // max over logged steps before the first switch of residual / max(1, |Δ|)
    std::optional<AbortRecord> abort;
};

struct RunResult {
    RunLog log;
    ComparisonReport report;
    [[nodiscard]] bool aborted() const noexcept { return report.abort.has_value(); }
};

namespace detail {

inline std::string idx(const char* base, int i) { return std::string(base) + "_" + std::to_string(i); }

}  // namespace detail

/// Runs plant, pipeline, every enabled estimator and monitor on one fixed
/// grid. Estimator failures freeze that estimator; pipeline failures end the
/// run with a partial log and an abort record.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
    using detail::idx;
    validate(cfg);
    const auto pcfg = pipeline_config(cfg);
    const StepIndex N = cfg.steps();
    const StepIndex K = cfg.decimation();
    const int m = cfg.dim();
    const double h = cfg.h;

    regression::RegressionPipeline pipe(pcfg);
    std::vector<estimators::Estimator> laws;
    for (const auto& e : cfg.estimators) laws.emplace_back(e);
    std::vector<diagnostics::ErrorTracker> trackers(laws.size(),
                                                     diagnostics::ErrorTracker(cfg.convergence_tol, cfg.probes));
    std::vector<std::optional<StepIndex>> diverged(laws.size());
    std::vector<std::string> divergence(laws.size());

    std::optional<diagnostics::ExcitationMonitor> exc;
    if (cfg.monitors.excitation) exc.emplace(m, cfg.window, h, cfg.t0);
    std::optional<diagnostics::IndependenceMonitor> ind;
    if (cfg.monitors.independence) ind.emplace(m, h, cfg.t0, cfg.t_end);
    std::optional<diagnostics::BoundMonitor> bnd;
    if (cfg.monitors.bounds) bnd.emplace(m, h, cfg.t0, cfg.t_end);
    std::optional<diagnostics::ObserverState> obs;
    std::size_t obs_law = 0;
    if (cfg.monitors.observer) {
        obs.emplace(cfg.monitors.observer->filter, m / 2, cfg.t0);
        for (std::size_t i = 0; i < laws.size(); ++i)
            if (laws[i].kind() == cfg.monitors.observer->law) obs_law = i;
    }
    double obs_err_sum = 0.0;
    long obs_err_n = 0;
    const double t_switch = cfg.plant.size() > 1 ? cfg.plant[1].t_start : cfg.t_end + 1.0;

    RunResult res;
    auto& log = res.log;
    auto& rep = res.report;
    rep.name = cfg.name;
    rep.steps = N;
    rep.h = h;

    auto& cols = log.columns;
    cols = {"t", "y", "u", "f", "z"};
    for (int i = 0; i < m; ++i) cols.push_back(idx("phi", i));
    for (int i = 0; i < m; ++i) cols.push_back(idx("zeta", i));
    for (int i = 0; i < m; ++i) cols.push_back(idx("vartheta", i));
    cols.push_back("det_psi");
    for (int i = 0; i < m; ++i) cols.push_back(idx("Y", i));
    cols.push_back("Delta");
    for (int i = 0; i < m; ++i) cols.push_back(idx("Ycal", i));
    cols.insert(cols.end(), {"w", "W_norm", "adj_residual", "Phi_norm", "lre_residual"});
    for (int i = 0; i < m; ++i) cols.push_back(idx("theta", i));
    for (const auto& l : laws) {
        const std::string n(l.name());
        for (int i = 0; i < m; ++i) cols.push_back(idx(("theta_hat_" + n).c_str(), i));
        cols.push_back("err_" + n);
    }
    if (ind) {
        for (int i = 0; i < m; ++i) cols.push_back(idx("I_zeta", i));
        for (int i = 0; i < m; ++i) cols.push_back(idx("I_phi", i));
    }
    if (bnd) cols.push_back("c_w");
    if (obs) cols.push_back("f_hat");

    // Running integrals for the independence columns (the monitor only keeps
    // its summary statistics).
    std::vector<double> Iz(static_cast<std::size_t>(m), 0.0), Ip(static_cast<std::size_t>(m), 0.0);
    std::vector<double> pz(static_cast<std::size_t>(m), 0.0), pp(static_cast<std::size_t>(m), 0.0);

    regression::PipelineSample prev;
    for (StepIndex k = 0; k <= N; ++k) {
        const double t = cfg.t0 + static_cast<double>(k) * h;
        regression::PipelineSample s;
        try {
            s = pipe.sample({signals::eval_signal(cfg.command, t), signals::eval_signal(cfg.disturbance, t)});
        } catch (const NumericalError& e) {
            rep.abort = AbortRecord{e.step() < 0 ? k : e.step(), t, e.module(), e.what()};
            break;
        }
        if (k > 0) {
            for (std::size_t i = 0; i < laws.size(); ++i) {
                if (diverged[i]) continue;
                try {
                    laws[i].step(prev, s, h);
                } catch (const NumericalError& e) {
                    diverged[i] = k;
                    divergence[i] = e.what();
                }
            }
        }
        const bool logged = k % K == 0;
        for (std::size_t i = 0; i < laws.size(); ++i)
            if (logged) trackers[i].update(t, h, laws[i].theta_hat(), s.theta);
        if (exc) exc->update(t, s.zeta, s.phi, s.mixed.Delta, logged);
        if (ind) {
            ind->update(t, s.zeta, s.phi, s.w, logged);
            for (int i = 0; i < m; ++i) {
                const auto u = static_cast<std::size_t>(i);
                const double gz = s.zeta(i) * s.w, gp = s.phi(i) * s.w;
                if (k > 0) {
                    Iz[u] += 0.5 * h * (gz + pz[u]);
                    Ip[u] += 0.5 * h * (gp + pp[u]);
                }
                pz[u] = gz;
                pp[u] = gp;
            }
        }
        if (bnd) bnd->update(t, s.Wcal, s.F, s.Fdot, s.mixed.Delta);
        double f_hat = 0.0;
        if (obs) {
            f_hat = obs->step(t, s.y, s.u, laws[obs_law].theta_hat(), h, k);
            if (t >= 40.0 - 0.5 * h && t <= 50.0 + 0.5 * h && !obs->paused()) {
                obs_err_sum += std::abs(f_hat - s.f);
                ++obs_err_n;
            }
        }

        if (logged) {
            std::vector<double> row;
            row.reserve(cols.size());
            row.insert(row.end(), {t, s.y, s.u, s.f, s.z});
            for (int i = 0; i < m; ++i) row.push_back(s.phi(i));
            for (int i = 0; i < m; ++i) row.push_back(s.zeta(i));
            for (int i = 0; i < m; ++i) row.push_back(s.vartheta(i));
            row.push_back(s.mixed_window.Delta);
            for (int i = 0; i < m; ++i) row.push_back(s.Y(i));
            row.push_back(s.mixed.Delta);
            for (int i = 0; i < m; ++i) row.push_back(s.mixed.Ycal(i));
            const double adj_res = regression::adjugate_residual(s.Phi, s.mixed);
            const double phi_norm = regression::inf_norm(s.Phi);
            const double lre = (s.mixed.Ycal - s.mixed.Delta * s.theta - s.Wcal).cwiseAbs().maxCoeff();
            row.insert(row.end(), {s.w, s.Wcal.norm(), adj_res, phi_norm, lre});
            rep.max_adjugate_ratio =
                std::max(rep.max_adjugate_ratio, adj_res / std::max(1.0, phi_norm * phi_norm * phi_norm));
            if (t < t_switch - 0.5 * h)
                rep.max_lre_ratio = std::max(rep.max_lre_ratio, lre / std::max(1.0, std::abs(s.mixed.Delta)));
            for (int i = 0; i < m; ++i) row.push_back(s.theta(i));
            for (const auto& l : laws) {
                for (int i = 0; i < m; ++i) row.push_back(l.theta_hat()(i));
                row.push_back(diagnostics::max_abs_error(l.theta_hat(), s.theta));
            }
            if (ind) {
                row.insert(row.end(), Iz.begin(), Iz.end());
                row.insert(row.end(), Ip.begin(), Ip.end());
            }
            if (bnd) row.push_back(bnd->c_w());
            if (obs) row.push_back(f_hat);
            for (double v : row)
                if (!std::isfinite(v)) {
                    rep.abort = AbortRecord{k, t, "run_log", "non-finite value in log row"};
                    break;
                }
            if (rep.abort) break;
            log.rows.push_back(std::move(row));
        }
        prev = std::move(s);
    }

    for (std::size_t i = 0; i < laws.size(); ++i) {
        LawReport lr;
        lr.name = std::string(laws[i].name());
        for (int j = 0; j < m; ++j) lr.final_theta_hat.push_back(laws[i].theta_hat()(j));
        lr.errors = trackers[i].summary();
        lr.diverged_at = diverged[i];
        lr.divergence = divergence[i];
        if (const auto* ls = laws[i].least_squares()) lr.wound_down = ls->wound_down;
        rep.laws.push_back(std::move(lr));
    }
    if (exc) rep.excitation = exc->report();
    if (ind) rep.independence = ind->report();
    if (bnd) rep.bounds = bnd->report();
    if (obs)
        rep.observer = ComparisonReport::Observer{obs->ever_paused(), obs->rebuilds(),
                                                  obs_err_n ? obs_err_sum / static_cast<double>(obs_err_n)
                                                            : std::nan("")};
    return res;
}

}  // namespace ivdrem::experiment
