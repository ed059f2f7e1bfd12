#pragma once

#include "ivdrem/lti/clock.hpp"
#include "ivdrem/regression/averaging.hpp"
#include "ivdrem/regression/extension.hpp"
#include "ivdrem/regression/instrument.hpp"
#include "ivdrem/regression/mixing.hpp"

#include <optional>
#include <vector>

namespace ivdrem::regression {

/// Piecewise-constant plant: entry i is active on [t_start_i, t_start_{i+1}).
struct PlantSegment {
    double t_start = 0.0;
    TransferFunction plant;
};

class PlantSchedule {
public:
    PlantSchedule() = default;
    explicit PlantSchedule(std::vector<PlantSegment> segments) : segments_(std::move(segments)) {
        if (segments_.empty()) throw ConfigError("plant schedule is empty", "plant");
        for (std::size_t i = 1; i < segments_.size(); ++i)
            if (!(segments_[i].t_start > segments_[i - 1].t_start))
                throw ConfigError("t_start must be strictly increasing", "plant[" + std::to_string(i) + "]");
        const int n = segments_.front().plant.order();
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            if (segments_[i].plant.order() != n)
                throw ConfigError("all plant segments must share one order", "plant[" + std::to_string(i) + "]");
            (void)plant_parameters(segments_[i].plant);
        }
    }

    [[nodiscard]] const std::vector<PlantSegment>& segments() const noexcept { return segments_; }
    [[nodiscard]] int order() const { return segments_.front().plant.order(); }

    /// Index of the segment active at t; grid times within h/2 of a switch
    /// count as past it.
    [[nodiscard]] std::size_t active(double t, double h) const {
        std::size_t idx = 0;
        for (std::size_t i = 1; i < segments_.size(); ++i)
            if (t >= segments_[i].t_start - 0.5 * h) idx = i;
        return idx;
    }

    [[nodiscard]] RegVector theta(double t, double h) const { return plant_parameters(segments_[active(t, h)].plant); }

private:
    std::vector<PlantSegment> segments_;
};

struct InstrumentSpec {
    IvMode mode = IvMode::Open;
    TransferFunction model;  // Z(θ_iv, s)/R(θ_iv, s)
};

struct PipelineConfig {
    double t0 = 0.0;
    double h = 1e-4;
    Polynomial lambda;
    PlantSchedule plant;
    std::optional<Controller> controller;  // present ⇒ the plant runs in closed loop
    InstrumentSpec iv;
    double window = 5.0;  // T
    double p = 10.0;
    double F0 = 0.01;
    bool truth = true;  // simulate ground-truth channels w, W, 𝒲
};

/// Exogenous samples at one grid point. `command` is u in open loop and r in
/// closed loop.
struct Exogenous {
    double command = 0.0;
    double f = 0.0;
};

/// Everything the pipeline knows at one grid point.
struct PipelineSample {
    StepIndex k = 0;
    double t = 0.0;
    double y = 0.0, u = 0.0, f = 0.0, command = 0.0;
    double z = 0.0;
    RegVector phi, zeta;
    RegVector vartheta;
    RegMatrix psi;
    RegVector Y;
    RegMatrix Phi;
    double F = 0.0, Fdot = 0.0;
    MixedRegression mixed;         // from (Y, Φ)
    MixedRegression mixed_window;  // from (ϑ, ψ), no averaging
    RegVector theta;               // true parameters active at t
    // Ground truth, present only when PipelineConfig::truth is set.
    double w = 0.0;
    RegVector W;     // Y − Φθ via its own filter chain
    RegVector Wcal;  // adj(Φ)·W
};

/// Plant loop + instrument + extension + averaging + mixing on one grid.
///
/// `sample(e)` reads the signals at the current grid point, pushes them
/// through the extension/averaging/mixing stages and then advances the
/// continuous-time states one step with `e` held.
class RegressionPipeline {
public:
    explicit RegressionPipeline(const PipelineConfig& cfg)
        : cfg_(cfg),
          clock_(cfg.t0, cfg.h),
          loop_(cfg.plant.segments().front().plant, cfg.lambda, cfg.controller, cfg.truth),
          iv_(make_iv(cfg)),
          ext_(2 * cfg.lambda.degree(), cfg.window, cfg.h),
          avg_(2 * cfg.lambda.degree(), AveragingWeight(cfg.t0, cfg.p, cfg.F0)),
          eps_(static_cast<std::size_t>(2 * cfg.lambda.degree()), cfg.window, cfg.h),
          W_(AveragingWeight(cfg.t0, cfg.p, cfg.F0), RegVector::Zero(2 * cfg.lambda.degree())),
          weight_(cfg.t0, cfg.p, cfg.F0),
          eps_buf_(static_cast<std::size_t>(2 * cfg.lambda.degree())) {
        if (cfg.plant.order() != cfg.lambda.degree())
            throw ConfigError("plant order " + std::to_string(cfg.plant.order()) + " must equal deg Λ = " +
                                  std::to_string(cfg.lambda.degree()),
                              "lambda");
        if (cfg.iv.model.order() < 1) throw ConfigError("instrumental model must be dynamic", "iv");
    }

    [[nodiscard]] int dim() const noexcept { return 2 * cfg_.lambda.degree(); }
    [[nodiscard]] const lti::SimClock& clock() const noexcept { return clock_; }
    [[nodiscard]] const PipelineConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const AveragingWeight& weight() const noexcept { return weight_; }

    PipelineSample sample(const Exogenous& e) {
        const StepIndex k = clock_.k();
        const double t = clock_.t();
        const std::size_t seg = cfg_.plant.active(t, cfg_.h);
        if (seg != active_) {
            loop_.set_plant(cfg_.plant.segments()[seg].plant);
            active_ = seg;
        }

        PipelineSample s;
        s.k = k;
        s.t = t;
        s.f = e.f;
        s.command = e.command;
        s.theta = plant_parameters(cfg_.plant.segments()[seg].plant);

        const auto ms = loop_.sample(e.command, e.f);
        s.y = ms.y;
        s.u = ms.u;
        s.z = ms.z;
        s.phi = ms.phi;
        const double drive = iv_.mode() == IvMode::Open ? ms.u : e.command;
        s.zeta = iv_.zeta(drive);

        ext_.update(s.z, s.phi, s.zeta);
        s.vartheta = ext_.vartheta();
        s.psi = ext_.psi();
        avg_.update(t, s.vartheta, s.psi);
        s.Y = avg_.Y();
        s.Phi = avg_.Phi();
        s.F = avg_.F();
        s.Fdot = weight_.Fdot(t);
        s.mixed = mix(s.Y, s.Phi, k);
        s.mixed_window = mix(s.vartheta, s.psi, k);

        if (cfg_.truth) {
            s.w = numerator_block(s.theta).dot(ms.f_filtered);
            for (int i = 0; i < dim(); ++i) eps_buf_[static_cast<std::size_t>(i)] = s.zeta(i) * s.w;
            const auto& eps = eps_.update(eps_buf_);
            RegVector ev(dim());
            for (int i = 0; i < dim(); ++i) ev(i) = eps[static_cast<std::size_t>(i)];
            s.W = W_.update(t, ev);
            s.Wcal = s.mixed.adj * s.W;
        }

        loop_.advance(e.command, e.f, cfg_.h, k);
        iv_.advance(drive, cfg_.h, k);
        clock_.tick();
        return s;
    }

private:
    static IvModel make_iv(const PipelineConfig& cfg) {
        if (cfg.iv.mode == IvMode::Open) {
            if (cfg.controller) throw ConfigError("closed-loop plant needs the closed-loop instrument", "iv.mode");
            return IvModel::open(cfg.iv.model, cfg.lambda);
        }
        if (!cfg.controller) throw ConfigError("closed-loop instrument requires a controller", "iv.mode");
        return IvModel::closed(cfg.iv.model, *cfg.controller, cfg.lambda);
    }

    PipelineConfig cfg_;
    lti::SimClock clock_;
    FilteredLoop loop_;
    IvModel iv_;
    ExtensionState ext_;
    AveragingState avg_;
    WindowIntegral eps_;
    AveragingFilter<RegVector> W_;
    AveragingWeight weight_;
    std::vector<double> eps_buf_;
    std::size_t active_ = 0;
};

}  // namespace ivdrem::regression
