#pragma once

#include "ivdrem/diagnostics/observer.hpp"
#include "ivdrem/estimators/estimator.hpp"
#include "ivdrem/regression/pipeline.hpp"
#include "ivdrem/signals/signal.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace ivdrem::experiment {

using json = nlohmann::ordered_json;
using estimators::EstimatorConfig;
using estimators::LawKind;
using lti::Polynomial;
using lti::TransferFunction;
using regression::Controller;
using regression::IvMode;

struct PlantEntry {
    double t_start = 0.0;
    Polynomial num;
    Polynomial den;
};

struct ObserverSpec {
    diagnostics::ObserverConfig filter;
    LawKind law = LawKind::IvDrem;  // whose θ̂ drives the observer
};

struct MonitorToggles {
    bool excitation = true;
    bool independence = true;
    bool bounds = true;
    std::optional<ObserverSpec> observer;
};

struct ExperimentConfig {
    std::string name = "experiment";
    double t0 = 0.0, t_end = 100.0, h = 1e-4;
    std::vector<PlantEntry> plant;
    signals::SignalSpec command;  // u in open loop, r in closed loop
    signals::SignalSpec disturbance;
    std::optional<Controller> controller;
    Polynomial lambda;
    IvMode iv_mode = IvMode::Open;
    Polynomial iv_num, iv_den;
    double window = 5.0, p = 10.0, F0 = 0.01;
    std::vector<EstimatorConfig> estimators;
    MonitorToggles monitors;
    StepIndex decimate = 0;      // 0 → log every 10 ms of simulated time
    std::vector<double> probes;  // times at which errors are reported
    double convergence_tol = 0.1;  // relative to max_i|θ_i|

    [[nodiscard]] StepIndex steps() const { return lti::SimClock::steps_in(t_end - t0, h, "grid.t_end"); }
    [[nodiscard]] StepIndex decimation() const {
        if (decimate > 0) return decimate;
        return std::max<StepIndex>(1, static_cast<StepIndex>(std::llround(0.01 / h)));
    }
    [[nodiscard]] int dim() const { return 2 * lambda.degree(); }
};

namespace detail {

template <typename Fn>
auto at_field(const std::string& path, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(e.message(), e.field().empty() ? path : path + "." + e.field());
    } catch (const json::exception& e) {
        throw ConfigError(e.what(), path);
    }
}

inline const json& require(const json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError("missing required field", path + "." + key);
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError("expected a number", path);
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("expected a finite number", path);
    return v;
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    return number(j.at(key), path + "." + key);
}

inline Polynomial polynomial(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError("polynomial must be a non-empty coefficient array", path);
    std::vector<double> c;
    for (std::size_t i = 0; i < j.size(); ++i) c.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return Polynomial(c);
}

inline json to_json(const Polynomial& p) {
    json a = json::array();
    for (double c : p.coeffs()) a.push_back(c);
    return a;
}

inline signals::SignalSpec signal(const json& j, const std::string& path, const std::filesystem::path& base) {
    const std::string type = require(j, "type", path).get<std::string>();
    if (type == "zero") return signals::ZeroSignal{};
    if (type == "harmonic") {
        std::vector<signals::Harmonic> terms;
        if (j.contains("terms")) {
            const auto& arr = j.at("terms");
            if (!arr.is_array()) throw ConfigError("expected an array", path + ".terms");
            for (std::size_t i = 0; i < arr.size(); ++i) {
                const std::string tp = path + ".terms[" + std::to_string(i) + "]";
                signals::Harmonic hm;
                hm.amplitude = number(require(arr[i], "amplitude", tp), tp + ".amplitude");
                hm.frequency = number(require(arr[i], "frequency", tp), tp + ".frequency");
                hm.phase = number_or(arr[i], "phase", 0.0, tp);
                const std::string wave = arr[i].value("wave", std::string("sin"));
                if (wave != "sin" && wave != "cos") throw ConfigError("wave must be \"sin\" or \"cos\"", tp + ".wave");
                hm.kind = wave == "sin" ? signals::Wave::Sin : signals::Wave::Cos;
                terms.push_back(hm);
            }
        }
        const double offset = number_or(j, "offset", 0.0, path);
        return at_field(path, [&] { return signals::SignalSpec(signals::HarmonicSum(terms, offset)); });
    }
    if (type == "sampled") {
        const std::string file = require(j, "file", path).get<std::string>();
        std::filesystem::path p(file);
        if (p.is_relative()) p = base / p;
        return at_field(path + ".file", [&] { return signals::SignalSpec(signals::load_series_csv(p.string())); });
    }
    throw ConfigError("unknown signal type \"" + type + "\" (zero | harmonic | sampled)", path + ".type");
}

inline json to_json(const signals::SignalSpec& s) {
    if (std::holds_alternative<signals::ZeroSignal>(s)) return {{"type", "zero"}};
    if (const auto* hs = std::get_if<signals::HarmonicSum>(&s)) {
        json terms = json::array();
        for (const auto& t : hs->terms())
            terms.push_back({{"amplitude", t.amplitude},
                             {"frequency", t.frequency},
                             {"phase", t.phase},
                             {"wave", t.kind == signals::Wave::Sin ? "sin" : "cos"}});
        return {{"type", "harmonic"}, {"offset", hs->offset()}, {"terms", terms}};
    }
    return {{"type", "sampled"}, {"file", "<in-memory>"}};
}

inline TransferFunction tf_field(const json& j, const std::string& path) {
    const Polynomial num = polynomial(require(j, "num", path), path + ".num");
    const Polynomial den = polynomial(require(j, "den", path), path + ".den");
    return at_field(path, [&] { return TransferFunction(num, den); });
}

}  // namespace detail

/// Parses a config document; semantic checks are done by validate().
inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base = {}) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("config must be a JSON object", "$");
    ExperimentConfig c;
    c.name = j.value("name", std::string("experiment"));

    const json& grid = require(j, "grid", "$");
    c.t0 = number_or(grid, "t0", 0.0, "grid");
    c.t_end = number(require(grid, "t_end", "grid"), "grid.t_end");
    c.h = number(require(grid, "h", "grid"), "grid.h");

    const json& plant = require(j, "plant", "$");
    if (!plant.is_array() || plant.empty()) throw ConfigError("plant schedule must be a non-empty array", "plant");
    for (std::size_t i = 0; i < plant.size(); ++i) {
        const std::string p = "plant[" + std::to_string(i) + "]";
        PlantEntry e;
        e.t_start = number(require(plant[i], "t_start", p), p + ".t_start");
        e.num = polynomial(require(plant[i], "num", p), p + ".num");
        e.den = polynomial(require(plant[i], "den", p), p + ".den");
        c.plant.push_back(e);
    }

    const json& sig = require(j, "signals", "$");
    if (j.contains("controller")) {
        const json& ctl = j.at("controller");
        c.controller = Controller{tf_field(require(ctl, "feedback", "controller"), "controller.feedback"),
                                  tf_field(require(ctl, "reference", "controller"), "controller.reference")};
        c.command = signal(require(sig, "r", "signals"), "signals.r", base);
    } else {
        c.command = signal(require(sig, "u", "signals"), "signals.u", base);
    }
    c.disturbance = sig.contains("f") ? signal(sig.at("f"), "signals.f", base) : signals::ZeroSignal{};

    c.lambda = polynomial(require(j, "lambda", "$"), "lambda");

    const json& iv = require(j, "instrument", "$");
    const std::string mode = iv.value("mode", std::string("open"));
    if (mode != "open" && mode != "closed") throw ConfigError("mode must be \"open\" or \"closed\"", "instrument.mode");
    c.iv_mode = mode == "open" ? IvMode::Open : IvMode::Closed;
    c.iv_num = polynomial(require(iv, "num", "instrument"), "instrument.num");
    c.iv_den = polynomial(require(iv, "den", "instrument"), "instrument.den");

    if (j.contains("pipeline")) {
        const json& pl = j.at("pipeline");
        c.window = number_or(pl, "window", c.window, "pipeline");
        c.p = number_or(pl, "p", c.p, "pipeline");
        c.F0 = number_or(pl, "F0", c.F0, "pipeline");
    }

    const json& est = require(j, "estimators", "$");
    if (!est.is_array()) throw ConfigError("expected an array", "estimators");
    const int m = 2 * c.lambda.degree();
    for (std::size_t i = 0; i < est.size(); ++i) {
        const std::string p = "estimators[" + std::to_string(i) + "]";
        const std::string tag = require(est[i], "law", p).get<std::string>();
        const auto kind = estimators::parse_law(tag);
        if (!kind) throw ConfigError("unknown estimator tag \"" + tag + "\"", p + ".law");
        EstimatorConfig e;
        e.kind = *kind;
        e.gain = number(require(est[i], "gain", p), p + ".gain");
        e.forgetting = number_or(est[i], "forgetting", 0.1, p);
        if (est[i].contains("theta0")) {
            const auto& th = est[i].at("theta0");
            if (!th.is_array()) throw ConfigError("expected an array", p + ".theta0");
            e.theta0.resize(static_cast<Eigen::Index>(th.size()));
            for (std::size_t k = 0; k < th.size(); ++k)
                e.theta0(static_cast<Eigen::Index>(k)) = number(th[k], p + ".theta0[" + std::to_string(k) + "]");
        } else {
            e.theta0 = RegVector::Zero(m);
        }
        c.estimators.push_back(e);
    }

    if (j.contains("monitors")) {
        const json& mo = j.at("monitors");
        c.monitors.excitation = mo.value("excitation", true);
        c.monitors.independence = mo.value("independence", true);
        c.monitors.bounds = mo.value("bounds", true);
        if (mo.contains("observer") && !mo.at("observer").is_null()) {
            const json& ob = mo.at("observer");
            ObserverSpec spec;
            if (ob.contains("P")) spec.filter.P = polynomial(ob.at("P"), "monitors.observer.P");
            if (ob.contains("Q")) spec.filter.Q = polynomial(ob.at("Q"), "monitors.observer.Q");
            spec.filter.rebuild_period = number_or(ob, "rebuild_period", 1.0, "monitors.observer");
            const std::string tag = ob.value("law", std::string("iv_drem"));
            const auto kind = estimators::parse_law(tag);
            if (!kind) throw ConfigError("unknown estimator tag \"" + tag + "\"", "monitors.observer.law");
            spec.law = *kind;
            c.monitors.observer = spec;
        }
    }

    if (j.contains("output")) {
        const json& out = j.at("output");
        if (out.contains("decimate")) {
            const double d = number(out.at("decimate"), "output.decimate");
            if (d < 1 || d != std::floor(d)) throw ConfigError("decimation must be a positive integer", "output.decimate");
            c.decimate = static_cast<StepIndex>(d);
        }
    }
    if (j.contains("probes")) {
        const auto& pr = j.at("probes");
        if (!pr.is_array()) throw ConfigError("expected an array", "probes");
        for (std::size_t i = 0; i < pr.size(); ++i) c.probes.push_back(number(pr[i], "probes[" + std::to_string(i) + "]"));
    }
    c.convergence_tol = number_or(j, "convergence_tol", 0.1, "$");
    return c;
}

inline json to_json(const ExperimentConfig& c) {
    using detail::to_json;
    json j;
    j["name"] = c.name;
    j["grid"] = {{"t0", c.t0}, {"t_end", c.t_end}, {"h", c.h}};
    json plant = json::array();
    for (const auto& e : c.plant) plant.push_back({{"t_start", e.t_start}, {"num", to_json(e.num)}, {"den", to_json(e.den)}});
    j["plant"] = plant;
    json sig;
    sig[c.controller ? "r" : "u"] = to_json(c.command);
    sig["f"] = to_json(c.disturbance);
    j["signals"] = sig;
    if (c.controller) {
        j["controller"] = {
            {"feedback", {{"num", to_json(c.controller->feedback.num())}, {"den", to_json(c.controller->feedback.den())}}},
            {"reference",
             {{"num", to_json(c.controller->reference.num())}, {"den", to_json(c.controller->reference.den())}}}};
    }
    j["lambda"] = to_json(c.lambda);
    j["instrument"] = {{"mode", c.iv_mode == IvMode::Open ? "open" : "closed"},
                       {"num", to_json(c.iv_num)},
                       {"den", to_json(c.iv_den)}};
    j["pipeline"] = {{"window", c.window}, {"p", c.p}, {"F0", c.F0}};
    json est = json::array();
    for (const auto& e : c.estimators) {
        json th = json::array();
        for (Eigen::Index i = 0; i < e.theta0.size(); ++i) th.push_back(e.theta0(i));
        json je = {{"law", std::string(estimators::law_name(e.kind))}, {"gain", e.gain}, {"theta0", th}};
        if (e.kind == LawKind::Drem) je["forgetting"] = e.forgetting;
        est.push_back(je);
    }
    j["estimators"] = est;
    json mo = {{"excitation", c.monitors.excitation},
               {"independence", c.monitors.independence},
               {"bounds", c.monitors.bounds}};
    if (c.monitors.observer)
        mo["observer"] = {{"P", to_json(c.monitors.observer->filter.P)},
                          {"Q", to_json(c.monitors.observer->filter.Q)},
                          {"rebuild_period", c.monitors.observer->filter.rebuild_period},
                          {"law", std::string(estimators::law_name(c.monitors.observer->law))}};
    j["monitors"] = mo;
    if (c.decimate > 0) j["output"] = {{"decimate", c.decimate}};
    j["probes"] = c.probes;
    j["convergence_tol"] = c.convergence_tol;
    return j;
}

/// Builds the pipeline configuration, checking every invariant the runner
/// relies on. Throws ConfigError carrying the offending field path.
inline regression::PipelineConfig pipeline_config(const ExperimentConfig& c) {
    using detail::at_field;
    regression::PipelineConfig p;
    p.t0 = c.t0;
    p.h = c.h;
    if (!(c.t_end > c.t0)) throw ConfigError("t_end must exceed t0", "grid.t_end");
    (void)c.steps();
    p.lambda = c.lambda;
    (void)regression::StateVariableFilter(c.lambda);

    if (c.plant.empty()) throw ConfigError("plant schedule is empty", "plant");
    if (std::abs(c.plant.front().t_start - c.t0) > 0.5 * c.h)
        throw ConfigError("first plant entry must start at t0", "plant[0].t_start");
    std::vector<regression::PlantSegment> segs;
    for (std::size_t i = 0; i < c.plant.size(); ++i) {
        const std::string path = "plant[" + std::to_string(i) + "]";
        if (i > 0 && !(c.plant[i].t_start > c.plant[i - 1].t_start))
            throw ConfigError("schedule entries overlap: t_start must be strictly increasing", path + ".t_start");
        segs.push_back({c.plant[i].t_start, at_field(path, [&] { return TransferFunction(c.plant[i].num, c.plant[i].den); })});
    }
    p.plant = regression::PlantSchedule(segs);
    p.controller = c.controller;
    p.iv = {c.iv_mode, at_field("instrument", [&] { return TransferFunction(c.iv_num, c.iv_den); })};
    if (!lti::is_hurwitz(c.iv_den))
        throw ConfigError("R(θ_iv, s) = " + c.iv_den.to_string() + " is not Hurwitz", "instrument.den");
    if (!(c.window > 0.0)) throw ConfigError("window width must be positive", "pipeline.window");
    (void)lti::SimClock::steps_in(c.window, c.h, "pipeline.window");
    p.window = c.window;
    p.p = c.p;
    p.F0 = c.F0;
    (void)regression::AveragingWeight(c.t0, c.p, c.F0);
    return p;
}

/// Full validation: constructs every runtime object once.
inline void validate(const ExperimentConfig& c) {
    const auto p = pipeline_config(c);
    (void)regression::RegressionPipeline(p);
    for (const auto* s : {&c.command, &c.disturbance})
        if (const auto* ss = std::get_if<signals::SampledSeries>(s))
            detail::at_field(s == &c.command ? "signals.u" : "signals.f", [&] {
                ss->check_grid(c.t0, c.t_end, c.h);
                return 0;
            });
    const int m = c.dim();
    for (std::size_t i = 0; i < c.estimators.size(); ++i) {
        const std::string path = "estimators[" + std::to_string(i) + "]";
        if (c.estimators[i].theta0.size() != m)
            throw ConfigError("theta0 must have " + std::to_string(m) + " entries", path + ".theta0");
        detail::at_field(path, [&] { return estimators::Estimator(c.estimators[i]).theta_hat().size(); });
        for (std::size_t k = 0; k < i; ++k)
            if (c.estimators[k].kind == c.estimators[i].kind)
                throw ConfigError("law listed twice", path + ".law");
    }
    if (c.monitors.observer) {
        detail::at_field("monitors.observer", [&] { return diagnostics::ObserverState(c.monitors.observer->filter, c.dim() / 2).rebuilds(); });
        bool found = false;
        for (const auto& e : c.estimators) found = found || e.kind == c.monitors.observer->law;
        if (!found) throw ConfigError("observer law is not among the enabled estimators", "monitors.observer.law");
    }
    if (!(c.convergence_tol > 0.0)) throw ConfigError("convergence tolerance must be positive", "convergence_tol");
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("JSON parse error: ") + e.what(), "$");
    }
    auto c = detail::at_field("$", [&] { return parse_config(j, std::filesystem::path(path).parent_path()); });
    validate(c);
    return c;
}

// --- presets -----------------------------------------------------------------------

inline ExperimentConfig preset_section_v() {
    using signals::Harmonic;
    using signals::HarmonicSum;
    using signals::Wave;
    constexpr double pi = std::numbers::pi;
    ExperimentConfig c;
    c.name = "sectionV";
    c.t0 = 0.0;
    c.t_end = 100.0;
    c.h = 1e-4;
    c.plant = {{0.0, Polynomial{-2.0, -1.0}, Polynomial{1.0, 1.0, 2.0}},
               {50.0, Polynomial{-4.0, -2.0}, Polynomial{1.0, 2.0, 4.0}}};
    c.command = HarmonicSum({{1.0, 2.0 * pi, 0.0, Wave::Sin}, {1.0, 3.0, 0.0, Wave::Cos}});
    c.disturbance = HarmonicSum({{0.25, 0.1 * pi, 0.0, Wave::Sin}, {1.0, 4.0, 0.0, Wave::Sin}}, 1.0);
    c.lambda = Polynomial{1.0, 20.0, 100.0};
    c.iv_mode = IvMode::Open;
    c.iv_num = Polynomial{20.0, 100.0};
    c.iv_den = Polynomial{1.0, 20.0, 100.0};
    c.window = 5.0;
    c.p = 10.0;
    c.F0 = 0.01;
    const RegVector zero = RegVector::Zero(4);
    c.estimators = {
        {LawKind::IvDrem, 1e26, 0.1, zero}, {LawKind::Pls, 1e6, 0.1, zero},   {LawKind::IvPls, 1e3, 0.1, zero},
        {LawKind::Gradient, 100.0, 0.1, zero}, {LawKind::Drem, 1e20, 0.1, zero}, {LawKind::Swm, 1e26, 0.1, zero},
    };
    c.monitors.observer = ObserverSpec{};
    c.probes = {49.0, 99.0};
    return c;
}

/// Same scenario with f ≡ 0.
inline ExperimentConfig preset_section_v_undisturbed() {
    auto c = preset_section_v();
    c.name = "sectionV_undisturbed";
    c.disturbance = signals::ZeroSignal{};
    return c;
}

/// f additionally carries sin(2πt), a line shared with u.
inline ExperimentConfig preset_section_v_shared() {
    using signals::Wave;
    auto c = preset_section_v();
    c.name = "sectionV_shared";
    c.disturbance = signals::HarmonicSum({{0.25, 0.1 * std::numbers::pi, 0.0, Wave::Sin},
                                          {1.0, 4.0, 0.0, Wave::Sin},
                                          {1.0, 2.0 * std::numbers::pi, 0.0, Wave::Sin}},
                                         1.0);
    return c;
}

inline std::vector<std::pair<std::string, ExperimentConfig (*)()>> presets() {
    return {{"sectionV", &preset_section_v},
            {"sectionV_undisturbed", &preset_section_v_undisturbed},
            {"sectionV_shared", &preset_section_v_shared}};
}

inline std::optional<ExperimentConfig> preset(const std::string& name) {
    for (const auto& [n, fn] : presets())
        if (n == name) return fn();
    return std::nullopt;
}

}  // namespace ivdrem::experiment
