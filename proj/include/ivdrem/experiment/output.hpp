#pragma once

#include "ivdrem/experiment/runner.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>

namespace ivdrem::experiment {

/// Shortest text with 17 significant digits, '.' decimal, locale independent.
inline std::string format_double(double v) {
    char buf[40];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, r.ptr};
}

/// RFC 4180 field quoting (only needed for header names containing , " or newlines).
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline void write_csv(std::ostream& os, const RunLog& log) {
    for (std::size_t j = 0; j < log.columns.size(); ++j) os << (j ? "," : "") << csv_field(log.columns[j]);
    os << "\r\n";
    for (const auto& row : log.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
        os << "\r\n";
    }
}

namespace detail {

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json channels(const std::vector<diagnostics::ChannelIndependence>& ch) {
    json a = json::array();
    for (const auto& c : ch)
        a.push_back({{"value", c.value}, {"sup", c.sup}, {"slope", c.slope}, {"divergent", c.divergent}});
    return a;
}

}  // namespace detail

inline json to_json(const ComparisonReport& r) {
    using detail::number_or_null;
    json j;
    j["name"] = r.name;
    j["steps"] = r.steps;
    j["h"] = r.h;
    j["status"] = r.abort ? "aborted" : "ok";
    if (r.abort)
        j["error"] = {{"step", r.abort->step}, {"t", r.abort->t}, {"module", r.abort->module}, {"message", r.abort->message}};
    json laws = json::object();
    for (const auto& l : r.laws) {
        json probes = json::array();
        for (const auto& [t, e] : l.errors.probes) probes.push_back({{"t", t}, {"max_abs_error", e}});
        json jl = {{"final_theta_hat", l.final_theta_hat},
                   {"final_max_abs_error", l.errors.final_max_abs},
                   {"final_error_norm", l.errors.final_norm},
                   {"convergence_time", l.errors.convergence_time ? json(*l.errors.convergence_time) : json(nullptr)},
                   {"probes", probes},
                   {"diverged", l.diverged_at.has_value()}};
        if (l.diverged_at) jl["divergence"] = {{"step", *l.diverged_at}, {"message", l.divergence}};
        if (l.name == "pls" || l.name == "iv_pls") jl["gamma_wound_down"] = l.wound_down;
        laws[l.name] = jl;
    }
    j["laws"] = laws;
    json mon = json::object();
    if (r.excitation) {
        const auto& e = *r.excitation;
        mon["excitation"] = {{"status", e.status},       {"alpha_hat", e.alpha_hat}, {"delta_lb", e.delta_lb},
                             {"delta_ub", e.delta_ub},   {"t_delta", number_or_null(e.t_delta)},
                             {"sign_constant", e.sign_constant}};
    }
    if (r.independence) {
        mon["independence"] = {{"zeta", detail::channels(r.independence->zeta)},
                               {"phi", detail::channels(r.independence->phi)},
                               {"all_zeta_bounded", r.independence->all_zeta_bounded()},
                               {"any_phi_divergent", r.independence->any_phi_divergent()}};
    }
    if (r.bounds) {
        const auto& b = *r.bounds;
        mon["bounds"] = {{"c_w_hat", b.c_w_hat},
                         {"int_abs_W", b.l1_of_W},
                         {"int_W_squared", b.l1_of_W2},
                         {"int_delta_squared", b.l2_of_delta},
                         {"int_delta_squared_at_final_quarter", b.l2_of_delta_at_quarter},
                         {"delta_not_l2", b.delta_not_l2}};
    }
    if (r.observer)
        mon["observer"] = {{"ever_paused", r.observer->ever_paused},
                           {"rebuilds", r.observer->rebuilds},
                           {"mean_abs_error_40_50", number_or_null(r.observer->mean_abs_error_40_50)}};
    if (!mon.empty()) j["monitors"] = mon;
    j["checks"] = {{"max_adjugate_ratio", r.max_adjugate_ratio}, {"max_lre_ratio", r.max_lre_ratio}};
    return j;
}

/// Writes trajectories.csv, summary.json, fig1.dat and fig2.dat into `dir`.
inline void emit_outputs(const RunResult& res, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto open = [&](const char* name) {
        std::ofstream os(dir / name, std::ios::binary);
        if (!os) throw IoError("cannot write " + (dir / name).string());
        return os;
    };
    const auto check = [&](std::ofstream& os, const char* name) {
        os.flush();
        if (!os) throw IoError("write failed for " + (dir / name).string());
    };

    {
        auto os = open("trajectories.csv");
        write_csv(os, res.log);
        check(os, "trajectories.csv");
    }
    {
        auto os = open("summary.json");
        os << to_json(res.report).dump(2) << "\n";
        check(os, "summary.json");
    }
    const auto& log = res.log;
    {
        auto os = open("fig1.dat");
        os << "# t Delta W_norm\n";
        const std::size_t it = log.index("t"), id = log.index("Delta"), iw = log.index("W_norm");
        for (const auto& r : log.rows)
            os << format_double(r[it]) << ' ' << format_double(r[id]) << ' ' << format_double(r[iw]) << '\n';
        check(os, "fig1.dat");
    }
    {
        auto os = open("fig2.dat");
        std::vector<std::size_t> sel{log.index("t")};
        os << "# t";
        for (std::size_t j = 0; j < log.columns.size(); ++j)
            if (log.columns[j].rfind("theta_", 0) == 0) {
                sel.push_back(j);
                os << ' ' << log.columns[j];
            }
        os << '\n';
        for (const auto& r : log.rows) {
            for (std::size_t k = 0; k < sel.size(); ++k) os << (k ? " " : "") << format_double(r[sel[k]]);
            os << '\n';
        }
        check(os, "fig2.dat");
    }
}

}  // namespace ivdrem::experiment
