// Command-line front end: run | presets | validate.

#include "ivdrem/experiment/output.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

namespace ex = ivdrem::experiment;

namespace {

enum Exit { kOk = 0, kConfig = 1, kIo = 2, kNumerical = 3 };

struct Job {
    std::string label;
    ex::ExperimentConfig cfg;
    std::filesystem::path out;
};

std::mutex g_print;

void report(const std::string& msg) {
    std::lock_guard lock(g_print);
    std::cerr << msg << '\n';
}

int run_job(const Job& job) {
    ex::RunResult res;
    try {
        res = ex::run_experiment(job.cfg);
    } catch (const ivdrem::ConfigError& e) {
        report(job.label + ": config error: " + e.what());
        return kConfig;
    } catch (const ivdrem::NumericalError& e) {
        report(job.label + ": numerical error: " + e.what());
        return kNumerical;
    }
    try {
        ex::emit_outputs(res, job.out);
    } catch (const ivdrem::IoError& e) {
        report(job.label + ": " + e.what());
        return kIo;
    }
    if (res.aborted()) {
        const auto& a = *res.report.abort;
        report(job.label + ": aborted at step " + std::to_string(a.step) + " (" + a.module + "): " + a.message +
               "; partial log written to " + job.out.string());
        return kNumerical;
    }
    report(job.label + ": wrote " + job.out.string());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IV-based DREM parameter estimation experiments"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out_dir, preset_name;
    long decimate = 0;
    unsigned jobs = 1;
    auto* run = app.add_subcommand("run", "run one or more experiments");
    run->add_option("--config", configs, "experiment JSON file (repeatable)");
    run->add_option("--preset", preset_name, "built-in scenario instead of a file");
    run->add_option("--out", out_dir, "output directory")->required();
    run->add_option("--decimate", decimate, "log every K-th step")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "parallel runs for several configs")->check(CLI::PositiveNumber);

    std::string dump;
    auto* pres = app.add_subcommand("presets", "list built-in scenarios or print one as JSON");
    pres->add_option("--dump", dump, "preset to print");

    std::vector<std::string> to_validate;
    auto* val = app.add_subcommand("validate", "check config files without running");
    val->add_option("--config", to_validate, "experiment JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*pres) {
        if (dump.empty()) {
            for (const auto& [name, fn] : ex::presets()) std::cout << name << '\n';
            return kOk;
        }
        const auto cfg = ex::preset(dump);
        if (!cfg) {
            std::cerr << "unknown preset " << dump << '\n';
            return kConfig;
        }
        std::cout << ex::to_json(*cfg).dump(2) << '\n';
        return kOk;
    }

    if (*val) {
        int code = kOk;
        for (const auto& path : to_validate) {
            try {
                (void)ex::load_config(path);
                std::cout << path << ": ok\n";
            } catch (const ivdrem::ConfigError& e) {
                std::cerr << path << ": " << e.what() << '\n';
                code = kConfig;
            } catch (const ivdrem::IoError& e) {
                std::cerr << path << ": " << e.what() << '\n';
                if (code == kOk) code = kIo;
            }
        }
        return code;
    }

    std::vector<Job> list;
    try {
        if (!preset_name.empty()) {
            auto cfg = ex::preset(preset_name);
            if (!cfg) {
                std::cerr << "unknown preset " << preset_name << '\n';
                return kConfig;
            }
            list.push_back({preset_name, *cfg, {}});
        }
        for (const auto& path : configs) list.push_back({path, ex::load_config(path), {}});
    } catch (const ivdrem::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfig;
    } catch (const ivdrem::IoError& e) {
        std::cerr << e.what() << '\n';
        return kIo;
    }
    if (list.empty()) {
        std::cerr << "run: give --config or --preset\n";
        return kConfig;
    }
    for (auto& job : list) {
        if (decimate > 0) job.cfg.decimate = decimate;
        job.out = list.size() == 1 ? std::filesystem::path(out_dir) : std::filesystem::path(out_dir) / job.cfg.name;
    }
    for (std::size_t i = 0; i < list.size(); ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (list[i].out == list[k].out) {
                std::cerr << "run: configs " << list[k].label << " and " << list[i].label
                          << " share the name \"" << list[i].cfg.name << "\"\n";
                return kConfig;
            }

    std::vector<int> codes(list.size(), kOk);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < list.size(); i = next++) codes[i] = run_job(list[i]);
    };
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(list.size()));
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int code = kOk;
    for (int c : codes) code = std::max(code, c);
    return code;
}
