// certsamp: batch runner for the verification protocols.
//
//   certsamp simulate --config cfg.json [--seed S] [--out DIR] [--jobs N]
//   certsamp sweep    --config cfg.json [--seed S] [--out DIR] [--jobs N]
//   certsamp verify   --suite NAME [--seed S] [--scale X]
//
// Exit status: 0 on completion (whatever the verdicts), 1 when a verify check
// fails or an internal error occurs, 2 on a configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "certsamp/experiment.h"
#include "certsamp/suites.h"

namespace {

using namespace certsamp;

struct RunOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    int jobs = 1;
};

void write_file(const std::filesystem::path &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
    f << text;
}

int simulate(const RunOptions &opt, bool sweep) {
    ExperimentConfig base = load_config(opt.config);
    if (opt.seed) {
        base.seed = *opt.seed;
    }
    std::vector<ExperimentConfig> grid = sweep ? expand_sweep(base) : std::vector<ExperimentConfig>{base};
    if (!sweep && !base.sweep.is_null()) {
        std::cerr << "note: config has a sweep grid; `simulate` runs the base point only\n";
    }
    std::filesystem::create_directories(opt.out);
    std::string csv = std::string(kCsvHeader) + "\n";
    std::string jsonl;
    for (size_t i = 0; i < grid.size(); i++) {
        ExperimentResult res = run_experiment(grid[i], opt.jobs);
        csv += csv_rows(res);
        jsonl += jsonl_records(res);
        std::uint64_t accepted = 0, errors = 0;
        for (const auto &r : res.runs) {
            accepted += r.accepted ? 1 : 0;
            errors += r.verdict.outcome == Outcome::kError ? 1 : 0;
        }
        std::printf(
            "%s %s N=%llu runs=%zu accepted=%llu errors=%llu accept_rate=%.4f\n", model_name(grid[i].model).c_str(),
            res.strategy_label.c_str(), static_cast<unsigned long long>(res.rounds), res.runs.size(),
            static_cast<unsigned long long>(accepted), static_cast<unsigned long long>(errors),
            static_cast<double>(accepted) / static_cast<double>(res.runs.size()));
    }
    write_file(std::filesystem::path(opt.out) / base.csv, csv);
    write_file(std::filesystem::path(opt.out) / base.jsonl, jsonl);
    return 0;
}

int verify(const std::string &suite, std::uint64_t seed, double scale) {
    suites::SuiteOptions o;
    o.seed = seed;
    o.scale = scale;
    bool all = true;
    for (const auto &c : suites::run_suite(suite, o)) {
        std::cout << suites::format_check(c) << "\n";
        all = all && c.passed;
    }
    std::cout << (all ? "suite " + suite + ": PASS" : "suite " + suite + ": FAIL") << std::endl;
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Simulator and test harness for certified sampling protocols"};
    app.require_subcommand(1);

    RunOptions run;
    auto add_run_flags = [&](CLI::App *cmd) {
        cmd->add_option("--config", run.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", run.seed, "override the config seed");
        cmd->add_option("--out", run.out, "output directory")->capture_default_str();
        cmd->add_option("--jobs", run.jobs, "worker threads for meta-runs")->check(CLI::PositiveNumber);
    };
    CLI::App *sim = app.add_subcommand("simulate", "run meta_runs protocol executions");
    add_run_flags(sim);
    CLI::App *sweep = app.add_subcommand("sweep", "simulate over the config's parameter grid");
    add_run_flags(sweep);

    std::string suite;
    std::uint64_t verify_seed = suites::SuiteOptions{}.seed;
    double scale = 1.0;
    CLI::App *ver = app.add_subcommand("verify", "run a property suite with fixed seeds");
    ver->add_option("--suite", suite, "swap | reduction | mixture | estimator | clawfree")
        ->required()
        ->check(CLI::IsMember(suites::suite_names()));
    ver->add_option("--seed", verify_seed, "suite seed")->capture_default_str();
    ver->add_option("--scale", scale, "multiply instance counts")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            return simulate(run, false);
        }
        if (*sweep) {
            return simulate(run, true);
        }
        return verify(suite, verify_seed, scale);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
