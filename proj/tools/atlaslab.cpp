#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "atlaslab/config.hpp"
#include "atlaslab/experiments.hpp"

namespace {

// precedence: --seed flag > ATLASLAB_SEED > config file
void apply_seed_overrides(atlaslab::config::ExperimentConfig& cfg,
                          bool flag_set, uint64_t flag_seed) {
    if (flag_set) {
        cfg.seed = flag_seed;
        return;
    }
    if (const char* env = std::getenv("ATLASLAB_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw atlaslab::ConfigError(
                "ATLASLAB_SEED: not a valid seed value");
        }
    }
}

int do_validate(const atlaslab::config::ExperimentConfig& cfg) {
    const auto notes = atlaslab::config::validate_config(cfg);
    bool bad = false;
    for (const auto& note : notes) {
        std::cout << (note.error ? "error: " : "note: ") << note.message
                  << "\n";
        bad = bad || note.error;
    }
    std::cout << (bad ? "config rejected\n" : "config ok\n");
    return bad ? 1 : 0;
}

int do_run(const atlaslab::config::ExperimentConfig& cfg) {
    const auto notes = atlaslab::config::validate_config(cfg);
    for (const auto& note : notes) {
        if (note.error) {
            std::cerr << "error: " << note.message << "\n";
            return 1;
        }
    }
    const auto rep = atlaslab::experiments::run_experiment(cfg);
    std::size_t failed = 0;
    for (const auto& c : rep.checks) {
        if (!c.pass) {
            ++failed;
            std::cerr << "[FAIL] " << c.name << "\n";
        }
    }
    std::cout << "report: " << cfg.out_dir << "/report.json ("
              << rep.checks.size() - failed << "/" << rep.checks.size()
              << " checks passed)\n";
    return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"atlaslab: Monte Carlo lab for rank-based Brownian particle systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool threads_set = false;
    bool validate_only = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file")
            ->required();
        sub->add_option("--out", out_dir, "override out_dir");
        sub->add_option("--seed", seed, "override RNG seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--threads", threads, "worker threads (0 = all cores)")
            ->each([&](const std::string&) { threads_set = true; });
    };

    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
    add_common(run_cmd);
    run_cmd->add_flag("--validate", validate_only,
                      "only validate the config, no simulation");
    CLI::App* validate_cmd =
        app.add_subcommand("validate", "dry-run config diagnostics");
    add_common(validate_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = atlaslab::config::parse_config_file(config_path);
        apply_seed_overrides(cfg, seed_set, seed);
        if (threads_set) cfg.threads = threads;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (app.got_subcommand(validate_cmd) || validate_only) {
            return do_validate(cfg);
        }
        return do_run(cfg);
    } catch (const atlaslab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
