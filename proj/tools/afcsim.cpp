// afcsim — command-line runner for the comb-memory simulator.
//
// Exit codes: 0 = run passed its contracts, 2 = a contract failed,
// 1 = configuration or runtime error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "afc/config.hpp"
#include "afc/experiments.hpp"
#include "afc/io_util.hpp"

namespace {

std::string default_out_root() {
    if (const char* env = std::getenv("AFCSIM_OUT_ROOT")) return env;
    return "afcsim_out";
}

int do_run(const std::string& experiment, const std::string& config_path,
           std::string out_root, long long seed_override,
           long long trials_override, bool quiet) {
    afc::ExperimentConfig cfg;
    if (!config_path.empty()) {
        cfg = afc::parse_config(config_path);
        if (!experiment.empty() && experiment != cfg.id) {
            std::cerr << "error: config file selects experiment '" << cfg.id
                      << "' but the command line asked for '" << experiment
                      << "'\n";
            return 1;
        }
    } else {
        if (experiment.empty()) {
            std::cerr << "error: no experiment given (and no --config)\n";
            return 1;
        }
        cfg = afc::default_config(experiment);
    }
    if (seed_override >= 0) {
        cfg.seed = static_cast<std::uint64_t>(seed_override);
        cfg.detection.rng_seed = cfg.seed;
    }
    if (trials_override > 0) cfg.detection.n_trials = trials_override;

    if (out_root.empty()) out_root = default_out_root();
    const std::string out_dir = out_root + "/" + cfg.label;
    afc::ensure_directory(out_dir);
    const std::string calibration_path = out_root + "/calibration.txt";

    const auto result = afc::run_experiment(cfg, out_dir, calibration_path);
    if (!quiet) {
        std::cout << "experiment: " << result.id << " (seed " << result.seed
                  << ")\n";
        for (const auto& [k, v] : result.metrics)
            std::cout << "  " << k << " = " << v << '\n';
        for (const auto& c : result.contracts)
            std::cout << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name
                      << " (" << c.detail << ")\n";
        std::cout << "manifest: " << result.manifest_path << '\n';
    }
    return result.passed() ? 0 : 2;
}

int do_calibrate(const std::string& config_path, std::string out_root,
                 bool quiet) {
    afc::ExperimentConfig cfg = config_path.empty()
                                    ? afc::default_config("storage_time_sweep")
                                    : afc::parse_config(config_path);
    if (out_root.empty()) out_root = default_out_root();
    afc::ensure_directory(out_root);
    const auto cal = afc::calibrate_pump_strength(cfg);
    const std::string path = out_root + "/calibration.txt";
    afc::save_calibration(cal, path);
    if (!quiet) {
        std::cout << "kappa = " << afc::format_metric(cal.kappa) << '\n'
                  << "achieved d = " << afc::format_metric(cal.achieved_peak_depth)
                  << " (target " << afc::format_metric(cal.target_peak_depth)
                  << ")\n"
                  << "achieved d0 = "
                  << afc::format_metric(cal.achieved_background) << " (target "
                  << afc::format_metric(cal.target_background) << ")\n"
                  << "achieved finesse = "
                  << afc::format_metric(cal.achieved_finesse) << '\n'
                  << "written to " << path << '\n';
    }
    return 0;
}

int do_list() {
    for (const auto& id : afc::kExperimentIds) std::cout << id << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"afcsim — atomic-frequency-comb optical memory simulator"};
    app.require_subcommand(1);

    std::string experiment, config_path, out_root;
    long long seed = -1, trials = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run an experiment");
    run->add_option("experiment", experiment,
                    "experiment id (see `afcsim list`)");
    run->add_option("--config", config_path, "config file (key = value)");
    run->add_option("--out", out_root,
                    "output root (default $AFCSIM_OUT_ROOT or ./afcsim_out)");
    run->add_option("--seed", seed, "seed override");
    run->add_option("--trials", trials, "detection trials override");
    run->add_flag("--quiet", quiet, "suppress console output");

    auto* calibrate =
        app.add_subcommand("calibrate", "calibrate the pump strength kappa");
    calibrate->add_option("--config", config_path, "config file");
    calibrate->add_option("--out", out_root, "output root");
    calibrate->add_flag("--quiet", quiet, "suppress console output");

    auto* list = app.add_subcommand("list", "list available experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(run))
            return do_run(experiment, config_path, out_root, seed, trials,
                          quiet);
        if (app.got_subcommand(calibrate))
            return do_calibrate(config_path, out_root, quiet);
        if (app.got_subcommand(list)) return do_list();
    } catch (const afc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
