#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "afc/config.hpp"

namespace afc {

struct ContractCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Outcome of one experiment run: ordered scalar metrics, pass/fail contract
// lines and the manifest/table files written. Re-running with the same
// config and seed reproduces the manifest byte for byte.
struct ExperimentResult {
    std::string id;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> metrics;
    std::vector<ContractCheck> contracts;
    std::vector<std::string> files;
    std::string manifest_path;

    bool passed() const;
    void add_metric(const std::string& key, double value);
    void add_metric(const std::string& key, const std::string& value);
    /// Numeric metric lookup; throws AnalysisError when absent.
    double metric(const std::string& key) const;
    void add_contract(const std::string& name, bool ok,
                      const std::string& detail);
};

// Pump-strength calibration: the per-repeat depletion coefficient kappa is
// a free parameter of the burning model, fixed once against the measured
// comb parameters of the 10 MHz comb (d ~ 1.7 over d0 ~ 0.5) and then
// shared by every burned experiment.
struct PumpCalibration {
    double kappa = 0.0;
    double delta_mhz = 10.0;
    double target_peak_depth = 1.7;
    double target_background = 0.5;
    double achieved_peak_depth = 0.0;
    double achieved_background = 0.0;
    double achieved_finesse = 0.0;
    int repeats = 2000;
    double resolution_fwhm_mhz = 1.0;
};

PumpCalibration calibrate_pump_strength(const ExperimentConfig& cfg);
void save_calibration(const PumpCalibration& cal, const std::string& path);
PumpCalibration load_calibration(const std::string& path);

ExperimentResult run_storage_time_sweep(const ExperimentConfig& cfg,
                                        const std::string& out_dir,
                                        const std::string& calibration_path);
ExperimentResult run_bandwidth_sweep(const ExperimentConfig& cfg,
                                     const std::string& out_dir,
                                     const std::string& calibration_path);
ExperimentResult run_multimode64(const ExperimentConfig& cfg,
                                 const std::string& out_dir,
                                 const std::string& calibration_path);
ExperimentResult run_interference(const ExperimentConfig& cfg,
                                  const std::string& out_dir,
                                  const std::string& calibration_path);
ExperimentResult run_arbitrary_waveform(const ExperimentConfig& cfg,
                                        const std::string& out_dir,
                                        const std::string& calibration_path);
ExperimentResult run_finesse_study(const ExperimentConfig& cfg,
                                   const std::string& out_dir,
                                   const std::string& calibration_path);

/// Dispatch by cfg.id; writes the manifest and data tables into out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir,
                                const std::string& calibration_path);

}  // namespace afc
