#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afc/detection.hpp"
#include "afc/material.hpp"

namespace afc {

// Raw parse of the flat `key = value` config format with [section] headers
// and '#' comments. Line numbers are kept for diagnostics.
class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_text(const std::string& text,
                                   const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    std::vector<double> get_list(const std::string& section,
                                 const std::string& key,
                                 const std::vector<double>& fallback) const;

    /// Every (section, key) pair in file order; used to reject unknown keys.
    std::vector<std::pair<std::string, std::string>> entries() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    std::string origin_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::vector<std::pair<std::string, std::string>> order_;

    const Entry* find(const std::string& section, const std::string& key) const;
};

enum class CombSource { Parametric, Burned };

struct GridConfig {
    double f_center_mhz = 0.0;
    double span_mhz = 0.0;     // 0 = experiment default
    std::size_t n_points = 0;  // 0 = experiment default
};

struct CombConfig {
    double delta_mhz = 0.0;    // 0 = experiment default
    double finesse = 2.7;
    double peak_depth = 1.0;
    double background = 1.0;
    double bandwidth_mhz = 100.0;
    CombSource source = CombSource::Parametric;
};

struct PreparationConfig {
    double pulse_fwhm_us = 0.02;
    int n_side_pairs = 1;
    std::vector<double> freq_shifts_mhz;  // empty = experiment default
    int repeats = 2000;
    double sequence_period_us = 16.0;
    std::optional<double> kappa;          // empty = use the calibration file
    double resolution_fwhm_mhz = -1.0;    // <0 = material gamma_eff
    int passes = 2;
    bool relaxation = true;
};

// Fully resolved run description. Defaults mirror the reference apparatus:
// detector efficiency 0.32, 300 Hz dark counts, path transmission 0.27,
// 1000 trials per preparation cycle.
struct ExperimentConfig {
    std::string id;
    std::uint64_t seed = 1;
    std::string label;

    GridConfig grid;
    CombConfig comb;
    PreparationConfig preparation;
    MaterialParams material;
    DetectionConfig detection;
    // Whether the config file pinned mean_photons; otherwise each
    // experiment applies its own reference value.
    bool mean_photons_set = false;

    // storage_time_sweep
    std::vector<double> sweep_deltas_mhz{10.0, 5.0, 2.5, 1.25, 1.0};
    // bandwidth_sweep
    std::vector<double> input_fwhms_ns{100.0, 50.0, 20.0, 10.0, 5.0};
    // multimode64
    std::string multimode_pattern = "random01";
    int n_modes = 64;
    double mode_separation_ns = 20.0;
    double mode_fwhm_ns = 5.0;
    // interference
    double interference_phi_rad = 0.0;
    double delta1_mhz = 1.0 / 1.2;
    double delta2_mhz = 1.0 / 1.32;
    double bin_separation_us = 0.12;
    // finesse_study
    std::vector<double> finesse_study_depths{0.5, 1.0, 1.7, 2.0, 3.0};
    double finesse_study_background = 0.0;
};

extern const std::vector<std::string> kExperimentIds;

bool is_known_experiment(const std::string& id);

/// Builds the fully validated config for an experiment. Unknown keys,
/// malformed values and violated invariants are all collected and reported
/// together in one ConfigError.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<string>");

/// Config with defaults only, for runs without a config file.
ExperimentConfig default_config(const std::string& experiment_id);

/// Deterministic serialization of the effective config (manifest section).
std::string describe_config(const ExperimentConfig& cfg);

}  // namespace afc
