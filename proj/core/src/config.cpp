#include "afc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "afc/io_util.hpp"

namespace afc {

const std::vector<std::string> kExperimentIds = {
    "storage_time_sweep", "bandwidth_sweep",    "multimode64",
    "interference",       "arbitrary_waveform", "finesse_study",
};

bool is_known_experiment(const std::string& id) {
    return std::find(kExperimentIds.begin(), kExperimentIds.end(), id) !=
           kExperimentIds.end();
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    auto in = open_input(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

KeyValueFile KeyValueFile::parse_text(const std::string& text,
                                      const std::string& origin) {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                problems.push_back(origin + ":" + std::to_string(line_no) +
                                   ": unterminated section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            problems.push_back(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            problems.push_back(origin + ":" + std::to_string(line_no) +
                               ": empty key");
            continue;
        }
        if (kv.sections_[section].count(key)) {
            problems.push_back(origin + ":" + std::to_string(line_no) +
                               ": duplicate key '" + key + "'");
            continue;
        }
        kv.sections_[section][key] = Entry{value, line_no};
        kv.order_.emplace_back(section, key);
    }
    if (!problems.empty()) {
        std::string msg = "config parse failed:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return kv;
}

const KeyValueFile::Entry* KeyValueFile::find(const std::string& section,
                                              const std::string& key) const {
    const auto sit = sections_.find(section);
    if (sit == sections_.end()) return nullptr;
    const auto kit = sit->second.find(key);
    return kit == sit->second.end() ? nullptr : &kit->second;
}

bool KeyValueFile::has(const std::string& section,
                       const std::string& key) const {
    return find(section, key) != nullptr;
}

std::string KeyValueFile::get(const std::string& section,
                              const std::string& key,
                              const std::string& fallback) const {
    const auto* e = find(section, key);
    return e ? e->value : fallback;
}

double KeyValueFile::get_double(const std::string& section,
                                const std::string& key,
                                double fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field [" +
                          section + "] " + key + " = '" + e->value +
                          "' is not a number");
    }
}

long long KeyValueFile::get_int(const std::string& section,
                                const std::string& key,
                                long long fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field [" +
                          section + "] " + key + " = '" + e->value +
                          "' is not an integer");
    }
}

std::vector<double> KeyValueFile::get_list(
    const std::string& section, const std::string& key,
    const std::vector<double>& fallback) const {
    const auto* e = find(section, key);
    if (!e) return fallback;
    try {
        return parse_double_list(e->value);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e->line) + ": field [" +
                          section + "] " + key + " = '" + e->value +
                          "' is not a comma-separated number list");
    }
}

std::vector<std::pair<std::string, std::string>> KeyValueFile::entries() const {
    return order_;
}

namespace {

const std::set<std::pair<std::string, std::string>> kKnownKeys = {
    {"experiment", "id"},
    {"experiment", "seed"},
    {"experiment", "label"},
    {"grid", "f_center_mhz"},
    {"grid", "span_mhz"},
    {"grid", "n_points"},
    {"comb", "delta_mhz"},
    {"comb", "finesse"},
    {"comb", "peak_depth"},
    {"comb", "background"},
    {"comb", "bandwidth_mhz"},
    {"comb", "source"},
    {"preparation", "pulse_fwhm_us"},
    {"preparation", "n_side_pairs"},
    {"preparation", "freq_shifts_mhz"},
    {"preparation", "repeats"},
    {"preparation", "sequence_period_us"},
    {"preparation", "kappa"},
    {"preparation", "resolution_fwhm_mhz"},
    {"preparation", "passes"},
    {"preparation", "relaxation"},
    {"material", "T1_us"},
    {"material", "T2_us"},
    {"material", "T1Z_ms"},
    {"material", "gamma_eff_mhz"},
    {"material", "inhom_width_ghz"},
    {"material", "single_pass_depth"},
    {"material", "g_ground"},
    {"material", "g_excited"},
    {"detection", "mean_photons"},
    {"detection", "det_efficiency"},
    {"detection", "dark_rate_hz"},
    {"detection", "path_transmission"},
    {"detection", "n_trials"},
    {"detection", "bin_width_ns"},
    {"storage_time_sweep", "deltas_mhz"},
    {"bandwidth_sweep", "input_fwhms_ns"},
    {"multimode64", "pattern"},
    {"multimode64", "n_modes"},
    {"multimode64", "mode_separation_ns"},
    {"multimode64", "mode_fwhm_ns"},
    {"interference", "phi_rad"},
    {"interference", "delta1_mhz"},
    {"interference", "delta2_mhz"},
    {"interference", "bin_separation_us"},
    {"finesse_study", "depths"},
    {"finesse_study", "background"},
};

ExperimentConfig build_config(const KeyValueFile& kv) {
    std::vector<std::string> problems;

    for (const auto& [section, key] : kv.entries()) {
        if (!kKnownKeys.count({section, key}))
            problems.push_back("unknown key [" + section + "] " + key);
    }

    ExperimentConfig cfg;
    cfg.id = kv.get("experiment", "id", "");
    if (cfg.id.empty()) {
        problems.push_back("missing [experiment] id");
    } else if (!is_known_experiment(cfg.id)) {
        problems.push_back("unknown experiment id '" + cfg.id + "'");
    }
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("experiment", "seed", 1));
    cfg.label = kv.get("experiment", "label", cfg.id);

    cfg.grid.f_center_mhz = kv.get_double("grid", "f_center_mhz", 0.0);
    cfg.grid.span_mhz = kv.get_double("grid", "span_mhz", 0.0);
    cfg.grid.n_points =
        static_cast<std::size_t>(kv.get_int("grid", "n_points", 0));
    if (cfg.grid.n_points != 0 &&
        (cfg.grid.n_points < 2 || (cfg.grid.n_points & (cfg.grid.n_points - 1))))
        problems.push_back("[grid] n_points must be a power of two >= 2");
    if (cfg.grid.span_mhz < 0.0)
        problems.push_back("[grid] span_mhz must be positive");

    cfg.comb.delta_mhz = kv.get_double("comb", "delta_mhz", 0.0);
    cfg.comb.finesse = kv.get_double("comb", "finesse", cfg.comb.finesse);
    cfg.comb.peak_depth = kv.get_double("comb", "peak_depth", cfg.comb.peak_depth);
    cfg.comb.background = kv.get_double("comb", "background", cfg.comb.background);
    cfg.comb.bandwidth_mhz =
        kv.get_double("comb", "bandwidth_mhz", cfg.comb.bandwidth_mhz);
    const std::string source = kv.get("comb", "source", "parametric");
    if (source == "parametric") {
        cfg.comb.source = CombSource::Parametric;
    } else if (source == "burned") {
        cfg.comb.source = CombSource::Burned;
    } else {
        problems.push_back("[comb] source must be 'parametric' or 'burned'");
    }
    if (cfg.comb.delta_mhz < 0.0)
        problems.push_back("[comb] delta_mhz must be positive");
    if (cfg.comb.finesse <= 1.0)
        problems.push_back("[comb] finesse must exceed 1");
    if (cfg.comb.peak_depth < 0.0)
        problems.push_back("[comb] peak_depth must be >= 0");
    if (cfg.comb.background < 0.0)
        problems.push_back("[comb] background must be >= 0");

    cfg.preparation.pulse_fwhm_us =
        kv.get_double("preparation", "pulse_fwhm_us", cfg.preparation.pulse_fwhm_us);
    cfg.preparation.n_side_pairs = static_cast<int>(
        kv.get_int("preparation", "n_side_pairs", cfg.preparation.n_side_pairs));
    cfg.preparation.freq_shifts_mhz =
        kv.get_list("preparation", "freq_shifts_mhz", {});
    cfg.preparation.repeats = static_cast<int>(
        kv.get_int("preparation", "repeats", cfg.preparation.repeats));
    cfg.preparation.sequence_period_us = kv.get_double(
        "preparation", "sequence_period_us", cfg.preparation.sequence_period_us);
    if (kv.has("preparation", "kappa")) {
        const std::string k = kv.get("preparation", "kappa", "auto");
        if (k != "auto")
            cfg.preparation.kappa = kv.get_double("preparation", "kappa", 0.0);
    }
    cfg.preparation.resolution_fwhm_mhz =
        kv.get_double("preparation", "resolution_fwhm_mhz", -1.0);
    cfg.preparation.passes =
        static_cast<int>(kv.get_int("preparation", "passes", 2));
    cfg.preparation.relaxation =
        kv.get_int("preparation", "relaxation", 1) != 0;
    if (cfg.preparation.pulse_fwhm_us <= 0.0)
        problems.push_back("[preparation] pulse_fwhm_us must be positive");
    if (cfg.preparation.n_side_pairs < 1)
        problems.push_back("[preparation] n_side_pairs must be >= 1");
    if (cfg.preparation.repeats < 1)
        problems.push_back("[preparation] repeats must be >= 1");
    if (cfg.preparation.passes != 1 && cfg.preparation.passes != 2)
        problems.push_back("[preparation] passes must be 1 or 2");
    if (cfg.preparation.kappa && *cfg.preparation.kappa <= 0.0)
        problems.push_back("[preparation] kappa must be positive");

    cfg.material.t1_us = kv.get_double("material", "T1_us", cfg.material.t1_us);
    cfg.material.t2_us = kv.get_double("material", "T2_us", cfg.material.t2_us);
    cfg.material.t1z_ms = kv.get_double("material", "T1Z_ms", cfg.material.t1z_ms);
    cfg.material.gamma_eff_mhz =
        kv.get_double("material", "gamma_eff_mhz", cfg.material.gamma_eff_mhz);
    cfg.material.inhom_width_ghz =
        kv.get_double("material", "inhom_width_ghz", cfg.material.inhom_width_ghz);
    cfg.material.single_pass_depth = kv.get_double(
        "material", "single_pass_depth", cfg.material.single_pass_depth);
    cfg.material.g_ground = kv.get_double("material", "g_ground", cfg.material.g_ground);
    cfg.material.g_excited =
        kv.get_double("material", "g_excited", cfg.material.g_excited);
    try {
        cfg.material.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }

    cfg.mean_photons_set = kv.has("detection", "mean_photons");
    cfg.detection.mean_photons =
        kv.get_double("detection", "mean_photons", cfg.detection.mean_photons);
    cfg.detection.det_efficiency =
        kv.get_double("detection", "det_efficiency", cfg.detection.det_efficiency);
    cfg.detection.dark_rate_hz =
        kv.get_double("detection", "dark_rate_hz", cfg.detection.dark_rate_hz);
    cfg.detection.path_transmission = kv.get_double(
        "detection", "path_transmission", cfg.detection.path_transmission);
    cfg.detection.n_trials =
        kv.get_int("detection", "n_trials", cfg.detection.n_trials);
    cfg.detection.bin_width_ns =
        kv.get_double("detection", "bin_width_ns", cfg.detection.bin_width_ns);
    cfg.detection.rng_seed = cfg.seed;
    try {
        cfg.detection.validate();
    } catch (const ConfigError& e) {
        problems.push_back(e.what());
    }

    cfg.sweep_deltas_mhz =
        kv.get_list("storage_time_sweep", "deltas_mhz", cfg.sweep_deltas_mhz);
    for (double d : cfg.sweep_deltas_mhz)
        if (d <= 0.0)
            problems.push_back("[storage_time_sweep] deltas_mhz must be positive");

    cfg.input_fwhms_ns =
        kv.get_list("bandwidth_sweep", "input_fwhms_ns", cfg.input_fwhms_ns);
    for (double f : cfg.input_fwhms_ns)
        if (f <= 0.0)
            problems.push_back("[bandwidth_sweep] input_fwhms_ns must be positive");

    cfg.multimode_pattern =
        kv.get("multimode64", "pattern", cfg.multimode_pattern);
    if (cfg.multimode_pattern != "random01" &&
        cfg.multimode_pattern != "all_ones" &&
        cfg.multimode_pattern != "modulated")
        problems.push_back(
            "[multimode64] pattern must be random01, all_ones or modulated");
    cfg.n_modes =
        static_cast<int>(kv.get_int("multimode64", "n_modes", cfg.n_modes));
    if (cfg.n_modes < 1)
        problems.push_back("[multimode64] n_modes must be >= 1");
    cfg.mode_separation_ns = kv.get_double("multimode64", "mode_separation_ns",
                                           cfg.mode_separation_ns);
    cfg.mode_fwhm_ns =
        kv.get_double("multimode64", "mode_fwhm_ns", cfg.mode_fwhm_ns);
    if (cfg.mode_separation_ns <= 0.0 || cfg.mode_fwhm_ns <= 0.0)
        problems.push_back("[multimode64] mode timing must be positive");

    cfg.interference_phi_rad =
        kv.get_double("interference", "phi_rad", cfg.interference_phi_rad);
    cfg.delta1_mhz = kv.get_double("interference", "delta1_mhz", cfg.delta1_mhz);
    cfg.delta2_mhz = kv.get_double("interference", "delta2_mhz", cfg.delta2_mhz);
    cfg.bin_separation_us =
        kv.get_double("interference", "bin_separation_us", cfg.bin_separation_us);
    if (cfg.delta1_mhz <= 0.0 || cfg.delta2_mhz <= 0.0 ||
        cfg.delta1_mhz == cfg.delta2_mhz)
        problems.push_back("[interference] periods must be positive and distinct");
    else {
        const double expected =
            std::abs(1.0 / cfg.delta1_mhz - 1.0 / cfg.delta2_mhz);
        if (std::abs(cfg.bin_separation_us - expected) > 1e-6)
            problems.push_back(
                "[interference] bin_separation_us must equal |1/delta1 - "
                "1/delta2| = " +
                format_metric(expected) + " us");
    }

    cfg.finesse_study_depths =
        kv.get_list("finesse_study", "depths", cfg.finesse_study_depths);
    for (double d : cfg.finesse_study_depths)
        if (d < 0.0)
            problems.push_back("[finesse_study] depths must be >= 0");
    cfg.finesse_study_background = kv.get_double(
        "finesse_study", "background", cfg.finesse_study_background);
    if (cfg.finesse_study_background < 0.0)
        problems.push_back("[finesse_study] background must be >= 0");

    // Cross-field rule: explicit carrier shifts must be multiples of the
    // relevant comb period.
    if (!cfg.preparation.freq_shifts_mhz.empty() && cfg.comb.delta_mhz > 0.0) {
        for (double s : cfg.preparation.freq_shifts_mhz) {
            const double m = s / cfg.comb.delta_mhz;
            if (std::abs(m - std::round(m)) > 1e-9 * std::max(1.0, std::abs(m)))
                problems.push_back("[preparation] freq shift " +
                                   format_metric(s) +
                                   " MHz is not a multiple of delta");
        }
    }

    if (!problems.empty()) {
        std::string msg = "config validation failed:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
    return build_config(KeyValueFile::parse_file(path));
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
    return build_config(KeyValueFile::parse_text(text, origin));
}

ExperimentConfig default_config(const std::string& experiment_id) {
    if (!is_known_experiment(experiment_id))
        throw ConfigError("unknown experiment id '" + experiment_id + "'");
    return build_config(
        KeyValueFile::parse_text("[experiment]\nid = " + experiment_id + "\n"));
}

std::string describe_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "experiment = " << cfg.id << '\n';
    out << "seed = " << cfg.seed << '\n';
    out << "label = " << cfg.label << '\n';
    out << "grid.f_center_mhz = " << format_metric(cfg.grid.f_center_mhz) << '\n';
    out << "grid.span_mhz = " << format_metric(cfg.grid.span_mhz) << '\n';
    out << "grid.n_points = " << cfg.grid.n_points << '\n';
    out << "comb.delta_mhz = " << format_metric(cfg.comb.delta_mhz) << '\n';
    out << "comb.finesse = " << format_metric(cfg.comb.finesse) << '\n';
    out << "comb.peak_depth = " << format_metric(cfg.comb.peak_depth) << '\n';
    out << "comb.background = " << format_metric(cfg.comb.background) << '\n';
    out << "comb.bandwidth_mhz = " << format_metric(cfg.comb.bandwidth_mhz) << '\n';
    out << "comb.source = "
        << (cfg.comb.source == CombSource::Parametric ? "parametric" : "burned")
        << '\n';
    out << "preparation.pulse_fwhm_us = "
        << format_metric(cfg.preparation.pulse_fwhm_us) << '\n';
    out << "preparation.n_side_pairs = " << cfg.preparation.n_side_pairs << '\n';
    out << "preparation.repeats = " << cfg.preparation.repeats << '\n';
    out << "preparation.sequence_period_us = "
        << format_metric(cfg.preparation.sequence_period_us) << '\n';
    out << "preparation.kappa = "
        << (cfg.preparation.kappa ? format_metric(*cfg.preparation.kappa)
                                  : std::string("auto"))
        << '\n';
    out << "preparation.resolution_fwhm_mhz = "
        << format_metric(cfg.preparation.resolution_fwhm_mhz < 0.0
                             ? cfg.material.gamma_eff_mhz
                             : cfg.preparation.resolution_fwhm_mhz)
        << '\n';
    out << "preparation.passes = " << cfg.preparation.passes << '\n';
    out << "preparation.relaxation = " << (cfg.preparation.relaxation ? 1 : 0)
        << '\n';
    out << "material.T1_us = " << format_metric(cfg.material.t1_us) << '\n';
    out << "material.T2_us = " << format_metric(cfg.material.t2_us) << '\n';
    out << "material.T1Z_ms = " << format_metric(cfg.material.t1z_ms) << '\n';
    out << "material.gamma_eff_mhz = " << format_metric(cfg.material.gamma_eff_mhz)
        << '\n';
    out << "material.inhom_width_ghz = "
        << format_metric(cfg.material.inhom_width_ghz) << '\n';
    out << "material.single_pass_depth = "
        << format_metric(cfg.material.single_pass_depth) << '\n';
    out << "material.g_ground = " << format_metric(cfg.material.g_ground) << '\n';
    out << "material.g_excited = " << format_metric(cfg.material.g_excited) << '\n';
    out << "detection.mean_photons = " << format_metric(cfg.detection.mean_photons)
        << '\n';
    out << "detection.det_efficiency = "
        << format_metric(cfg.detection.det_efficiency) << '\n';
    out << "detection.dark_rate_hz = " << format_metric(cfg.detection.dark_rate_hz)
        << '\n';
    out << "detection.path_transmission = "
        << format_metric(cfg.detection.path_transmission) << '\n';
    out << "detection.n_trials = " << cfg.detection.n_trials << '\n';
    out << "detection.bin_width_ns = " << format_metric(cfg.detection.bin_width_ns)
        << '\n';
    if (cfg.id == "storage_time_sweep") {
        out << "storage_time_sweep.deltas_mhz =";
        for (double d : cfg.sweep_deltas_mhz) out << ' ' << format_metric(d);
        out << '\n';
    } else if (cfg.id == "bandwidth_sweep") {
        out << "bandwidth_sweep.input_fwhms_ns =";
        for (double f : cfg.input_fwhms_ns) out << ' ' << format_metric(f);
        out << '\n';
    } else if (cfg.id == "multimode64") {
        out << "multimode64.pattern = " << cfg.multimode_pattern << '\n';
        out << "multimode64.n_modes = " << cfg.n_modes << '\n';
        out << "multimode64.mode_separation_ns = "
            << format_metric(cfg.mode_separation_ns) << '\n';
        out << "multimode64.mode_fwhm_ns = " << format_metric(cfg.mode_fwhm_ns)
            << '\n';
    } else if (cfg.id == "interference") {
        out << "interference.phi_rad = " << format_metric(cfg.interference_phi_rad)
            << '\n';
        out << "interference.delta1_mhz = " << format_metric(cfg.delta1_mhz) << '\n';
        out << "interference.delta2_mhz = " << format_metric(cfg.delta2_mhz) << '\n';
        out << "interference.bin_separation_us = "
            << format_metric(cfg.bin_separation_us) << '\n';
    } else if (cfg.id == "finesse_study") {
        out << "finesse_study.depths =";
        for (double d : cfg.finesse_study_depths) out << ' ' << format_metric(d);
        out << '\n';
        out << "finesse_study.background = "
            << format_metric(cfg.finesse_study_background) << '\n';
    }
    return out.str();
}

}  // namespace afc
