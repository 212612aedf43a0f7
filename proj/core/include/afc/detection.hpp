#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afc/errors.hpp"
#include "afc/waveform.hpp"

namespace afc {

// Detection chain reduced to attenuation plus counting: mean photon number
// of the input, collection-path transmission, detector efficiency and a
// flat dark-count rate. Counts are Poisson-sampled per histogram bin with a
// counter-derived per-bin RNG stream, so results are reproducible for a
// fixed seed and independent of any parallel split.
struct DetectionConfig {
    double mean_photons = 1.0;        // per normalization unit (pulse or train)
    double det_efficiency = 0.32;
    double dark_rate_hz = 300.0;
    double path_transmission = 0.27;
    long long n_trials = 1000;
    double bin_width_ns = 1.0;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct CountHistogram {
    std::vector<double> bin_edges_us;  // size counts.size() + 1
    std::vector<long long> counts;
    long long n_trials = 0;

    /// Expected counts per bin (signal + dark), same order as counts; kept
    /// alongside the sampled values for statistics checks.
    std::vector<double> expected;
};

/// Histograms detector clicks for `trace` over n_trials trials. The
/// per-trial detection probability in a bin is mean_photons *
/// path_transmission * det_efficiency * (bin energy / reference_energy),
/// with dark_rate * bin_width added. reference_energy is the energy of the
/// unit carrying mean_photons (the whole input by default, a single mode
/// for trains). Warns when a bin's per-trial probability exceeds 1.
CountHistogram sample_counts(const Waveform& trace, double reference_energy,
                             const DetectionConfig& cfg,
                             WarningList* warnings = nullptr);

/// Same sampler on caller-supplied bin edges (used for per-mode windows).
CountHistogram sample_counts_with_edges(const Waveform& trace,
                                        double reference_energy,
                                        const std::vector<double>& bin_edges_us,
                                        const DetectionConfig& cfg,
                                        WarningList* warnings = nullptr);

struct FringeResult {
    std::vector<double> phases_rad;
    std::vector<double> counts;
    double v_raw = 0.0;     // visibility with no background subtracted
    double v_net = 0.0;     // visibility with the dark floor subtracted
    double dark_floor = 0.0;  // expected background counts per phase point
    double amplitude = 0.0;   // fitted A of A (1 + V cos(phi - phi0)) + B
    double phase0_rad = 0.0;  // fitted fringe phase
    double v_minmax = 0.0;    // (max-min)/(max+min-2B) diagnostic only
};

/// Least-squares cosine fit counts(phi) = A (1 + V cos(phi - phi0)) + B,
/// run twice: with B fixed to dark_floor (v_net) and with B = 0 (v_raw).
/// Requires >= 8 phase points spanning at least half a fringe period.
FringeResult estimate_visibility(const std::vector<double>& phases_rad,
                                 const std::vector<double>& counts,
                                 double dark_floor);

/// Conditional qubit fidelity (1 + V) / 2 of a fringe visibility.
inline double conditional_fidelity(double visibility) {
    return 0.5 * (1.0 + visibility);
}

/// Comma-separated dump (bin_start_us, bin_end_us, counts).
void save_histogram_csv(const CountHistogram& hist, const std::string& path);

void save_fringe_result(const FringeResult& fringe, const std::string& path);

}  // namespace afc
