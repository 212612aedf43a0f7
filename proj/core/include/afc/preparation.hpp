#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afc/absorption_profile.hpp"
#include "afc/errors.hpp"
#include "afc/spectral_grid.hpp"

namespace afc {

// One pump pulse: Gaussian envelope of the given intensity FWHM centered at
// `time_us`, carrier offset relative to the laser carrier, carrier phase,
// and a dimensionless area proportional to field amplitude times duration.
struct PumpPulse {
    double time_us = 0.0;
    double area = 1.0;
    double phase_rad = 0.0;
    double carrier_offset_mhz = 0.0;
    double fwhm_us = 0.02;
};

struct PreparationSequence {
    std::vector<PumpPulse> pulses;
    int repeats = 1;
    double sequence_period_us = 0.0;

    void validate() const;
};

/// Pi-dephased burning sequence: per carrier offset, 2*n_side_pairs+1
/// pulses spaced tau = 1/delta, side pulses of unit area and zero phase,
/// central pulse of area 2*n_side_pairs and phase pi (so its amplitude
/// equals the summed side amplitudes and the power spectrum develops holes
/// at multiples of delta). The pattern repeats at every carrier offset in
/// freq_shifts, which must be integer multiples of delta.
PreparationSequence make_afc_sequence(double delta_mhz, int n_side_pairs,
                                      double pulse_fwhm_us,
                                      const std::vector<double>& freq_shifts_mhz,
                                      int repeats = 2000);

/// Sequence burning two interleaved combs of periods delta1 and delta2 with
/// one shared central pi pulse at area 4*n_side_pairs. Side pulse k
/// (k = +-1, +-2, ...) of the delta1 family carries phase k*phase, which
/// shifts the burned delta1 comb by phase*delta1/(2 pi) in frequency. Side
/// pulses of the two families must not coincide within one FWHM.
PreparationSequence make_double_afc_sequence(double delta1_mhz,
                                             double delta2_mhz,
                                             double phase_rad,
                                             int n_side_pairs,
                                             double pulse_fwhm_us,
                                             int repeats = 2000);

/// Power spectrum of one sequence instance on the grid, normalized to max 1:
/// S = |sum_j area_j e^{i phase_j} E_j(f - offset_j) e^{-i 2 pi f t_j}|^2
/// with E_j the Gaussian envelope transform.
std::vector<double> sequence_power_spectrum(const PreparationSequence& seq,
                                            const SpectralGrid& grid);

struct RelaxationConfig {
    double t1z_ms = 100.0;
    double wall_time_per_repeat_us = 16.0;
};

struct BurnConfig {
    double pump_strength = 1e-3;   // per-repeat depletion coefficient kappa
    double resolution_fwhm_mhz = 1.0;  // Lorentzian kernel width; 0 disables
    std::optional<RelaxationConfig> relaxation;

    void validate() const;
};

/// Iterative optical pumping: per repeat the population is depleted by
/// exp(-kappa S(f)) and optionally relaxes toward the initial profile with
/// the Zeeman lifetime; the accumulated result is evaluated in closed form
/// (the per-frequency recurrence is affine). The burned population is then
/// convolved with a unit-area Lorentzian representing the effective
/// spectral resolution of the pumping.
AbsorptionProfile burn_comb(const AbsorptionProfile& initial,
                            const PreparationSequence& seq,
                            const BurnConfig& cfg,
                            WarningList* warnings = nullptr);

struct CombMetrics {
    double peak_depth = 0.0;   // d, mean tooth height above background
    double background = 0.0;   // d0, mean of inter-tooth minima
    double finesse = 0.0;      // delta / mean tooth FWHM
    double gamma_mhz = 0.0;    // mean tooth FWHM
    int n_peaks = 0;           // teeth above d0 + d/2
    std::vector<double> tooth_frequencies_mhz;
    std::vector<double> tooth_heights;
};

/// Measures (d, d0, F, N_p) of a comb of known period on the beam-effective
/// depth (passes folded in). Throws AnalysisError("no comb teeth...") when
/// the modulation contrast is below 5%.
CombMetrics comb_metrics(const AbsorptionProfile& profile, double delta_mhz);

/// Comma-separated dump (time_us, area, phase_rad, offset_MHz, fwhm_us).
void save_sequence_csv(const PreparationSequence& seq, const std::string& path);
PreparationSequence load_sequence_csv(const std::string& path);

}  // namespace afc
