#pragma once

#include <optional>
#include <string>
#include <vector>

#include "afc/absorption_profile.hpp"
#include "afc/comb.hpp"
#include "afc/waveform.hpp"

namespace afc {

// Complex linear response H(f) of an absorption profile, sampled on the
// profile's grid in ascending-frequency order.
struct TransferFunction {
    SpectralGrid grid;
    std::vector<cdouble> response;
};

/// Weak-pulse linear response of the medium: |H| = exp(-P d(f)/2) with the
/// minimum-phase (Kramers-Kronig) phase reconstructed from the depth via a
/// Hilbert transform, so the impulse response is causal and the comb echoes
/// appear at positive delays.
TransferFunction transfer_function(const AbsorptionProfile& profile);

/// Applies H to the waveform in the frequency domain. The waveform must be
/// sampled at dt = 1/span and fit in the grid's time window; throws
/// WaveformError("bandwidth exceeds grid...") when appreciable input energy
/// sits in the outer 10% of the spectral window. Output energy never
/// exceeds input energy for non-negative depth.
Waveform propagate(const Waveform& input, const TransferFunction& tf);

struct TrainLayout {
    double t_first_us = 0.0;
    double separation_us = 0.0;
    std::size_t n_modes = 0;
};

struct EchoOrder {
    int order = 0;
    double echo_time_us = 0.0;
    double efficiency = 0.0;
};

struct EchoReport {
    double echo_time_us = 0.0;        // delay of the first echo, relative to the input
    double efficiency = 0.0;          // first-echo energy / input energy
    double transmitted_fraction = 0.0;
    std::vector<double> per_mode_efficiencies;  // empty unless a train layout was given
    std::vector<double> per_mode_input_energy;
    std::vector<double> per_mode_echo_energy;
    std::vector<EchoOrder> higher_orders;       // filled only on request
};

/// Measures the first echo of `output` at delay storage_time after the
/// input. window_half_width <= 0 selects the default: 0.35*storage_time for
/// a single mode, separation/2 for trains. With a train layout, per-mode
/// energies and efficiencies are reported (NaN efficiency for empty input
/// modes). Throws WaveformError when the echo window would overlap the
/// transmitted input.
EchoReport extract_echo(const Waveform& output, const Waveform& input,
                        double storage_time_us,
                        double window_half_width_us = -1.0,
                        const TrainLayout* train = nullptr,
                        bool include_higher_orders = false);

/// Flat key=value dump of an echo report.
void save_echo_report(const EchoReport& report, const std::string& path);

/// Phase of the echo from a comb whose center is detuned by delta_f,
/// relative to the echo of the unshifted comb; equals 2 pi delta_f / delta
/// modulo 2 pi. The input pulse is propagated through both combs.
double echo_phase_shift(const CombSpec& base, const SpectralGrid& grid,
                        double delta_f_mhz, const Waveform& input,
                        double window_half_width_us = -1.0);

}  // namespace afc
