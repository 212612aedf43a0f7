#include "afc/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "afc/fft.hpp"
#include "afc/io_util.hpp"

namespace afc {

namespace {

// Linear (ascending f) index -> FFT bin. Grid index n/2 is the carrier
// (zero detuning) and maps to bin 0.
std::size_t fft_bin_of(std::size_t linear_index, std::size_t n) {
    return (linear_index + n / 2) % n;
}

}  // namespace

TransferFunction transfer_function(const AbsorptionProfile& profile) {
    const std::size_t n = profile.grid.n_points();
    std::vector<double> half_depth(n);
    for (std::size_t k = 0; k < n; ++k)
        half_depth[k] = 0.5 * profile.effective_depth(k);

    // Causality with the e^{-i 2 pi f t} analysis convention requires
    // phase = -hilbert(ln|H|) = +hilbert(P d / 2).
    const std::vector<double> phase = hilbert(half_depth);

    TransferFunction tf{profile.grid, std::vector<cdouble>(n)};
    for (std::size_t k = 0; k < n; ++k)
        tf.response[k] = std::polar(std::exp(-half_depth[k]), phase[k]);
    return tf;
}

Waveform propagate(const Waveform& input, const TransferFunction& tf) {
    const std::size_t n = tf.grid.n_points();
    const double span = tf.grid.span();
    if (std::abs(input.dt * span - 1.0) > 1e-9)
        throw WaveformError(
            "waveform sampling incompatible with grid: expected dt = 1/span");
    if (input.size() > n)
        throw WaveformError("waveform longer than the grid's time window");

    std::vector<cdouble> buf(n, cdouble(0.0, 0.0));
    std::copy(input.samples.begin(), input.samples.end(), buf.begin());
    fft_forward(buf);

    // Energy in the outer 10% of the spectral window signals an input that
    // does not fit the grid.
    double total = 0.0, outer = 0.0;
    const std::size_t guard = n / 2 - n / 20;
    for (std::size_t b = 0; b < n; ++b) {
        const double e = std::norm(buf[b]);
        total += e;
        const std::size_t dist = std::min(b, n - b);
        if (dist > guard) outer += e;
    }
    if (total > 0.0 && outer > 1e-6 * total)
        throw WaveformError(
            "bandwidth exceeds grid: input spectrum reaches the window edge");

    for (std::size_t k = 0; k < n; ++k)
        buf[fft_bin_of(k, n)] *= tf.response[k];
    fft_inverse(buf);
    return Waveform(std::move(buf), input.dt, input.t0);
}

namespace {

struct Window {
    double lo;
    double hi;
};

double window_energy(const Waveform& w, const Window& win) {
    return w.energy_in(win.lo, win.hi);
}

}  // namespace

EchoReport extract_echo(const Waveform& output, const Waveform& input,
                        double storage_time_us, double window_half_width_us,
                        const TrainLayout* train,
                        bool include_higher_orders) {
    if (!(storage_time_us > 0.0))
        throw WaveformError("storage time must be positive");
    const double input_energy = input.energy();
    if (!(input_energy > 0.0))
        throw WaveformError("input waveform carries no energy");

    double w = window_half_width_us;
    if (w <= 0.0)
        w = train ? 0.5 * train->separation_us : 0.35 * storage_time_us;

    EchoReport report;

    // Reference time of the input: its energy centroid (per-mode centers
    // for trains).
    const double t_end = output.t0 + static_cast<double>(output.size()) * output.dt;
    const double in_center =
        input.centroid_in(input.t0, input.t0 + static_cast<double>(input.size()) * input.dt);

    if (!train) {
        const Window echo_win{in_center + storage_time_us - w,
                              in_center + storage_time_us + w};
        // The window must not contain appreciable transmitted-pulse energy;
        // testing the *input* inside the echo window is equivalent and
        // independent of the medium.
        if (input.energy_in(echo_win.lo, echo_win.hi) > 1e-6 * input_energy)
            throw WaveformError(
                "echo window overlaps the transmitted input pulse");
        const double echo_energy = window_energy(output, echo_win);
        report.efficiency = echo_energy / input_energy;
        report.echo_time_us =
            output.centroid_in(echo_win.lo, echo_win.hi) - in_center;
        // Everything ahead of the first echo window is transmitted light.
        report.transmitted_fraction =
            output.energy_in(output.t0, echo_win.lo) / input_energy;
        if (include_higher_orders) {
            for (int order = 2;; ++order) {
                const double tc = in_center + order * storage_time_us;
                if (tc + w > t_end) break;
                EchoOrder eo;
                eo.order = order;
                eo.efficiency =
                    output.energy_in(tc - w, tc + w) / input_energy;
                eo.echo_time_us = output.centroid_in(tc - w, tc + w) - in_center;
                report.higher_orders.push_back(eo);
            }
        }
        return report;
    }

    // Train: fixed per-mode windows around t_k + T, half-width w (defaults
    // to separation/2 so adjacent windows tile without overlap).
    const std::size_t nm = train->n_modes;
    report.per_mode_input_energy.resize(nm);
    report.per_mode_echo_energy.resize(nm);
    report.per_mode_efficiencies.resize(nm);

    double max_mode_energy = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
        const double tc = train->t_first_us + static_cast<double>(m) * train->separation_us;
        report.per_mode_input_energy[m] = input.energy_in(tc - w, tc + w);
        max_mode_energy = std::max(max_mode_energy, report.per_mode_input_energy[m]);
    }
    const double train_end = train->t_first_us +
                             static_cast<double>(nm - 1) * train->separation_us;
    if (train->t_first_us + storage_time_us - w < train_end + w)
        throw WaveformError(
            "echo window overlaps the transmitted input train");

    double echo_total = 0.0;
    double weighted_time = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
        const double tc = train->t_first_us + static_cast<double>(m) * train->separation_us +
                          storage_time_us;
        const double e = output.energy_in(tc - w, tc + w);
        report.per_mode_echo_energy[m] = e;
        echo_total += e;
        const double ein = report.per_mode_input_energy[m];
        report.per_mode_efficiencies[m] =
            ein > 1e-12 * max_mode_energy
                ? e / ein
                : std::numeric_limits<double>::quiet_NaN();
        if (m == 0)
            weighted_time = output.centroid_in(tc - w, tc + w) -
                            train->t_first_us;
    }
    report.efficiency = echo_total / input_energy;
    report.echo_time_us = weighted_time;
    report.transmitted_fraction =
        output.energy_in(train->t_first_us - w, train_end + w) / input_energy;
    return report;
}

void save_echo_report(const EchoReport& report, const std::string& path) {
    auto out = open_output(path);
    out << "echo_time_us = " << format_metric(report.echo_time_us) << '\n';
    out << "efficiency = " << format_metric(report.efficiency) << '\n';
    out << "transmitted_fraction = " << format_metric(report.transmitted_fraction)
        << '\n';
    for (std::size_t m = 0; m < report.per_mode_efficiencies.size(); ++m) {
        out << "mode_" << m << "_efficiency = "
            << format_metric(report.per_mode_efficiencies[m]) << '\n';
    }
    for (const auto& eo : report.higher_orders) {
        out << "order_" << eo.order
            << "_efficiency = " << format_metric(eo.efficiency) << '\n';
    }
}

double echo_phase_shift(const CombSpec& base, const SpectralGrid& grid,
                        double delta_f_mhz, const Waveform& input,
                        double window_half_width_us) {
    CombSpec shifted = base;
    shifted.center_offset_mhz += delta_f_mhz;

    const auto out_ref = propagate(input, transfer_function(build_comb(base, grid)));
    const auto out_shift =
        propagate(input, transfer_function(build_comb(shifted, grid)));

    const double storage = 1.0 / base.delta_mhz;
    double w = window_half_width_us > 0.0 ? window_half_width_us : 0.35 * storage;
    const double in_center = input.centroid_in(
        input.t0, input.t0 + static_cast<double>(input.size()) * input.dt);
    const double lo = in_center + storage - w;
    const double hi = in_center + storage + w;

    cdouble overlap(0.0, 0.0);
    for (std::size_t k = 0; k < out_ref.size(); ++k) {
        const double t = out_ref.time(k);
        if (t >= lo && t <= hi)
            overlap += out_shift.samples[k] * std::conj(out_ref.samples[k]);
    }
    double phase = std::arg(overlap);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    return phase;
}

}  // namespace afc
